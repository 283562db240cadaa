#pragma once

#include <cstdint>
#include <vector>

#include "hetnet/config.hpp"
#include "hetnet/ppp.hpp"

namespace hetnet {

enum class Scheme { bna, mmpa };
enum class AssocMode { noncrossing, crossing };

struct AssociationPolicy {
    Scheme scheme = Scheme::mmpa;
    AssocMode mode = AssocMode::noncrossing;
    std::vector<double> bias; // BNA only, one per tier
};

void validate_policy(const AssociationPolicy& p, int num_tiers);

// Association weight W of one AP.
double association_weight(const AssociationPolicy& p, const TierSpec& t, const MarkedPoint& ap);

// E[W_k^c] for the tier's weight law.
double weight_moment(const AssociationPolicy& p, const TierSpec& t, double sigma_ln, double c);

struct ServedRecord {
    std::int32_t ap = -1; // index into Deployment::aps
    int tier = 0;
    double weighted_distance = 0.0; // W*^{-1/alpha} |X* - u|
};

struct UserRef {
    std::int32_t population = -1;
    std::int64_t index = -1;
};

struct AssociationMap {
    std::vector<std::vector<ServedRecord>> users; // per population
    std::vector<std::size_t> processed;           // users handled per population (early exit)
    std::vector<std::uint32_t> tagged;            // per AP
    std::vector<UserRef> first_user;              // per AP, first user that picked it

    bool is_void(std::size_t ap) const { return tagged[ap] == 0; }
};

struct AssociateOptions {
    // Stop a population once every AP it can reach is tagged. Void flags stay
    // exact; records of unprocessed users are left empty.
    bool early_exit = false;
};

// Tiers a population may associate with. Noncrossing: population 0 is RAT-L
// (tiers 1..K-1), population 1 is RAT-U (tier K). Crossing: all tiers.
std::vector<int> eligible_tiers(AssocMode mode, int num_tiers, std::size_t population);

AssociationMap associate(const Deployment& d, const std::vector<TierSpec>& tiers, const AssociationPolicy& p, double alpha,
                         const AssociateOptions& opt = {});

// Server of an extra user at u (e.g. the typical user) by a full scan; the
// map is left untouched.
ServedRecord serve_point(const Deployment& d, const std::vector<TierSpec>& tiers, const AssociationPolicy& p,
                         double alpha, const std::vector<int>& eligible, Vec2 u);

// Copies the void flags of the map into the deployment marks.
void apply_void_flags(const AssociationMap& m, Deployment& d);

// Analytic per-tier association statistics.
struct AssocStats {
    std::vector<double> Lambda;       // lambda_k E[W_k^{2/a}]
    std::vector<double> share;        // Lambda_k / sum_{m<K} Lambda_m (L-population shares; k = K too)
    std::vector<double> share_hat;    // Lambda_k / sum_m Lambda_m
    std::vector<double> zeta;         // 3.5 E[W^{2/a}] E[W^{-2/a}]
    std::vector<double> lambda_tilde; // lambda_k E[W^{-2/a}] E[W^{2/a}]
};

AssocStats association_stats(const std::vector<TierSpec>& tiers, const AssociationPolicy& p, double sigma_ln,
                             double alpha);

// Void probabilities per tier. Noncrossing uses (mu_L, mu_U); crossing uses mu.
std::vector<double> void_probabilities_noncrossing(const std::vector<TierSpec>& tiers, const AssocStats& s,
                                                   double mu_L, double mu_U);
std::vector<double> void_probabilities_crossing(const std::vector<TierSpec>& tiers, const AssocStats& s,
                                                double mu);
double analytic_void_probability(const std::vector<TierSpec>& tiers, const AssociationPolicy& p, double sigma_ln,
                                 double alpha, double mu_L, double mu_U, int k);

// CDF of the weighted association distance over the given eligible tiers.
double weighted_distance_cdf(const std::vector<TierSpec>& tiers, const AssociationPolicy& p, double sigma_ln,
                             double alpha, const std::vector<int>& eligible, double x);

// Guard distance for tier k: APs closer than this to the boundary are left
// out of void statistics.
double void_guard_distance(const std::vector<TierSpec>& tiers, const AssociationPolicy& p, double sigma_ln,
                           double alpha, int k, double quantile);

struct Estimate {
    double value = 0.0;
    double se = 0.0; // standard error
    std::uint64_t count = 0;
};

// Binomial proportion with its standard error.
Estimate proportion(std::uint64_t hits, std::uint64_t n);

// Pooled void counts over many maps.
class VoidTally {
public:
    explicit VoidTally(int num_tiers) : voids_(num_tiers, 0), total_(num_tiers, 0) {}
    // guard[k-1] in meters; APs with boundary clearance below it are skipped.
    void add(const Deployment& d, const AssociationMap& m, const std::vector<double>& guard);
    void merge(const VoidTally& o);
    Estimate estimate(int k) const;

private:
    std::vector<std::uint64_t> voids_, total_;
};

Estimate empirical_void_probability(const std::vector<const Deployment*>& deps,
                                    const std::vector<const AssociationMap*>& maps, int k, double guard);

} // namespace hetnet
