#pragma once

#include <cstdint>
#include <vector>

#include "hetnet/association.hpp"
#include "hetnet/config.hpp"
#include "hetnet/ppp.hpp"

namespace hetnet {

struct ContentionOptions {
    bool void_aware = true;   // false: every AP behaves as if it had users
    bool redraw_gate = false; // fresh own-link gains from the round's stream instead of the marks
    std::int32_t forced = -1; // AP whose gate is drawn from its law given the gain clears Delta
};

struct ContentionOutcome {
    std::vector<Access> access;
    std::vector<double> backoff;           // < 0 for APs that did not contend
    std::vector<std::uint64_t> candidates; // per tier: APs that would contend if the gate passed
    std::vector<std::uint64_t> contending; // per tier
    std::vector<std::uint64_t> granted;    // per tier

    bool is_granted(std::size_t i) const { return access[i] == Access::granted; }
};

// One slot of opportunistic CSMA: non-void APs of contending tiers whose own
// unlicensed gain clears Delta draw T ~ U[0, tau]; an AP is granted unless
// some other contender inside its sensing disk has a smaller backoff.
// Void flags are read from the deployment marks when void_aware is set.
ContentionOutcome run_contention(const Deployment& d, const std::vector<TierSpec>& tiers, double delta,
                                 double sigma_ln, std::uint64_t seed, const ContentionOptions& opt = {});

// Writes access flags and backoffs into the marks.
void apply_contention(const ContentionOutcome& o, Deployment& d);

// Pooled granted / contending counts per tier, skipping APs whose sensing
// disk is cut by the window boundary.
class AccessTally {
public:
    explicit AccessTally(int num_tiers)
        : granted_(num_tiers, 0), contending_(num_tiers, 0), candidates_(num_tiers, 0) {}
    void add(const Deployment& d, const std::vector<TierSpec>& tiers, const ContentionOutcome& o);
    void merge(const AccessTally& o);
    // rho_k: granted / contending. Throws when tier k never contended.
    Estimate access(int k) const;
    // rho_k p_k: granted / (non-void APs of the tier).
    Estimate transmit_fraction(int k) const;

private:
    std::vector<std::uint64_t> granted_, contending_, candidates_;
};

// Grant probability of a contender with backoff window tau whose sensing
// disk holds the given rivals (tau_j, p_j): each rival contends with
// probability p_j and, if it does, wins when its backoff is smaller.
// Evaluates (1/tau) int_0^tau prod_j (1 - p_j min(t/tau_j, 1)) dt.
struct Rival {
    double tau;
    double p;
};
double conditional_grant_probability(double tau, const std::vector<Rival>& rivals);

// Access statistics with the gates and backoffs integrated out given the
// AP pattern and void flags. Unbiased for rho_k and far less noisy than
// counting outcomes when denials are rare.
class ConditionalAccessTally {
public:
    explicit ConditionalAccessTally(int num_tiers) : sum_(num_tiers, 0.0), sum2_(num_tiers, 0.0), n_(num_tiers, 0) {}
    // gate_p[k-1]: probability that a tier-k AP clears the gate.
    void add(const Deployment& d, const std::vector<TierSpec>& tiers, const std::vector<double>& gate_p,
             bool void_aware);
    void merge(const ConditionalAccessTally& o);
    Estimate access(int k) const;

private:
    std::vector<double> sum_, sum2_;
    std::vector<std::uint64_t> n_;
};

Estimate empirical_access_probability(const std::vector<const Deployment*>& deps,
                                      const std::vector<const ContentionOutcome*>& outcomes,
                                      const std::vector<TierSpec>& tiers, int k);

// Area of the intersection of two disks with radii r1, r2 and center distance d.
double lens_area(double r1, double r2, double d);

struct MeanAreaTable {
    int K = 0;
    std::vector<double> mean; // K x K, row = sensing tier k, column = contender tier m
    std::vector<double> se;
    std::vector<std::uint64_t> count;

    double at(int k, int m) const { return mean[(k - 1) * K + (m - 1)]; }
    double& at(int k, int m) { return mean[(k - 1) * K + (m - 1)]; }
};

// Monte Carlo accumulator for the mean contention areas. For each non-void
// tagged AP of tier k, D_m is the disk around its first served user that
// holds no tier-m AP of median weight able to beat the server.
class AreaTally {
public:
    explicit AreaTally(int num_tiers);
    void add(const Deployment& d, const AssociationMap& m, const std::vector<TierSpec>& tiers,
             const AssociationPolicy& p, double alpha);
    void merge(const AreaTally& o);
    MeanAreaTable table(const std::vector<TierSpec>& tiers) const;

private:
    int K_;
    std::vector<double> sum_, sum2_;
    std::vector<std::uint64_t> n_;
};

MeanAreaTable estimate_mean_areas(const std::vector<const Deployment*>& deps,
                                  const std::vector<const AssociationMap*>& maps,
                                  const std::vector<TierSpec>& tiers, const AssociationPolicy& p, double alpha);

// Full sensing area for every pair; usable when no simulation is available.
MeanAreaTable full_sensing_areas(const std::vector<TierSpec>& tiers);

struct ThinningReport {
    double radius = 0.0;
    double observed_pairs = 0.0;
    double expected_pairs = 0.0; // same granted counts placed as a PPP
    double ratio = 1.0;
    bool sufficient = false;
};

// Pair-count ratio of granted APs at separations below radius against a
// Poisson pattern of the same size; a hard-core pattern gives a ratio < 1.
ThinningReport verify_mhpp_thinning(const std::vector<const Deployment*>& deps,
                                    const std::vector<const ContentionOutcome*>& outcomes, double radius,
                                    double min_expected_pairs = 20.0);

} // namespace hetnet
