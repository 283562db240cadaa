#pragma once

#include <cstdint>
#include <vector>

#include "hetnet/association.hpp"
#include "hetnet/config.hpp"
#include "hetnet/csma.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/ppp.hpp"

namespace hetnet {

enum class Band { l_licensed, l_unlicensed, u_unlicensed };

const char* band_name(Band b);

struct SirSample {
    Band band = Band::l_licensed;
    int serving_tier = 0;
    double sir = 0.0;     // +inf when nothing interferes
    bool granted = false; // serving AP held the unlicensed channel
};

// Raised when the L-unlicensed conditioning event (server granted) fails.
struct ConditioningFailed : RunError {
    using RunError::RunError;
};

struct SimModel {
    std::vector<TierSpec> tiers;
    ChannelParams channel;
    AssociationPolicy policy; // mode is overridden per run
    Window window;
    double guard_quantile = 0.999;
    int contention_rounds = 1; // extra rounds only feed the access statistics
    bool early_exit = true;
};

// Everything one association mode accumulates over trials.
struct ModeTally {
    AssocMode mode = AssocMode::noncrossing;
    VoidTally voids;
    AccessTally access;
    AccessTally access_blind;
    ConditionalAccessTally access_cond;
    ConditionalAccessTally access_cond_blind;
    AreaTally areas;
    std::vector<SirSample> samples;
    std::uint64_t lu_attempts = 0, lu_accepts = 0;
    std::uint64_t trials = 0;

    ModeTally(AssocMode m, int num_tiers)
        : mode(m), voids(num_tiers), access(num_tiers), access_blind(num_tiers), access_cond(num_tiers),
          access_cond_blind(num_tiers), areas(num_tiers) {}
    void merge(const ModeTally& o);
    double conditioning_rate() const;
};

// One deployment evaluated in every mode that has a tally. The typical user
// of each population is added at the origin. Noncrossing uses the two
// populations as sampled; crossing pools them into one population.
void run_trial(const SimModel& model, double mu_L, double mu_U, std::uint64_t seed, ModeTally* noncrossing,
               ModeTally* crossing);

// Single draw for one band. Throws ConditioningFailed for a rejected
// L-unlicensed draw and RunError when the band does not apply (for example
// a crossing draw whose typical user picked the other RAT).
SirSample sample_typical_sir(const SimModel& model, AssocMode mode, Band band, double mu_L, double mu_U,
                             std::uint64_t seed);

// SIR at the origin from a server (signal gain g_s at squared distance d2)
// against the listed interferers.
double sir_at_origin(double signal, const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& g, double alpha);

struct CoverageEstimate {
    Estimate band[3];                        // indexed by Band
    std::vector<std::vector<Estimate>> tier; // [band][tier-1]
    const Estimate& at(Band b) const { return band[static_cast<int>(b)]; }
};

CoverageEstimate estimate_coverage(const std::vector<SirSample>& samples, double theta, int num_tiers);

// sum_k w_k P_k with the delta-method error (components independent).
Estimate estimate_coexisting_coverage(const std::vector<Estimate>& per_tier, const std::vector<double>& weights);

struct SpectrumEfficiency {
    Estimate C_L, C_U;
};

// C_L = E[log2(1+g_Ll)] + f_L E[log2(1+g_Lu)], C_U = f_U E[log2(1+g_U)], with
// g capped at gamma_max. f_L = sum_{k<K} rho_k p_k share_k, f_U = rho_K p_K.
SpectrumEfficiency estimate_spectrum_efficiency(const std::vector<SirSample>& samples, double f_L, double f_U,
                                                double gamma_max = 1.0e6);

struct CapacityTerms {
    std::vector<double> lambda;   // per tier
    std::vector<double> non_void; // 1 - nu_k
    Estimate P_L, C_L;            // licensed coverage and efficiency (L tiers)
    Estimate P_U, C_U;            // tier K
};

// sum_{k<K} lambda_k (1-nu_k) P_L C_L + lambda_K (1-nu_K) P_U C_U.
Estimate estimate_network_capacity(const CapacityTerms& t);

} // namespace hetnet
