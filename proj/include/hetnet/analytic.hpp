#pragma once

#include <functional>
#include <vector>

#include "hetnet/association.hpp"
#include "hetnet/config.hpp"
#include "hetnet/csma.hpp"

namespace hetnet {

struct QuadratureSettings {
    double abs_tol = 1e-9;
    double rel_tol = 1e-8;
    int hermite_nodes = 64;
    int max_depth = 15;
};

void validate_quadrature(const QuadratureSettings& q);

// l(x, y; z) = x^z (pi z / sin(pi z) - int_0^{y^{-z}} dt / (1 + t^{1/z})); y = +inf drops the integral.
double ell(double x, double y, double z, const QuadratureSettings& q = {});

// Gauss-Hermite expectation of f(exp(Y)), Y ~ N(0, var_ln).
double lognormal_expectation(const std::function<double(double)>& f, double var_ln, int nodes);

// p = P[H G^{-1} >= Delta] = E_G[exp(-Delta G)].
double gain_threshold_probability(double delta, double sigma_ln, const QuadratureSettings& q = {});

// Inputs for the access probabilities of one association mode. nu, p and
// lambda_tilde are per tier; pass the crossing-mode areas and void
// probabilities to get the crossing variant.
struct AccessInputs {
    std::vector<TierSpec> tiers;
    MeanAreaTable areas;
    std::vector<double> nu;
    std::vector<double> p;
    std::vector<double> lambda_tilde;
};

// Uniform backoff closed form. Never-contending tiers get rho = 0 and are
// dropped from the ordering; throws ConfigError if the remaining max backoffs
// are not non-increasing in the tier index.
std::vector<double> access_probability(const AccessInputs& in);

// Same integral for general backoff laws, by quadrature. cdf[k-1] and pdf[k-1]
// describe T_k on [0, tau_k].
struct BackoffLaw {
    std::function<double(double)> cdf;
    std::function<double(double)> pdf;
};
std::vector<double> access_probability_general(const AccessInputs& in, const std::vector<BackoffLaw>& laws,
                                               const QuadratureSettings& q = {});
BackoffLaw uniform_backoff(double tau);

// Per-tier intermediate sums of the uniform closed form, for inspection.
// lambda_bar[m-1][j-1] for m, j in tier numbering (0 outside the ordering).
std::vector<std::vector<double>> mean_contender_intensity(const AccessInputs& in);

struct BoundInputs {
    std::vector<TierSpec> tiers;
    double alpha = 4.0;
    double sigma_ln = 0.0;
    AssocStats stats;
    std::vector<double> nu;  // nu or nu-hat
    std::vector<double> rho; // rho or rho-hat, 0 for never-contending tiers
    std::vector<double> p;
};

// nu = 0 and rho = 1 for every contending tier.
BoundInputs limit_inputs(const BoundInputs& in);

struct Coverage {
    double P_Ll = 0.0, P_Lu = 0.0, P_U = 0.0, P_cov = 0.0;
};

Coverage coverage_bounds_noncrossing(const BoundInputs& in, double theta, const QuadratureSettings& q = {});
Coverage coverage_bounds_crossing(const BoundInputs& in, double theta, const QuadratureSettings& q = {});

// Lowest limits written in their own closed forms (the bounds at nu = 0,
// rho = 1 must agree with these).
Coverage coverage_limits_noncrossing(const BoundInputs& in, double theta, const QuadratureSettings& q = {});
Coverage coverage_limits_crossing(const BoundInputs& in, double theta, const QuadratureSettings& q = {});

// int_0^inf f(theta) / (ln 2 (1 + theta)) dtheta via theta = t/(1-t).
double capacity_integral(const std::function<double(double)>& f, const QuadratureSettings& q = {},
                         double* error = nullptr);

struct Capacity {
    double C_L = 0.0, C_U = 0.0, C_LU = 0.0, C_cov = 0.0;
};

Capacity capacity_bounds(const BoundInputs& in, AssocMode mode, double theta0, const QuadratureSettings& q = {});

struct BoundSet {
    AssocMode mode = AssocMode::noncrossing;
    Coverage coverage, coverage_limit;
    Capacity capacity, capacity_limit;
    std::vector<double> nu, rho, rho_blind, p, share, share_hat;
    std::vector<std::vector<double>> lambda_bar;
};

// Everything for one operating point: association statistics, void and
// access probabilities, coverage and capacity bounds with their limits.
BoundSet evaluate_bounds(const std::vector<TierSpec>& tiers, const ChannelParams& ch, const AssociationPolicy& policy,
                         double mu_L, double mu_U, const MeanAreaTable& areas, const QuadratureSettings& q = {});

} // namespace hetnet
