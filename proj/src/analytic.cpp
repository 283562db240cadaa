#include "hetnet/analytic.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gsl/gsl_integration.h>

#include "hetnet/errors.hpp"

namespace hetnet {
namespace {

struct HermiteRule {
    std::vector<double> x, w; // weight exp(-x^2); w already divided by sqrt(pi)
};

const HermiteRule& hermite(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<HermiteRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
    gsl_integration_fixed_workspace* ws =
        gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, static_cast<std::size_t>(n), 0.0, 1.0, 0.0, 0.0);
    if (!ws) throw RunError("Gauss-Hermite rule allocation failed");
    auto rule = std::make_unique<HermiteRule>();
    const double* xs = gsl_integration_fixed_nodes(ws);
    const double* ws_ = gsl_integration_fixed_weights(ws);
    for (int i = 0; i < n; ++i) {
        rule->x.push_back(xs[i]);
        rule->w.push_back(ws_[i] / std::sqrt(std::numbers::pi));
    }
    gsl_integration_fixed_free(ws);
    return *cache.emplace(n, std::move(rule)).first->second;
}

// Lognormal sample points exp(scale * x_i) for ln-variance var.
std::vector<double> lognormal_nodes(const HermiteRule& r, double var) {
    std::vector<double> v;
    double scale = std::sqrt(2.0 * var);
    for (double x : r.x) v.push_back(std::exp(scale * x));
    return v;
}

double pi_z(double z) { return std::numbers::pi * z / std::sin(std::numbers::pi * z); }

// (e^{-a S} - e^{-b S}) / S for 0 <= a <= b, continuous at S = 0.
double exp_diff_over(double a, double b, double S) {
    if (S == 0.0) return b - a;
    return std::exp(-a * S) * -std::expm1(-(b - a) * S) / S;
}

std::vector<int> contention_order(const std::vector<TierSpec>& tiers) {
    std::vector<int> order;
    for (const auto& t : tiers)
        if (t.contends()) order.push_back(t.index);
    for (std::size_t a = 1; a < order.size(); ++a)
        if (tiers[order[a] - 1].max_backoff > tiers[order[a - 1] - 1].max_backoff)
            throw ConfigError("max backoff must be non-increasing in the tier index among contending tiers");
    return order;
}

} // namespace

void validate_quadrature(const QuadratureSettings& q) {
    if (!(q.abs_tol > 0.0) || !(q.rel_tol > 0.0)) throw ConfigError("quadrature tolerances must be > 0");
    if (q.hermite_nodes < 8) throw ConfigError("Gauss-Hermite node count must be >= 8");
}

double ell(double x, double y, double z, const QuadratureSettings& q) {
    if (!(z > 0.0 && z < 1.0)) throw ConfigError("ell exponent z must lie in (0, 1)");
    if (x == 0.0) return 0.0;
    if (!(x > 0.0) || !(y > 0.0)) throw ConfigError("ell needs x > 0 and y > 0");
    const double xz = std::pow(x, z);
    if (std::isinf(y)) return xz * pi_z(z);
    const double u = std::pow(y, -z);
    const double inv = 1.0 / z;
    auto f = [inv](double t) { return 1.0 / (1.0 + std::pow(t, inv)); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double uq = std::pow(u, inv);
    if (uq < 1e-3) {
        // Short range: alternating series sum_n (-1)^n u^{1+n/z} / (1+n/z).
        double head = 0.0, term = u;
        for (int n = 0; n < 12 && term > 1e-18 * u; ++n, term *= uq) head += (n % 2 ? -term : term) / (1.0 + n * inv);
        return xz * (pi_z(z) - head);
    }
    if (u <= 1.0) return xz * (pi_z(z) - GK::integrate(f, 0.0, u, q.max_depth, q.rel_tol));
    // Tail int_u^inf, mapped by t = u r^{-z/(1-z)} onto [0, 1] with a bounded integrand.
    const double a = 1.0 / (1.0 - z), ui = std::pow(u, -inv);
    auto g = [a, ui](double r) { return 1.0 / (1.0 + std::pow(r, a) * ui); };
    double tail = std::pow(u, 1.0 - inv) * (z / (1.0 - z)) * GK::integrate(g, 0.0, 1.0, q.max_depth, q.rel_tol);
    return xz * tail;
}

double lognormal_expectation(const std::function<double(double)>& f, double var_ln, int nodes) {
    if (var_ln == 0.0) return f(1.0);
    const HermiteRule& r = hermite(nodes);
    double s = 0.0;
    double scale = std::sqrt(2.0 * var_ln);
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(std::exp(scale * r.x[i]));
    return s;
}

double gain_threshold_probability(double delta, double sigma_ln, const QuadratureSettings& q) {
    if (!(delta > 0.0)) throw ConfigError("gain threshold must be > 0");
    return lognormal_expectation([delta](double g) { return std::exp(-delta * g); }, sigma_ln * sigma_ln,
                                 q.hermite_nodes);
}

std::vector<std::vector<double>> mean_contender_intensity(const AccessInputs& in) {
    const int K = num_tiers(in.tiers);
    std::vector<int> order = contention_order(in.tiers);
    const std::size_t n = order.size();
    std::vector<std::vector<double>> lb(K, std::vector<double>(K, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        double tj = in.tiers[order[j] - 1].max_backoff;
        double tnext = j + 1 < n ? in.tiers[order[j + 1] - 1].max_backoff : 0.0;
        for (std::size_t b = 0; b <= j; ++b) {
            int m = order[b];
            double tm = in.tiers[m - 1].max_backoff;
            double frac = tm > 0.0 ? (tj - tnext) / tm : 0.0;
            lb[m - 1][order[j] - 1] = in.p[m - 1] * (1.0 - in.nu[m - 1]) * in.lambda_tilde[m - 1] * frac;
        }
    }
    return lb;
}

std::vector<double> access_probability(const AccessInputs& in) {
    const int K = num_tiers(in.tiers);
    std::vector<int> order = contention_order(in.tiers);
    const std::size_t n = order.size();
    auto lb = mean_contender_intensity(in);
    std::vector<double> rho(K, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        const int k = order[a];
        const double tk = in.tiers[k - 1].max_backoff;
        if (tk == 0.0) {
            rho[k - 1] = 1.0;
            continue;
        }
        double r = 0.0;
        for (std::size_t j = a; j < n; ++j) {
            double tj = in.tiers[order[j] - 1].max_backoff;
            double tnext = j + 1 < n ? in.tiers[order[j + 1] - 1].max_backoff : 0.0;
            double S = 0.0;
            for (std::size_t b = 0; b <= j; ++b) S += in.areas.at(k, order[b]) * lb[order[b] - 1][order[j] - 1];
            r += exp_diff_over(tnext, tj, S) / tk;
        }
        rho[k - 1] = r;
    }
    return rho;
}

BackoffLaw uniform_backoff(double tau) {
    return {[tau](double t) { return t <= 0.0 ? 0.0 : (t >= tau ? 1.0 : t / tau); },
            [tau](double t) { return (t >= 0.0 && t <= tau) ? 1.0 / tau : 0.0; }};
}

std::vector<double> access_probability_general(const AccessInputs& in, const std::vector<BackoffLaw>& laws,
                                               const QuadratureSettings& q) {
    const int K = num_tiers(in.tiers);
    std::vector<int> order = contention_order(in.tiers);
    const std::size_t n = order.size();
    std::vector<double> rho(K, 0.0);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (std::size_t a = 0; a < n; ++a) {
        const int k = order[a];
        double r = 0.0;
        for (std::size_t j = a; j < n; ++j) {
            double tj = in.tiers[order[j] - 1].max_backoff;
            double tnext = j + 1 < n ? in.tiers[order[j + 1] - 1].max_backoff : 0.0;
            if (tj <= tnext) continue;
            double S = 0.0;
            for (std::size_t b = 0; b <= j; ++b) {
                int m = order[b];
                double dF = laws[m - 1].cdf(tj) - laws[m - 1].cdf(tnext);
                S += in.areas.at(k, m) * in.p[m - 1] * (1.0 - in.nu[m - 1]) * in.lambda_tilde[m - 1] * dF;
            }
            const auto& pdf = laws[k - 1].pdf;
            r += GK::integrate([&](double t) { return std::exp(-S * t) * pdf(t); }, tnext, tj, q.max_depth,
                               q.rel_tol);
        }
        rho[k - 1] = r;
    }
    return rho;
}

BoundInputs limit_inputs(const BoundInputs& in) {
    BoundInputs out = in;
    for (std::size_t k = 0; k < out.tiers.size(); ++k) {
        out.nu[k] = 0.0;
        out.rho[k] = out.tiers[k].contends() ? 1.0 : 0.0;
    }
    return out;
}

namespace {

// Shared pieces of the coverage bounds for one set of inputs.
class CoverageModel {
public:
    CoverageModel(const BoundInputs& in, AssocMode mode, const QuadratureSettings& q)
        : in_(in), mode_(mode), q_(q), K_(num_tiers(in.tiers)), z_(2.0 / in.alpha),
          s2_(in.sigma_ln * in.sigma_ln) {
        const auto& w = mode == AssocMode::crossing ? in.stats.share_hat : in.stats.share;
        for (int m = 1; m < K_; ++m) {
            void_mass_ += (1.0 - in.nu[m - 1]) * w[m - 1];
            coef_l_ += (1.0 - in.nu[m - 1]) * in.rho[m - 1] * in.p[m - 1] * w[m - 1];
            l_share_ += in.stats.share[m - 1];
        }
        coef_k_ = (1.0 - in.nu[K_ - 1]) * in.rho[K_ - 1] * in.p[K_ - 1] * w[K_ - 1];
        if (in.sigma_ln > 0.0) {
            const HermiteRule& r = hermite(q.hermite_nodes);
            ratio_ = lognormal_nodes(r, 2.0 * s2_);
            gain_ = lognormal_nodes(r, s2_);
            weights_ = r.w;
        } else {
            ratio_ = gain_ = weights_ = {1.0};
        }
    }

    double P_Ll(double theta) const { return 1.0 / (1.0 + ell(theta, theta, z_, q_) * void_mass_); }

    double P_Lu(double theta) const {
        if (K_ < 2) return std::nan("");
        const double er_z = std::exp(z_ * z_ * s2_); // E[R^z], R = G'/G
        double outer = 0.0;
        for (std::size_t i = 0; i < ratio_.size(); ++i) {
            const double rk = ratio_[i];
            double inner_l = 0.0;
            if (coef_l_ > 0.0)
                for (std::size_t j = 0; j < ratio_.size(); ++j) {
                    double v = rk * ratio_[j] * theta;
                    inner_l += weights_[j] * ell(v, v, z_, q_);
                }
            double inner_k;
            if (mode_ == AssocMode::crossing)
                inner_k = ell(theta, theta, z_, q_);
            else
                inner_k = std::pow(rk * theta, z_) * er_z * pi_z(z_);
            outer += weights_[i] / (1.0 + coef_l_ * inner_l + coef_k_ * inner_k);
        }
        return l_share_ * outer;
    }

    double P_U(double theta) const {
        if (mode_ == AssocMode::crossing) {
            double eg = 0.0;
            if (coef_l_ > 0.0)
                for (std::size_t j = 0; j < gain_.size(); ++j) {
                    double v = theta / gain_[j];
                    eg += weights_[j] * ell(v, v, z_, q_);
                }
            return 1.0 / (1.0 + coef_l_ * eg + coef_k_ * ell(theta, theta, z_, q_));
        }
        const double LK = in_.stats.Lambda[K_ - 1];
        if (!(LK > 0.0)) return std::nan("");
        double s = 0.0;
        for (int k = 1; k <= K_; ++k) {
            double l = k == K_ ? ell(theta, theta, z_, q_) : ell(theta, kInf, z_, q_);
            s += l * (1.0 - in_.nu[k - 1]) * in_.rho[k - 1] * in_.p[k - 1] * in_.stats.Lambda[k - 1] / LK;
        }
        return 1.0 / (1.0 + s);
    }

    Coverage all(double theta) const {
        Coverage c;
        c.P_Ll = K_ > 1 ? P_Ll(theta) : std::nan("");
        c.P_Lu = P_Lu(theta);
        c.P_U = P_U(theta);
        double lw = 0.0;
        for (int k = 1; k < K_; ++k) lw += in_.stats.share_hat[k - 1];
        c.P_cov = (K_ > 1 ? lw * c.P_Ll : 0.0) + in_.stats.share_hat[K_ - 1] * c.P_U;
        return c;
    }

private:
    const BoundInputs& in_;
    AssocMode mode_;
    QuadratureSettings q_;
    int K_;
    double z_, s2_;
    double void_mass_ = 0.0, coef_l_ = 0.0, coef_k_ = 0.0, l_share_ = 0.0;
    std::vector<double> ratio_, gain_, weights_;
};

} // namespace

Coverage coverage_bounds_noncrossing(const BoundInputs& in, double theta, const QuadratureSettings& q) {
    return CoverageModel(in, AssocMode::noncrossing, q).all(theta);
}

Coverage coverage_bounds_crossing(const BoundInputs& in, double theta, const QuadratureSettings& q) {
    return CoverageModel(in, AssocMode::crossing, q).all(theta);
}

Coverage coverage_limits_noncrossing(const BoundInputs& in, double theta, const QuadratureSettings& q) {
    const int K = num_tiers(in.tiers);
    const double z = 2.0 / in.alpha, s2 = in.sigma_ln * in.sigma_ln;
    const auto& th = in.stats.share;
    Coverage c;
    const double l = ell(theta, theta, z, q);
    c.P_Ll = 1.0 / (1.0 + l);
    // Sum over every tier on the unlicensed band, one expectation per tier.
    c.P_Lu = 0.0;
    for (int k = 1; k < K; ++k) {
        c.P_Lu += th[k - 1] * lognormal_expectation(
                                  [&](double rk) {
                                      double s = 0.0;
                                      for (int m = 1; m <= K; ++m) {
                                          if (!in.tiers[m - 1].contends()) continue;
                                          double e = lognormal_expectation(
                                              [&](double rm) {
                                                  double v = rk * rm * theta;
                                                  return ell(v, m == K ? kInf : v, z, q);
                                              },
                                              2.0 * s2, q.hermite_nodes);
                                          s += in.p[m - 1] * th[m - 1] * e;
                                      }
                                      return 1.0 / (1.0 + s);
                                  },
                                  2.0 * s2, q.hermite_nodes);
    }
    double mix = 0.0;
    for (int k = 1; k < K; ++k)
        if (in.tiers[k - 1].contends()) mix += in.p[k - 1] * th[k - 1];
    double pk = in.tiers[K - 1].contends() ? in.p[K - 1] : 0.0;
    double open = 2.0 * std::numbers::pi * std::pow(theta, z) / (in.alpha * std::sin(2.0 * std::numbers::pi / in.alpha));
    // The tier-K term carries its own share, as in the bound.
    c.P_U = 1.0 / (1.0 + (l * pk * th[K - 1] + open * mix) / th[K - 1]);
    double lw = 0.0;
    for (int k = 1; k < K; ++k) lw += in.stats.share_hat[k - 1];
    c.P_cov = lw * c.P_Ll + in.stats.share_hat[K - 1] * c.P_U;
    return c;
}

Coverage coverage_limits_crossing(const BoundInputs& in, double theta, const QuadratureSettings& q) {
    const int K = num_tiers(in.tiers);
    const double z = 2.0 / in.alpha, s2 = in.sigma_ln * in.sigma_ln;
    const auto& th = in.stats.share_hat;
    Coverage c;
    const double l = ell(theta, theta, z, q);
    double lw = 0.0;
    for (int m = 1; m < K; ++m) lw += th[m - 1];
    c.P_Ll = 1.0 / (1.0 + l * lw);
    c.P_Lu = 0.0;
    for (int k = 1; k < K; ++k) {
        c.P_Lu += in.stats.share[k - 1] *
                  lognormal_expectation(
                      [&](double rk) {
                          double s = 0.0;
                          for (int m = 1; m <= K; ++m) {
                              if (!in.tiers[m - 1].contends()) continue;
                              double e = m == K ? l
                                                : lognormal_expectation(
                                                      [&](double rm) {
                                                          double v = rk * rm * theta;
                                                          return ell(v, v, z, q);
                                                      },
                                                      2.0 * s2, q.hermite_nodes);
                              s += in.p[m - 1] * th[m - 1] * e;
                          }
                          return 1.0 / (1.0 + s);
                      },
                      2.0 * s2, q.hermite_nodes);
    }
    double s = in.tiers[K - 1].contends() ? in.p[K - 1] * th[K - 1] * l : 0.0;
    for (int m = 1; m < K; ++m) {
        if (!in.tiers[m - 1].contends()) continue;
        s += in.p[m - 1] * th[m - 1] *
             lognormal_expectation([&](double g) { return ell(theta / g, theta / g, z, q); }, s2, q.hermite_nodes);
    }
    c.P_U = 1.0 / (1.0 + s);
    c.P_cov = lw * c.P_Ll + th[K - 1] * c.P_U;
    return c;
}

double capacity_integral(const std::function<double(double)>& f, const QuadratureSettings& q, double* error) {
    boost::math::quadrature::tanh_sinh<double> ts;
    double err = 0.0, l1 = 0.0;
    auto g = [&](double t) {
        double one_minus = 1.0 - t;
        if (one_minus <= 0.0) return 0.0;
        double v = f(t / one_minus);
        return v == 0.0 ? 0.0 : v / (std::numbers::ln2 * one_minus);
    };
    double tol = std::max(q.rel_tol, 1e-10);
    double r = ts.integrate(g, 0.0, 1.0, std::sqrt(tol), &err, &l1);
    if (error) *error = err;
    if (!std::isfinite(r) || err > 1e-3 * std::max(1.0, std::abs(r)))
        throw RunError("capacity integral did not converge (error estimate " + std::to_string(err) + ")");
    return r;
}

Capacity capacity_bounds(const BoundInputs& in, AssocMode mode, double theta0, const QuadratureSettings& q) {
    const int K = num_tiers(in.tiers);
    CoverageModel cm(in, mode, q);
    Capacity c;
    double access_frac = 0.0;
    for (int k = 1; k < K; ++k) access_frac += in.rho[k - 1] * in.p[k - 1] * in.stats.share[k - 1];
    double ll = 0.0, lu = 0.0;
    if (K > 1) {
        ll = capacity_integral([&](double t) { return cm.P_Ll(t); }, q);
        lu = access_frac > 0.0 ? capacity_integral([&](double t) { return cm.P_Lu(t); }, q) : 0.0;
        c.C_L = ll + access_frac * lu;
    }
    double pre_u = in.rho[K - 1] * in.p[K - 1];
    c.C_U = pre_u > 0.0 ? pre_u * capacity_integral([&](double t) { return cm.P_U(t); }, q) : 0.0;
    c.C_LU = c.C_L + c.C_U;
    double l_part = 0.0;
    if (K > 1) {
        double pll = cm.P_Ll(theta0);
        for (int k = 1; k < K; ++k) l_part += in.tiers[k - 1].intensity * (1.0 - in.nu[k - 1]) * pll * c.C_L;
    }
    c.C_cov = l_part + in.tiers[K - 1].intensity * (1.0 - in.nu[K - 1]) * cm.P_U(theta0) * c.C_U;
    return c;
}

BoundSet evaluate_bounds(const std::vector<TierSpec>& tiers, const ChannelParams& ch, const AssociationPolicy& policy,
                         double mu_L, double mu_U, const MeanAreaTable& areas, const QuadratureSettings& q) {
    const double s = ch.sigma_ln();
    BoundSet b;
    b.mode = policy.mode;
    AssocStats st = association_stats(tiers, policy, s, ch.alpha);
    b.share = st.share;
    b.share_hat = st.share_hat;
    b.nu = policy.mode == AssocMode::crossing ? void_probabilities_crossing(tiers, st, mu_L + mu_U)
                                              : void_probabilities_noncrossing(tiers, st, mu_L, mu_U);
    double p = gain_threshold_probability(ch.gate_threshold, s, q);
    b.p.assign(tiers.size(), p);
    AccessInputs ai{tiers, areas, b.nu, b.p, st.lambda_tilde};
    b.rho = access_probability(ai);
    b.lambda_bar = mean_contender_intensity(ai);
    ai.nu.assign(tiers.size(), 0.0);
    b.rho_blind = access_probability(ai);

    BoundInputs in{tiers, ch.alpha, s, st, b.nu, b.rho, b.p};
    BoundInputs lim = limit_inputs(in);
    if (policy.mode == AssocMode::crossing) {
        b.coverage = coverage_bounds_crossing(in, ch.sir_threshold, q);
        b.coverage_limit = coverage_bounds_crossing(lim, ch.sir_threshold, q);
    } else {
        b.coverage = coverage_bounds_noncrossing(in, ch.sir_threshold, q);
        b.coverage_limit = coverage_bounds_noncrossing(lim, ch.sir_threshold, q);
    }
    b.capacity = capacity_bounds(in, policy.mode, ch.sir_threshold, q);
    b.capacity_limit = capacity_bounds(lim, policy.mode, ch.sir_threshold, q);
    return b;
}

} // namespace hetnet
