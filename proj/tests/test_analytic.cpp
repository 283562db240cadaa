#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hetnet/analytic.hpp"
#include "hetnet/experiments.hpp"

using namespace hetnet;

namespace {

constexpr double kPi = std::numbers::pi;

TierSpec tier(int index, double lambda, double power, double tau, Rat rat) {
    TierSpec t;
    t.index = index;
    t.intensity = lambda;
    t.power = power;
    t.max_backoff = tau;
    t.sensing_radius = 30.0;
    t.rat = rat;
    return t;
}

AccessInputs equal_tau_inputs(double tau) {
    AccessInputs in;
    in.tiers = {tier(1, 1e-5, 1.0, tau, Rat::l_primary), tier(2, 5e-5, 0.5, tau, Rat::l_primary),
                tier(3, 1e-4, 0.2, tau, Rat::u_only)};
    in.areas.K = 3;
    in.areas.mean = {2000, 1500, 2800, 1800, 2500, 2800, 2827, 2827, 2827};
    in.areas.se.assign(9, 0.0);
    in.areas.count.assign(9, 1);
    in.nu = {0.2, 0.4, 0.6};
    in.p = {0.025, 0.025, 0.03};
    in.lambda_tilde = {1.2e-5, 6e-5, 1.1e-4};
    return in;
}

BoundInputs bound_inputs(const Scenario& s, AssocMode mode, double x) {
    auto [mu_L, mu_U] = user_intensities(s, x);
    BoundSet b = evaluate_bounds(s.tiers, s.channel, s.policy, mode == AssocMode::crossing ? mu_L + mu_U : mu_L,
                                 mode == AssocMode::crossing ? 0.0 : mu_U, full_sensing_areas(s.tiers), s.quadrature);
    BoundInputs in;
    in.tiers = s.tiers;
    in.alpha = s.channel.alpha;
    in.sigma_ln = s.channel.sigma_ln();
    in.stats = association_stats(s.tiers, s.policy, in.sigma_ln, in.alpha);
    in.nu = b.nu;
    in.rho = b.rho;
    in.p = b.p;
    return in;
}

// One L tier plus a U tier too sparse to matter.
BoundInputs single_l_tier() {
    BoundInputs in;
    in.tiers = {tier(1, 1e-4, 1.0, kNeverContends, Rat::l_primary), tier(2, 1e-12, 1.0, 1.0, Rat::u_only)};
    in.alpha = 4.0;
    in.stats = association_stats(in.tiers, AssociationPolicy{}, 0.0, 4.0);
    in.nu = {0.0, 0.0};
    in.rho = {0.0, 1.0};
    in.p = {0.0, 0.0113};
    return in;
}

} // namespace

TEST_CASE("ell special values") {
    CHECK(ell(1.0, 1.0, 0.5) == doctest::Approx(kPi / 4).epsilon(1e-10));
    CHECK(std::abs(ell(1.0, 1.0, 0.5) - kPi / 4) < 1e-9);
    CHECK(std::abs(ell(1.0, kInf, 0.5) - kPi / 2) < 1e-9);
    CHECK(ell(0.5, 0.5, 0.5) == doctest::Approx(0.435209875684).epsilon(1e-10));
    CHECK(ell(0.5, 0.5, 0.5) == doctest::Approx(std::sqrt(0.5) * (kPi / 2 - std::atan(std::sqrt(2.0)))).epsilon(1e-10));
    CHECK(ell(1e-12, 1.0, 0.5) < 1e-5);
}

TEST_CASE("ell monotonicity") {
    for (double z : {0.3, 0.5, 0.8}) {
        double prev = 0.0;
        for (double x : {0.01, 0.1, 1.0, 10.0}) {
            double v = ell(x, 1.0, z);
            CHECK(v > prev);
            prev = v;
        }
        prev = 0.0;
        for (double y : {0.01, 0.1, 1.0, 10.0}) {
            double v = ell(1.0, y, z);
            CHECK(v > prev - 1e-15);
            CHECK(ell(1.0, kInf, z) >= v);
            prev = v;
        }
    }
}

TEST_CASE("gain threshold probability") {
    CHECK(gain_threshold_probability(4.481, 0.0) == doctest::Approx(std::exp(-4.481)).epsilon(1e-12));
    CHECK(gain_threshold_probability(4.481, 0.0) == doctest::Approx(0.011322).epsilon(1e-4));
    const double sig = std::sqrt(3.0) * std::log(10.0) / 10.0;
    CHECK(gain_threshold_probability(4.481, sig) == doctest::Approx(0.025158).epsilon(1e-4));
    CHECK(gain_threshold_probability(1e-9, sig) == doctest::Approx(1.0).epsilon(1e-8));

    std::mt19937_64 eng(17);
    std::exponential_distribution<double> e(1.0);
    std::normal_distribution<double> g(0.0, sig);
    const int n = 10000000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += e(eng) * std::exp(g(eng)) >= 1.0;
    CHECK(std::abs(gain_threshold_probability(1.0, sig) - double(hits) / n) < 1e-3);
}

TEST_CASE("access probability: equal backoff windows") {
    AccessInputs in = equal_tau_inputs(2.0);
    auto rho = access_probability(in);
    for (int k = 1; k <= 3; ++k) {
        double S = 0.0;
        for (int m = 1; m <= 3; ++m)
            S += in.areas.at(k, m) * in.p[m - 1] * (1 - in.nu[m - 1]) * in.lambda_tilde[m - 1];
        double closed = (1.0 - std::exp(-2.0 * S)) / (2.0 * S);
        CHECK(std::abs(rho[k - 1] - closed) < 1e-10);
    }
    std::vector<BackoffLaw> laws(3, uniform_backoff(2.0));
    auto general = access_probability_general(in, laws);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(general[k] - rho[k]) < 1e-10);

    auto small = access_probability(equal_tau_inputs(1e-9));
    for (double r : small) CHECK(r == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("access probability: general law matches the uniform closed form") {
    auto s = preset("fig3");
    auto [mu_L, mu_U] = user_intensities(s, 10.0);
    BoundSet b = evaluate_bounds(s.tiers, s.channel, s.policy, mu_L, mu_U, full_sensing_areas(s.tiers));
    AccessInputs in{s.tiers, full_sensing_areas(s.tiers), b.nu, b.p,
                    association_stats(s.tiers, s.policy, s.channel.sigma_ln(), 4.0).lambda_tilde};
    auto rho = access_probability(in);
    std::vector<BackoffLaw> laws;
    for (const auto& t : s.tiers) laws.push_back(uniform_backoff(t.contends() ? t.max_backoff : 1.0));
    auto general = access_probability_general(in, laws);
    CHECK(rho[0] == 0.0);
    for (int k = 1; k < 4; ++k) {
        CHECK(rho[k] > 0.0);
        CHECK(rho[k] <= 1.0);
        CHECK(std::abs(general[k] - rho[k]) < 1e-8);
    }

    auto bad = in;
    bad.tiers[3].max_backoff = 5.0;
    CHECK_THROWS_AS(access_probability(bad), ConfigError);
}

TEST_CASE("coverage oracles") {
    BoundInputs in = single_l_tier();
    Coverage lim = coverage_limits_noncrossing(in, 1.0);
    CHECK(lim.P_Ll == doctest::Approx(1.0 / (1.0 + kPi / 4)).epsilon(1e-6));
    CHECK(lim.P_Ll == doctest::Approx(0.5601).epsilon(1e-4));
    CHECK(coverage_limits_noncrossing(in, 0.5).P_Ll == doctest::Approx(0.696762).epsilon(1e-5));

    BoundInputs empty = in;
    empty.nu = {1.0, 1.0};
    CHECK(coverage_bounds_noncrossing(empty, 1.0).P_Ll == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single-RAT crossing collapses to P_U") {
    BoundInputs in;
    in.tiers = {tier(1, 5e-5, 0.2, 1.0, Rat::u_only)};
    in.alpha = 4.0;
    in.sigma_ln = 0.3988;
    in.stats = association_stats(in.tiers, AssociationPolicy{}, in.sigma_ln, 4.0);
    in.nu = {0.3};
    in.rho = {0.95};
    in.p = {0.025};
    Coverage c = coverage_bounds_crossing(in, 0.5);
    CHECK(in.stats.share_hat[0] == doctest::Approx(1.0));
    CHECK(c.P_cov == doctest::Approx(c.P_U).epsilon(1e-12));
    CHECK(c.P_U > 0.0);
    CHECK(c.P_U <= 1.0);
}

TEST_CASE("bounds range and theta monotonicity") {
    auto s = preset("fig5a");
    for (double x : {std::pow(10.0, -0.5), std::pow(10.0, 1.5)}) {
        BoundInputs nc = bound_inputs(s, AssocMode::noncrossing, x);
        BoundInputs cr = bound_inputs(s, AssocMode::crossing, x);
        Coverage prev{1, 1, 1, 1};
        for (double th : {0.1, 0.5, 1.0, 4.0}) {
            Coverage c = coverage_bounds_noncrossing(nc, th);
            for (double v : {c.P_Ll, c.P_Lu, c.P_U, c.P_cov}) {
                CHECK(v > 0.0);
                CHECK(v <= 1.0);
            }
            CHECK(c.P_Ll <= prev.P_Ll);
            CHECK(c.P_Lu <= prev.P_Lu);
            CHECK(c.P_U <= prev.P_U);
            prev = c;
        }
        Coverage a = coverage_bounds_noncrossing(nc, 0.5), b = coverage_bounds_crossing(cr, 0.5);
        CHECK(b.P_Ll >= a.P_Ll);
        CHECK(b.P_cov >= a.P_cov);
        Capacity ca = capacity_bounds(nc, AssocMode::noncrossing, 0.5), cb = capacity_bounds(cr, AssocMode::crossing, 0.5);
        for (double v : {ca.C_L, ca.C_U, ca.C_cov, cb.C_L, cb.C_U, cb.C_cov}) CHECK(v >= 0.0);
        CHECK(cb.C_cov >= ca.C_cov);
    }
}

TEST_CASE("limit consistency") {
    auto s = preset("fig5a");
    for (AssocMode mode : {AssocMode::noncrossing, AssocMode::crossing}) {
        BoundInputs lim = limit_inputs(bound_inputs(s, mode, 10.0));
        for (double th : {0.5, 1.0, 2.0}) {
            Coverage a = mode == AssocMode::noncrossing ? coverage_bounds_noncrossing(lim, th)
                                                        : coverage_bounds_crossing(lim, th);
            Coverage b = mode == AssocMode::noncrossing ? coverage_limits_noncrossing(lim, th)
                                                        : coverage_limits_crossing(lim, th);
            CHECK(a.P_Ll == doctest::Approx(b.P_Ll).epsilon(1e-7));
            CHECK(a.P_Lu == doctest::Approx(b.P_Lu).epsilon(1e-7));
            CHECK(a.P_U == doctest::Approx(b.P_U).epsilon(1e-7));
            CHECK(a.P_cov == doctest::Approx(b.P_cov).epsilon(1e-7));
        }
    }
}

TEST_CASE("capacity integral") {
    CHECK(capacity_integral([](double) { return 0.0; }) == 0.0);
    double err = -1.0;
    double v = capacity_integral([](double t) { return 1.0 / (1.0 + t); }, {}, &err);
    CHECK(v == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-9));
    CHECK(v == doctest::Approx(1.4427).epsilon(1e-4));
    CHECK(err >= 0.0);
}

TEST_CASE("tolerance halving") {
    QuadratureSettings q, h;
    h.abs_tol = q.abs_tol / 2;
    h.rel_tol = q.rel_tol / 2;
    auto s = preset("fig5a");
    BoundInputs in = bound_inputs(s, AssocMode::noncrossing, 10.0);
    auto f = [&](const QuadratureSettings& qq) {
        return [&in, qq](double th) { return coverage_bounds_noncrossing(in, th, qq).P_Ll; };
    };
    double e1 = 0.0, e2 = 0.0;
    double c1 = capacity_integral(f(q), q, &e1);
    double c2 = capacity_integral(f(h), h, &e2);
    CHECK(std::abs(c1 - c2) <= std::max(e1, 1e-12));

    for (double x : {0.3, 0.5, 2.0}) {
        double a = ell(x, 0.7, 0.5, q), b = ell(x, 0.7, 0.5, h);
        CHECK(std::abs(a - b) <= q.abs_tol + q.rel_tol * std::abs(a));
    }
    auto [mu_L, mu_U] = user_intensities(s, 10.0);
    BoundSet b1 = evaluate_bounds(s.tiers, s.channel, s.policy, mu_L, mu_U, full_sensing_areas(s.tiers), q);
    BoundSet b2 = evaluate_bounds(s.tiers, s.channel, s.policy, mu_L, mu_U, full_sensing_areas(s.tiers), h);
    auto close = [&](double a, double b) { return std::abs(a - b) <= 10 * (q.abs_tol + q.rel_tol * std::abs(a)); };
    CHECK(close(b1.coverage.P_Ll, b2.coverage.P_Ll));
    CHECK(close(b1.coverage.P_Lu, b2.coverage.P_Lu));
    CHECK(close(b1.coverage.P_U, b2.coverage.P_U));
    CHECK(close(b1.capacity.C_L, b2.capacity.C_L));
    CHECK(close(b1.capacity.C_U, b2.capacity.C_U));
    CHECK(close(b1.capacity.C_cov, b2.capacity.C_cov));
}

TEST_CASE("settings validation") {
    QuadratureSettings q;
    q.hermite_nodes = 0;
    CHECK_THROWS_AS(validate_quadrature(q), ConfigError);
}
