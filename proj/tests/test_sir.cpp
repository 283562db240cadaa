#include <doctest.h>

#include <cmath>
#include <vector>

#include "hetnet/experiments.hpp"
#include "hetnet/sir.hpp"

using namespace hetnet;

namespace {

SirSample sample(Band b, double sir, int tier = 1) { return SirSample{b, tier, sir, b != Band::l_licensed}; }

SimModel table2_model(double scale = 1.0) {
    Scenario s = preset("fig5a");
    for (auto& t : s.tiers) t.intensity *= scale;
    SimModel m = sim_model(s);
    m.window.radius = 1000.0;
    return m;
}

} // namespace

TEST_CASE("SIR at the origin") {
    // server at distance 1, interferer at distance 2, unit gains, alpha = 4
    CHECK(sir_at_origin(1.0, {2.0}, {0.0}, {1.0}, 4.0) == doctest::Approx(16.0));
    CHECK(std::isinf(sir_at_origin(1.0, {}, {}, {}, 4.0)));
    CHECK(sir_at_origin(1.0, {0.0, 3.0}, {2.0, 0.0}, {1.0, 2.0}, 4.0) ==
          doctest::Approx(1.0 / (1.0 / 16 + 2.0 / 81)));
}

TEST_CASE("coverage estimates") {
    std::vector<SirSample> s;
    for (int i = 0; i < 100; ++i) s.push_back(sample(Band::l_licensed, 0.05 * i, 1 + i % 2));
    s.push_back(sample(Band::u_unlicensed, kInf, 3));
    auto c0 = estimate_coverage(s, 0.0, 3);
    CHECK(c0.at(Band::l_licensed).value == 1.0);
    CHECK(estimate_coverage(s, 1e9, 3).at(Band::l_licensed).value == 0.0);
    CHECK(estimate_coverage(s, 1e9, 3).at(Band::u_unlicensed).value == 1.0); // empty interference always covers
    CHECK(estimate_coverage(s, 1.0, 3).at(Band::l_licensed).value == doctest::Approx(0.8));
    CHECK(c0.at(Band::l_unlicensed).count == 0);

    double prev = 1.0;
    for (double th = 0.0; th < 6.0; th += 0.25) {
        double v = estimate_coverage(s, th, 3).at(Band::l_licensed).value;
        CHECK(v <= prev);
        prev = v;
    }
    auto c = estimate_coverage(s, 1.0, 3);
    CHECK(c.tier[0][0].count == 50);
    CHECK(c.tier[0][0].value + c.tier[0][1].value == doctest::Approx(1.6));
}

TEST_CASE("coexisting coverage") {
    Estimate a{0.8, 0.01, 100}, b{0.6, 0.02, 100};
    Estimate e = estimate_coexisting_coverage({a, b}, {0.5, 0.5});
    CHECK(e.value == doctest::Approx(0.7));
    CHECK(e.se == doctest::Approx(std::sqrt(0.25 * 1e-4 + 0.25 * 4e-4)));
    CHECK(estimate_coexisting_coverage({b}, {1.0}).value == doctest::Approx(0.6));
    CHECK_THROWS_AS(estimate_coexisting_coverage({a}, {0.5, 0.5}), ConfigError);
}

TEST_CASE("spectrum efficiency") {
    std::vector<SirSample> zeros{sample(Band::l_licensed, 0.0), sample(Band::l_unlicensed, 0.0),
                                 sample(Band::u_unlicensed, 0.0)};
    auto z = estimate_spectrum_efficiency(zeros, 0.5, 0.5);
    CHECK(z.C_L.value == 0.0);
    CHECK(z.C_U.value == 0.0);

    std::vector<SirSample> ones{sample(Band::l_licensed, 1.0), sample(Band::l_unlicensed, 1.0),
                                sample(Band::u_unlicensed, 1.0), sample(Band::l_licensed, 1.0)};
    auto o = estimate_spectrum_efficiency(ones, 0.5, 0.5);
    CHECK(o.C_L.value == doctest::Approx(1.5));
    CHECK(o.C_U.value == doctest::Approx(0.5));

    std::vector<SirSample> inf{sample(Band::u_unlicensed, kInf)};
    CHECK(estimate_spectrum_efficiency(inf, 0.0, 1.0, 1e6).C_U.value == doctest::Approx(std::log2(1.0 + 1e6)));
    CHECK(std::isnan(estimate_spectrum_efficiency(inf, 0.0, 1.0).C_L.value));
}

TEST_CASE("network capacity") {
    CapacityTerms t;
    t.lambda = {1e-5};
    t.non_void = {0.5};
    t.P_U = {0.6, 0.0, 10};
    t.C_U = {2.0, 0.0, 10};
    CHECK(estimate_network_capacity(t).value == doctest::Approx(6e-6));
    t.non_void = {0.0};
    CHECK(estimate_network_capacity(t).value == 0.0);

    CapacityTerms two;
    two.lambda = {1e-5, 1e-4};
    two.non_void = {0.0, 0.0};
    two.P_L = two.P_U = {0.7, 0.01, 10};
    two.C_L = two.C_U = {3.0, 0.1, 10};
    CHECK(estimate_network_capacity(two).value == 0.0);
}

TEST_CASE("typical draws") {
    SimModel m = table2_model();
    SirSample a = sample_typical_sir(m, AssocMode::noncrossing, Band::l_licensed, 1e-4, 1e-4, 5);
    SirSample b = sample_typical_sir(m, AssocMode::noncrossing, Band::l_licensed, 1e-4, 1e-4, 5);
    CHECK(a.sir == b.sir);
    CHECK(a.serving_tier >= 1);
    CHECK(a.serving_tier <= 3);
    SirSample u = sample_typical_sir(m, AssocMode::noncrossing, Band::u_unlicensed, 1e-4, 1e-4, 5);
    CHECK(u.serving_tier == 4);
    CHECK(u.sir > 0.0);

    int accepted = 0, rejected = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        try {
            SirSample x = sample_typical_sir(m, AssocMode::noncrossing, Band::l_unlicensed, 1e-4, 1e-4, s);
            CHECK(x.granted);
            CHECK(x.serving_tier >= 2);
            ++accepted;
        } catch (const ConditioningFailed&) {
            ++rejected;
        }
    }
    CHECK(accepted > 20);
    CHECK(accepted + rejected == 40);
}

TEST_CASE("trial tallies") {
    SimModel m = table2_model();
    ModeTally nc(AssocMode::noncrossing, 4), cr(AssocMode::crossing, 4);
    for (std::uint64_t s = 0; s < 30; ++s) run_trial(m, 1e-4, 1e-4, s, &nc, &cr);
    CHECK(nc.trials == 30);
    CHECK(cr.trials == 30);
    CHECK(nc.conditioning_rate() > 0.5);
    CHECK(nc.conditioning_rate() <= 1.0);
    int bands[3] = {0, 0, 0};
    for (const auto& x : nc.samples) ++bands[static_cast<int>(x.band)];
    CHECK(bands[0] == 30);
    CHECK(bands[2] == 30);
    CHECK(bands[1] == static_cast<int>(nc.lu_accepts));

    ModeTally merged(AssocMode::noncrossing, 4), half(AssocMode::noncrossing, 4);
    for (std::uint64_t s = 0; s < 15; ++s) run_trial(m, 1e-4, 1e-4, s, &merged, nullptr);
    for (std::uint64_t s = 15; s < 30; ++s) run_trial(m, 1e-4, 1e-4, s, &half, nullptr);
    merged.merge(half);
    CHECK(merged.samples.size() == nc.samples.size());
    CHECK(merged.voids.estimate(4).value == doctest::Approx(nc.voids.estimate(4).value));
}

TEST_CASE("more APs raise licensed coverage") {
    const double theta = 0.5;
    double prev = 0.0, prev_se = 0.0;
    for (double scale : {0.25, 1.0, 4.0}) {
        SimModel m = table2_model(scale);
        m.window.radius = std::max(1000.0, 1000.0 / std::sqrt(scale));
        ModeTally t(AssocMode::noncrossing, 4);
        for (std::uint64_t s = 0; s < 600; ++s) run_trial(m, 2e-4, 2e-4, 77 + s, &t, nullptr);
        Estimate e = estimate_coverage(t.samples, theta, 4).at(Band::l_licensed);
        CHECK(e.value >= prev - 3 * std::hypot(e.se, prev_se));
        prev = e.value;
        prev_se = e.se;
    }
}
