#include "hetnet/sir.hpp"

#include <cmath>
#include <utility>

#include "hetnet/analytic.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/simd.hpp"

namespace hetnet {

const char* band_name(Band b) {
    switch (b) {
    case Band::l_licensed: return "L-licensed";
    case Band::l_unlicensed: return "L-unlicensed";
    case Band::u_unlicensed: return "U-unlicensed";
    }
    return "?";
}

void ModeTally::merge(const ModeTally& o) {
    voids.merge(o.voids);
    access.merge(o.access);
    access_blind.merge(o.access_blind);
    access_cond.merge(o.access_cond);
    access_cond_blind.merge(o.access_cond_blind);
    areas.merge(o.areas);
    samples.insert(samples.end(), o.samples.begin(), o.samples.end());
    lu_attempts += o.lu_attempts;
    lu_accepts += o.lu_accepts;
    trials += o.trials;
}

double ModeTally::conditioning_rate() const {
    return lu_attempts ? static_cast<double>(lu_accepts) / static_cast<double>(lu_attempts) : NAN;
}

double sir_at_origin(double signal, const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& g, double alpha) {
    double I = simd::interference(simd::active(), x.data(), y.data(), g.data(), x.size(), 0.0, 0.0, alpha);
    if (I <= 0.0) return kInf;
    return signal / I;
}

namespace {

struct Interferers {
    std::vector<double> x, y, g;
    void clear() {
        x.clear();
        y.clear();
        g.clear();
    }
    void push(const MarkedPoint& ap, double gain) {
        x.push_back(ap.x);
        y.push_back(ap.y);
        g.push_back(gain);
    }
};

double licensed_gain(const std::vector<TierSpec>& tiers, const MarkedPoint& ap) {
    return tiers[ap.tier - 1].power * ap.h * ap.shadow_inv;
}

// The U-only tier has a single band, described by its primary marks.
double unlicensed_gain(const std::vector<TierSpec>& tiers, const MarkedPoint& ap) {
    const TierSpec& t = tiers[ap.tier - 1];
    if (t.rat == Rat::u_only) return t.power * ap.h * ap.shadow_inv;
    return t.power * ap.h_u * ap.shadow_u_inv;
}

double path_gain(const MarkedPoint& ap, double alpha) {
    return std::pow(ap.x * ap.x + ap.y * ap.y, -0.5 * alpha);
}

double licensed_sir(const Deployment& d, const std::vector<TierSpec>& tiers, std::size_t s, double alpha,
                    Interferers& buf) {
    buf.clear();
    for (std::size_t i = 0; i < d.aps.size(); ++i) {
        const MarkedPoint& ap = d.aps[i];
        if (i == s || ap.v != 1 || tiers[ap.tier - 1].rat != Rat::l_primary) continue;
        buf.push(ap, licensed_gain(tiers, ap));
    }
    double signal = licensed_gain(tiers, d.aps[s]) * path_gain(d.aps[s], alpha);
    return sir_at_origin(signal, buf.x, buf.y, buf.g, alpha);
}

double unlicensed_sir(const Deployment& d, const std::vector<TierSpec>& tiers, const ContentionOutcome& o,
                      std::size_t s, double alpha, Interferers& buf) {
    buf.clear();
    for (std::size_t i = 0; i < d.aps.size(); ++i) {
        if (i == s || !o.is_granted(i)) continue;
        buf.push(d.aps[i], unlicensed_gain(tiers, d.aps[i]));
    }
    double signal = unlicensed_gain(tiers, d.aps[s]) * path_gain(d.aps[s], alpha);
    return sir_at_origin(signal, buf.x, buf.y, buf.g, alpha);
}

void run_mode(const SimModel& m, Deployment& d, std::uint64_t seed, ModeTally& t) {
    const auto& tiers = m.tiers;
    const int K = num_tiers(tiers);
    const double alpha = m.channel.alpha, sigma = m.channel.sigma_ln(), delta = m.channel.gate_threshold;
    const std::uint64_t mtag = t.mode == AssocMode::noncrossing ? 0 : 1;

    AssociationPolicy p = m.policy;
    p.mode = t.mode;
    AssociationMap map = associate(d, tiers, p, alpha, AssociateOptions{m.early_exit});
    apply_void_flags(map, d);

    std::vector<double> guard(K, 0.0);
    if (d.window.mode == BoundaryMode::truncation)
        for (int k = 1; k <= K; ++k) guard[k - 1] = void_guard_distance(tiers, p, sigma, alpha, k, m.guard_quantile);
    t.voids.add(d, map, guard);
    t.areas.add(d, map, tiers, p, alpha);

    // Access statistics describe the background network.
    const std::vector<double> gate_p(K, gain_threshold_probability(delta, sigma));
    t.access_cond.add(d, tiers, gate_p, true);
    t.access_cond_blind.add(d, tiers, gate_p, false);
    for (int r = 0; r < std::max(1, m.contention_rounds); ++r) {
        std::uint64_t rs = derive_seed(seed, {kTagContention, mtag, static_cast<std::uint64_t>(r)});
        ContentionOptions aware;
        aware.redraw_gate = r > 0;
        ContentionOptions blind = aware;
        blind.void_aware = false;
        t.access.add(d, tiers, run_contention(d, tiers, delta, sigma, rs, aware));
        t.access_blind.add(d, tiers, run_contention(d, tiers, delta, sigma, rs, blind));
    }

    // Each typical user is added to the background on its own, so its server
    // is non-void while the other population's typical user is absent.
    Interferers buf;
    const std::size_t pops = t.mode == AssocMode::noncrossing ? 2 : 1;
    for (std::size_t pop = 0; pop < pops; ++pop) {
        const std::vector<int> elig = eligible_tiers(t.mode, K, pop);
        if (elig.empty()) continue;
        ServedRecord rec = serve_point(d, tiers, p, alpha, elig, Vec2{0.0, 0.0});
        const auto s = static_cast<std::size_t>(rec.ap);
        const std::int8_t old = d.aps[s].v;
        d.aps[s].v = 1;
        const std::uint64_t ptag = pop;
        if (tiers[rec.tier - 1].rat == Rat::l_primary) {
            t.samples.push_back({Band::l_licensed, rec.tier, licensed_sir(d, tiers, s, alpha, buf), false});
            ContentionOptions forced;
            forced.forced = static_cast<std::int32_t>(s);
            ContentionOutcome o =
                run_contention(d, tiers, delta, sigma, derive_seed(seed, {kTagConditioned, mtag, ptag}), forced);
            ++t.lu_attempts;
            if (o.is_granted(s)) {
                ++t.lu_accepts;
                t.samples.push_back({Band::l_unlicensed, rec.tier, unlicensed_sir(d, tiers, o, s, alpha, buf), true});
            }
        } else {
            ContentionOutcome o =
                run_contention(d, tiers, delta, sigma, derive_seed(seed, {kTagAux, mtag, ptag}), {});
            t.samples.push_back(
                {Band::u_unlicensed, rec.tier, unlicensed_sir(d, tiers, o, s, alpha, buf), o.is_granted(s)});
        }
        d.aps[s].v = old;
    }
    ++t.trials;
}

} // namespace

void run_trial(const SimModel& model, double mu_L, double mu_U, std::uint64_t seed, ModeTally* noncrossing,
               ModeTally* crossing) {
    const double sigma = model.channel.sigma_ln();
    Deployment d = sample_deployment(model.tiers, {mu_L, mu_U}, model.window, sigma, seed);

    if (crossing) {
        Deployment c = noncrossing ? d : std::move(d);
        auto& u = c.users;
        u[0].insert(u[0].end(), u[1].begin(), u[1].end());
        u.resize(1);
        run_mode(model, c, seed, *crossing);
    }
    if (noncrossing) run_mode(model, d, seed, *noncrossing);
}

SirSample sample_typical_sir(const SimModel& model, AssocMode mode, Band band, double mu_L, double mu_U,
                             std::uint64_t seed) {
    const int K = num_tiers(model.tiers);
    ModeTally t(mode, K);
    if (mode == AssocMode::noncrossing)
        run_trial(model, mu_L, mu_U, seed, &t, nullptr);
    else
        run_trial(model, mu_L, mu_U, seed, nullptr, &t);
    bool licensed_served = false;
    for (const SirSample& s : t.samples) {
        if (s.band == band) return s;
        if (s.band == Band::l_licensed) licensed_served = true;
    }
    if (band == Band::l_unlicensed && licensed_served)
        throw ConditioningFailed("serving AP was not granted the unlicensed channel");
    throw RunError(std::string("no ") + band_name(band) + " sample in this draw");
}

CoverageEstimate estimate_coverage(const std::vector<SirSample>& samples, double theta, int num_tiers) {
    std::uint64_t hit[3] = {0, 0, 0}, n[3] = {0, 0, 0};
    std::vector<std::vector<std::uint64_t>> th(3, std::vector<std::uint64_t>(num_tiers, 0));
    std::vector<std::vector<std::uint64_t>> tn = th;
    for (const SirSample& s : samples) {
        int b = static_cast<int>(s.band);
        bool covered = s.sir >= theta;
        ++n[b];
        hit[b] += covered;
        if (s.serving_tier >= 1 && s.serving_tier <= num_tiers) {
            ++tn[b][s.serving_tier - 1];
            th[b][s.serving_tier - 1] += covered;
        }
    }
    CoverageEstimate e;
    e.tier.assign(3, std::vector<Estimate>(num_tiers));
    for (int b = 0; b < 3; ++b) {
        e.band[b] = proportion(hit[b], n[b]);
        for (int k = 0; k < num_tiers; ++k) e.tier[b][k] = proportion(th[b][k], tn[b][k]);
    }
    return e;
}

Estimate estimate_coexisting_coverage(const std::vector<Estimate>& per_tier, const std::vector<double>& weights) {
    if (per_tier.size() != weights.size()) throw ConfigError("coverage and weight vectors differ in length");
    Estimate e;
    double var = 0.0;
    e.count = 0;
    for (std::size_t k = 0; k < per_tier.size(); ++k) {
        if (weights[k] == 0.0) continue;
        e.value += weights[k] * per_tier[k].value;
        var += weights[k] * weights[k] * per_tier[k].se * per_tier[k].se;
        e.count += per_tier[k].count;
    }
    e.se = std::sqrt(var);
    return e;
}

namespace {

Estimate mean_log_rate(const std::vector<SirSample>& samples, Band band, double gamma_max) {
    double s = 0.0, s2 = 0.0;
    std::uint64_t n = 0;
    for (const SirSample& x : samples) {
        if (x.band != band) continue;
        double v = std::log2(1.0 + std::min(x.sir, gamma_max));
        s += v;
        s2 += v * v;
        ++n;
    }
    Estimate e;
    e.count = n;
    if (n == 0) {
        e.value = NAN;
        return e;
    }
    e.value = s / n;
    if (n > 1) e.se = std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1)) / n);
    return e;
}

} // namespace

SpectrumEfficiency estimate_spectrum_efficiency(const std::vector<SirSample>& samples, double f_L, double f_U,
                                                double gamma_max) {
    Estimate a = mean_log_rate(samples, Band::l_licensed, gamma_max);
    Estimate b = mean_log_rate(samples, Band::l_unlicensed, gamma_max);
    Estimate c = mean_log_rate(samples, Band::u_unlicensed, gamma_max);
    SpectrumEfficiency r;
    r.C_L.count = a.count;
    if (a.count == 0) {
        r.C_L.value = NAN;
    } else if (f_L == 0.0) {
        r.C_L = a;
    } else {
        r.C_L.value = a.value + f_L * b.value;
        r.C_L.se = std::sqrt(a.se * a.se + f_L * f_L * b.se * b.se);
    }
    r.C_U.count = c.count;
    r.C_U.value = f_U * c.value;
    r.C_U.se = f_U * c.se;
    return r;
}

Estimate estimate_network_capacity(const CapacityTerms& t) {
    const std::size_t K = t.lambda.size();
    if (K == 0 || t.non_void.size() != K) throw ConfigError("capacity terms need one intensity and void rate per tier");
    double A = 0.0;
    for (std::size_t k = 0; k + 1 < K; ++k) A += t.lambda[k] * t.non_void[k];
    double B = t.lambda[K - 1] * t.non_void[K - 1];
    Estimate e;
    double var = 0.0;
    if (A > 0.0) {
        e.value += A * t.P_L.value * t.C_L.value;
        var += A * A * (std::pow(t.C_L.value * t.P_L.se, 2) + std::pow(t.P_L.value * t.C_L.se, 2));
    }
    if (B > 0.0) {
        e.value += B * t.P_U.value * t.C_U.value;
        var += B * B * (std::pow(t.C_U.value * t.P_U.se, 2) + std::pow(t.P_U.value * t.C_U.se, 2));
    }
    e.se = std::sqrt(var);
    e.count = std::min(t.P_L.count, t.P_U.count);
    if (A <= 0.0) e.count = t.P_U.count;
    return e;
}

} // namespace hetnet
