#include "hetnet/csma.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "hetnet/errors.hpp"
#include "hetnet/grid.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/simd.hpp"

namespace hetnet {

ContentionOutcome run_contention(const Deployment& d, const std::vector<TierSpec>& tiers, double delta,
                                 double sigma_ln, std::uint64_t seed, const ContentionOptions& opt) {
    const int K = d.num_tiers();
    const std::size_t n = d.aps.size();
    ContentionOutcome o;
    o.access.assign(n, Access::not_contending);
    o.backoff.assign(n, -1.0);
    o.candidates.assign(K, 0);
    o.contending.assign(K, 0);
    o.granted.assign(K, 0);

    Engine eng = make_stream(seed, {kTagContention});
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> cx, cy, ct;
    std::vector<std::int32_t> cid;
    double rmax = 0.0;
    // Every AP of a contending tier consumes the same draws whether or not it
    // takes part, so void-aware and void-blind rounds on one seed are coupled.
    for (std::size_t i = 0; i < n; ++i) {
        const MarkedPoint& ap = d.aps[i];
        const TierSpec& t = tiers[ap.tier - 1];
        if (!t.contends()) continue;
        const double gain = opt.redraw_gate ? expo(eng) * std::exp(sigma_ln * gauss(eng)) : ap.gate_gain;
        const double u = unif(eng);
        if (opt.void_aware) {
            if (ap.v < 0) throw RunError("contention needs void flags; run association first");
            if (ap.v == 0) continue;
        }
        ++o.candidates[ap.tier - 1];
        if (static_cast<std::int32_t>(i) != opt.forced && gain < delta) continue;
        double T = t.max_backoff * u;
        o.backoff[i] = T;
        o.access[i] = Access::denied;
        ++o.contending[ap.tier - 1];
        cx.push_back(ap.x);
        cy.push_back(ap.y);
        ct.push_back(T);
        cid.push_back(static_cast<std::int32_t>(i));
        rmax = std::max(rmax, t.sensing_radius);
    }
    if (cid.empty()) return o;

    CellGrid g;
    g.build(cx, cy, ct, cid, d.window, std::max(rmax, 1e-6));
    const simd::Kernels& kern = simd::active();
    for (std::size_t j = 0; j < cid.size(); ++j) {
        const std::int32_t self = cid[j];
        const double r = tiers[d.aps[self].tier - 1].sensing_radius;
        const double r2 = r * r;
        const int gx = g.cell_of(cx[j]), gy = g.cell_of(cy[j]);
        const int rings = std::min(static_cast<int>(std::ceil(r / g.cell_size())), g.max_ring(gx, gy));
        bool blocked = false;
        for (int ring = 0; ring <= rings && !blocked; ++ring) {
            g.for_ring(gx, gy, ring, [&](std::uint32_t b, std::uint32_t e, double sx, double sy) {
                if (blocked) return;
                blocked = kern.earlier_within(g.x() + b, g.y() + b, g.w() + b, g.id() + b, e - b, cx[j] - sx,
                                              cy[j] - sy, r2, ct[j], self);
            });
        }
        if (!blocked) {
            o.access[self] = Access::granted;
            ++o.granted[d.aps[self].tier - 1];
        }
    }
    return o;
}

void apply_contention(const ContentionOutcome& o, Deployment& d) {
    for (std::size_t i = 0; i < d.aps.size(); ++i) {
        d.aps[i].access = o.access[i];
        d.aps[i].backoff = o.backoff[i];
    }
}

void AccessTally::add(const Deployment& d, const std::vector<TierSpec>& tiers, const ContentionOutcome& o) {
    for (std::size_t i = 0; i < d.aps.size(); ++i) {
        const MarkedPoint& ap = d.aps[i];
        const TierSpec& t = tiers[ap.tier - 1];
        if (!t.contends()) continue;
        if (boundary_clearance({ap.x, ap.y}, d.window) < t.sensing_radius) continue;
        const int k = ap.tier - 1;
        if (o.access[i] == Access::granted) {
            ++granted_[k];
            ++contending_[k];
            ++candidates_[k];
        } else if (o.access[i] == Access::denied) {
            ++contending_[k];
            ++candidates_[k];
        } else if (ap.v != 0) {
            ++candidates_[k];
        }
    }
}

void AccessTally::merge(const AccessTally& o) {
    for (std::size_t k = 0; k < granted_.size(); ++k) {
        granted_[k] += o.granted_[k];
        contending_[k] += o.contending_[k];
        candidates_[k] += o.candidates_[k];
    }
}

Estimate AccessTally::access(int k) const {
    if (contending_[k - 1] == 0) throw RunError("tier " + std::to_string(k) + " never contended");
    return proportion(granted_[k - 1], contending_[k - 1]);
}

Estimate AccessTally::transmit_fraction(int k) const { return proportion(granted_[k - 1], candidates_[k - 1]); }

double conditional_grant_probability(double tau, const std::vector<Rival>& rivals) {
    if (rivals.empty()) return 1.0;
    if (!(tau > 0.0)) {
        double q = 1.0;
        for (const Rival& r : rivals)
            if (r.tau == 0.0) q *= 1.0 - r.p;
        return q;
    }
    auto f = [&](double t) {
        double q = 1.0;
        for (const Rival& r : rivals) q *= 1.0 - r.p * (r.tau > 0.0 ? std::min(t / r.tau, 1.0) : 1.0);
        return q;
    };
    // Piecewise polynomial; exact per piece while the rival count stays below 40.
    std::vector<double> knots{0.0, tau};
    for (const Rival& r : rivals)
        if (r.tau > 0.0 && r.tau < tau) knots.push_back(r.tau);
    std::sort(knots.begin(), knots.end());
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < knots.size(); ++j)
        if (knots[j + 1] > knots[j]) s += boost::math::quadrature::gauss<double, 20>::integrate(f, knots[j], knots[j + 1]);
    return s / tau;
}

void ConditionalAccessTally::add(const Deployment& d, const std::vector<TierSpec>& tiers,
                                 const std::vector<double>& gate_p, bool void_aware) {
    std::vector<double> x, y, w;
    std::vector<std::int32_t> ids;
    double rmax = 0.0;
    for (std::size_t i = 0; i < d.aps.size(); ++i) {
        const MarkedPoint& ap = d.aps[i];
        const TierSpec& t = tiers[ap.tier - 1];
        if (!t.contends()) continue;
        if (void_aware && ap.v < 0) throw RunError("conditional access needs void flags");
        if (void_aware && ap.v == 0) continue;
        x.push_back(ap.x);
        y.push_back(ap.y);
        ids.push_back(static_cast<std::int32_t>(i));
        rmax = std::max(rmax, t.sensing_radius);
    }
    if (ids.empty()) return;
    CellGrid g;
    g.build(x, y, w, ids, d.window, rmax);
    std::vector<Rival> rivals;
    for (std::size_t a = 0; a < ids.size(); ++a) {
        const std::size_t i = static_cast<std::size_t>(ids[a]);
        const MarkedPoint& ap = d.aps[i];
        const TierSpec& t = tiers[ap.tier - 1];
        if (boundary_clearance({ap.x, ap.y}, d.window) < t.sensing_radius) continue;
        const double r2 = t.sensing_radius * t.sensing_radius;
        const int cx = g.cell_of(ap.x), cy = g.cell_of(ap.y);
        const int rings = std::min(static_cast<int>(std::ceil(t.sensing_radius / g.cell_size())), g.max_ring(cx, cy));
        rivals.clear();
        for (int r = 0; r <= rings; ++r) {
            g.for_ring(cx, cy, r, [&](std::uint32_t b, std::uint32_t e, double sx, double sy) {
                for (std::uint32_t j = b; j < e; ++j) {
                    if (g.id()[j] == static_cast<std::int32_t>(i)) continue;
                    double dx = g.x()[j] - (ap.x - sx), dy = g.y()[j] - (ap.y - sy);
                    if (dx * dx + dy * dy >= r2) continue;
                    const int m = d.aps[g.id()[j]].tier;
                    rivals.push_back({tiers[m - 1].max_backoff, gate_p[m - 1]});
                }
            });
        }
        const double v = conditional_grant_probability(t.max_backoff, rivals);
        const int k = ap.tier - 1;
        sum_[k] += v;
        sum2_[k] += v * v;
        ++n_[k];
    }
}

void ConditionalAccessTally::merge(const ConditionalAccessTally& o) {
    for (std::size_t k = 0; k < sum_.size(); ++k) {
        sum_[k] += o.sum_[k];
        sum2_[k] += o.sum2_[k];
        n_[k] += o.n_[k];
    }
}

Estimate ConditionalAccessTally::access(int k) const {
    const std::uint64_t n = n_[k - 1];
    if (n == 0) throw RunError("tier " + std::to_string(k) + " has no potential contenders");
    Estimate e;
    e.count = n;
    e.value = sum_[k - 1] / n;
    if (n > 1) e.se = std::sqrt(std::max(0.0, (sum2_[k - 1] - sum_[k - 1] * e.value) / (n - 1)) / n);
    return e;
}

Estimate empirical_access_probability(const std::vector<const Deployment*>& deps,
                                      const std::vector<const ContentionOutcome*>& outcomes,
                                      const std::vector<TierSpec>& tiers, int k) {
    AccessTally t(num_tiers(tiers));
    for (std::size_t i = 0; i < deps.size(); ++i) t.add(*deps[i], tiers, *outcomes[i]);
    return t.access(k);
}

double lens_area(double r1, double r2, double d) {
    if (r1 <= 0.0 || r2 <= 0.0) return 0.0;
    if (d >= r1 + r2) return 0.0;
    double rs = std::min(r1, r2);
    if (d <= std::abs(r1 - r2)) return std::numbers::pi * rs * rs;
    double a1 = std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0));
    double a2 = std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0));
    double k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    return r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * std::sqrt(std::max(k, 0.0));
}

AreaTally::AreaTally(int num_tiers)
    : K_(num_tiers), sum_(num_tiers * num_tiers, 0.0), sum2_(num_tiers * num_tiers, 0.0),
      n_(num_tiers * num_tiers, 0) {}

void AreaTally::add(const Deployment& d, const AssociationMap& m, const std::vector<TierSpec>& tiers,
                    const AssociationPolicy& p, double alpha) {
    for (std::size_t i = 0; i < d.aps.size(); ++i) {
        const UserRef& ref = m.first_user[i];
        if (ref.population < 0) continue;
        const MarkedPoint& ap = d.aps[i];
        const int k = ap.tier;
        const TierSpec& tk = tiers[k - 1];
        if (!tk.contends()) continue;
        const Vec2 u = d.users[ref.population][ref.index];
        const double du = distance({ap.x, ap.y}, u, d.window);
        const double w_star = association_weight(p, tk, ap);
        const double rs = tk.sensing_radius;
        const double full = std::numbers::pi * rs * rs;
        for (int mt = 1; mt <= K_; ++mt) {
            bool exclude = p.mode == AssocMode::crossing || (k < K_ && mt < K_);
            double a = full;
            if (exclude) {
                double wm = p.scheme == Scheme::bna ? p.bias[mt - 1] : tiers[mt - 1].power;
                double rho = std::pow(wm / w_star, 1.0 / alpha) * du;
                a = full - lens_area(rs, rho, du);
            }
            std::size_t c = (k - 1) * K_ + (mt - 1);
            sum_[c] += a;
            sum2_[c] += a * a;
            ++n_[c];
        }
    }
}

void AreaTally::merge(const AreaTally& o) {
    for (std::size_t c = 0; c < sum_.size(); ++c) {
        sum_[c] += o.sum_[c];
        sum2_[c] += o.sum2_[c];
        n_[c] += o.n_[c];
    }
}

MeanAreaTable AreaTally::table(const std::vector<TierSpec>& tiers) const {
    MeanAreaTable t = full_sensing_areas(tiers);
    for (std::size_t c = 0; c < sum_.size(); ++c) {
        if (n_[c] == 0) continue;
        double nn = static_cast<double>(n_[c]);
        double mean = sum_[c] / nn;
        t.mean[c] = mean;
        t.count[c] = n_[c];
        t.se[c] = n_[c] > 1 ? std::sqrt(std::max(sum2_[c] / nn - mean * mean, 0.0) / (nn - 1.0)) : 0.0;
    }
    return t;
}

MeanAreaTable estimate_mean_areas(const std::vector<const Deployment*>& deps,
                                  const std::vector<const AssociationMap*>& maps,
                                  const std::vector<TierSpec>& tiers, const AssociationPolicy& p, double alpha) {
    AreaTally t(num_tiers(tiers));
    for (std::size_t i = 0; i < deps.size(); ++i) t.add(*deps[i], *maps[i], tiers, p, alpha);
    return t.table(tiers);
}

MeanAreaTable full_sensing_areas(const std::vector<TierSpec>& tiers) {
    MeanAreaTable t;
    t.K = num_tiers(tiers);
    t.mean.assign(t.K * t.K, 0.0);
    t.se.assign(t.K * t.K, 0.0);
    t.count.assign(t.K * t.K, 0);
    for (int k = 1; k <= t.K; ++k) {
        double rs = tiers[k - 1].sensing_radius;
        for (int m = 1; m <= t.K; ++m) t.at(k, m) = std::numbers::pi * rs * rs;
    }
    return t;
}

ThinningReport verify_mhpp_thinning(const std::vector<const Deployment*>& deps,
                                    const std::vector<const ContentionOutcome*>& outcomes, double radius,
                                    double min_expected_pairs) {
    ThinningReport r;
    r.radius = radius;
    const double r2 = radius * radius;
    for (std::size_t s = 0; s < deps.size(); ++s) {
        const Deployment& d = *deps[s];
        std::vector<Vec2> pts;
        for (std::size_t i = 0; i < d.aps.size(); ++i)
            if (outcomes[s]->is_granted(i)) pts.push_back({d.aps[i].x, d.aps[i].y});
        const double area = d.window.mode == BoundaryMode::torus ? 4.0 * d.window.radius * d.window.radius
                                                                  : std::numbers::pi * d.window.radius * d.window.radius;
        const double np = static_cast<double>(pts.size());
        r.expected_pairs += 0.5 * np * (np - 1.0) * std::numbers::pi * r2 / area;
        for (std::size_t a = 0; a < pts.size(); ++a)
            for (std::size_t b = a + 1; b < pts.size(); ++b) {
                double dd = distance(pts[a], pts[b], d.window);
                if (dd * dd < r2) r.observed_pairs += 1.0;
            }
    }
    r.sufficient = r.expected_pairs >= min_expected_pairs;
    r.ratio = r.expected_pairs > 0.0 ? r.observed_pairs / r.expected_pairs : 1.0;
    return r;
}

} // namespace hetnet
