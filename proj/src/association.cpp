#include "hetnet/association.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "hetnet/errors.hpp"
#include "hetnet/grid.hpp"
#include "hetnet/simd.hpp"

namespace hetnet {

void validate_policy(const AssociationPolicy& p, int num_tiers) {
    if (p.scheme != Scheme::bna) return;
    if (static_cast<int>(p.bias.size()) != num_tiers) throw ConfigError("BNA needs one bias weight per tier");
    for (double b : p.bias)
        if (!(b > 0.0)) throw ConfigError("BNA bias weights must be > 0");
}

double association_weight(const AssociationPolicy& p, const TierSpec& t, const MarkedPoint& ap) {
    if (p.scheme == Scheme::bna) return p.bias[t.index - 1];
    return t.power * ap.shadow_inv;
}

double weight_moment(const AssociationPolicy& p, const TierSpec& t, double sigma_ln, double c) {
    if (p.scheme == Scheme::bna) return std::pow(p.bias[t.index - 1], c);
    // G^{-1} is lognormal with the same sigma as G.
    return std::pow(t.power, c) * std::exp(0.5 * c * c * sigma_ln * sigma_ln);
}

std::vector<int> eligible_tiers(AssocMode mode, int K, std::size_t population) {
    std::vector<int> out;
    if (mode == AssocMode::crossing) {
        for (int k = 1; k <= K; ++k) out.push_back(k);
    } else if (population == 0) {
        for (int k = 1; k < K; ++k) out.push_back(k);
    } else if (population == 1) {
        out.push_back(K);
    }
    return out;
}

namespace {

struct TierIndex {
    CellGrid grid;
    double cmin = kInf;
    std::size_t count = 0;
};

} // namespace

AssociationMap associate(const Deployment& d, const std::vector<TierSpec>& tiers, const AssociationPolicy& p,
                         double alpha, const AssociateOptions& opt) {
    const int K = d.num_tiers();
    const simd::Kernels& kern = simd::active();
    const double z = 2.0 / alpha;

    std::vector<TierIndex> index(K);
    for (int k = 1; k <= K; ++k) {
        std::size_t b = d.tier_begin[k - 1], e = d.tier_begin[k];
        std::vector<double> x, y, c;
        std::vector<std::int32_t> ids;
        for (std::size_t i = b; i < e; ++i) {
            const MarkedPoint& ap = d.aps[i];
            double ci = std::pow(association_weight(p, tiers[k - 1], ap), -z);
            x.push_back(ap.x);
            y.push_back(ap.y);
            c.push_back(ci);
            ids.push_back(static_cast<std::int32_t>(i));
            index[k - 1].cmin = std::min(index[k - 1].cmin, ci);
        }
        index[k - 1].count = e - b;
        // About four points per cell.
        double area = 4.0 * d.window.radius * d.window.radius;
        double hint = e > b ? std::sqrt(4.0 * area / static_cast<double>(e - b)) : 2.0 * d.window.radius;
        index[k - 1].grid.build(x, y, c, ids, d.window, hint);
    }

    AssociationMap m;
    m.tagged.assign(d.aps.size(), 0);
    m.first_user.assign(d.aps.size(), UserRef{});
    for (std::size_t pop = 0; pop < d.users.size(); ++pop) {
        const auto& users = d.users[pop];
        m.users.emplace_back(users.size());
        m.processed.push_back(0);
        if (users.empty()) continue;
        std::vector<int> elig = eligible_tiers(p.mode, K, pop);
        std::size_t reachable = 0;
        for (int k : elig) reachable += index[k - 1].count;
        if (reachable == 0)
            throw RunError("no eligible AP for user population " + std::to_string(pop));
        std::size_t untagged = 0;
        for (int k : elig)
            for (std::size_t i = d.tier_begin[k - 1]; i < d.tier_begin[k]; ++i) untagged += m.tagged[i] == 0;

        for (std::size_t u = 0; u < users.size(); ++u) {
            const double qx = users[u].x, qy = users[u].y;
            double best = kInf;
            std::int32_t best_id = -1;
            for (int k : elig) {
                const TierIndex& ti = index[k - 1];
                if (ti.count == 0) continue;
                const CellGrid& g = ti.grid;
                int cx = g.cell_of(qx), cy = g.cell_of(qy);
                int rmax = g.max_ring(cx, cy);
                for (int r = 0; r <= rmax; ++r) {
                    if (r >= 1) {
                        double lb = (r - 1) * g.cell_size();
                        if (ti.cmin * lb * lb > best) break;
                    }
                    g.for_ring(cx, cy, r, [&](std::uint32_t b, std::uint32_t e, double sx, double sy) {
                        simd::ArgMin am = kern.weighted_argmin(g.x() + b, g.y() + b, g.w() + b, e - b, qx - sx, qy - sy);
                        if (am.index < 0) return;
                        std::int32_t id = g.id()[b + am.index];
                        if (am.value < best || (am.value == best && id < best_id)) {
                            best = am.value;
                            best_id = id;
                        }
                    });
                }
            }
            ServedRecord& rec = m.users[pop][u];
            rec.ap = best_id;
            rec.tier = d.aps[best_id].tier;
            rec.weighted_distance = std::sqrt(best);
            if (m.tagged[best_id]++ == 0) {
                m.first_user[best_id] = UserRef{static_cast<std::int32_t>(pop), static_cast<std::int64_t>(u)};
                --untagged;
            }
            m.processed[pop] = u + 1;
            if (opt.early_exit && untagged == 0) break;
        }
    }
    return m;
}

ServedRecord serve_point(const Deployment& d, const std::vector<TierSpec>& tiers, const AssociationPolicy& p,
                         double alpha, const std::vector<int>& eligible, Vec2 u) {
    const double z = 2.0 / alpha;
    ServedRecord rec;
    double best = kInf;
    for (int k : eligible) {
        for (std::size_t i = d.tier_begin[k - 1]; i < d.tier_begin[k]; ++i) {
            const MarkedPoint& ap = d.aps[i];
            double r = distance({ap.x, ap.y}, u, d.window);
            double v = std::pow(association_weight(p, tiers[k - 1], ap), -z) * r * r;
            if (v < best) {
                best = v;
                rec.ap = static_cast<std::int32_t>(i);
                rec.tier = k;
            }
        }
    }
    if (rec.ap < 0) throw RunError("no eligible AP for the user");
    rec.weighted_distance = std::sqrt(best);
    return rec;
}

void apply_void_flags(const AssociationMap& m, Deployment& d) {
    for (std::size_t i = 0; i < d.aps.size(); ++i) d.aps[i].v = m.is_void(i) ? 0 : 1;
}

AssocStats association_stats(const std::vector<TierSpec>& tiers, const AssociationPolicy& p, double sigma_ln,
                             double alpha) {
    const double z = 2.0 / alpha;
    const int K = num_tiers(tiers);
    AssocStats s;
    double sum_l = 0.0, sum_all = 0.0;
    for (const auto& t : tiers) {
        double ep = weight_moment(p, t, sigma_ln, z), em = weight_moment(p, t, sigma_ln, -z);
        s.Lambda.push_back(t.intensity * ep);
        s.zeta.push_back(3.5 * ep * em);
        s.lambda_tilde.push_back(t.intensity * ep * em);
        sum_all += s.Lambda.back();
        if (t.index < K) sum_l += s.Lambda.back();
    }
    for (int k = 0; k < K; ++k) {
        s.share.push_back(sum_l > 0.0 ? s.Lambda[k] / sum_l : 0.0);
        s.share_hat.push_back(sum_all > 0.0 ? s.Lambda[k] / sum_all : 0.0);
    }
    return s;
}

namespace {

double void_formula(double mu, double share, double zeta, double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    return std::pow(1.0 + mu * share / (zeta * lambda), -zeta);
}

} // namespace

std::vector<double> void_probabilities_noncrossing(const std::vector<TierSpec>& tiers, const AssocStats& s,
                                                   double mu_L, double mu_U) {
    const int K = num_tiers(tiers);
    std::vector<double> nu(K);
    for (int k = 0; k < K - 1; ++k) nu[k] = void_formula(mu_L, s.share[k], s.zeta[k], tiers[k].intensity);
    nu[K - 1] = void_formula(mu_U, 1.0, s.zeta[K - 1], tiers[K - 1].intensity);
    return nu;
}

std::vector<double> void_probabilities_crossing(const std::vector<TierSpec>& tiers, const AssocStats& s, double mu) {
    std::vector<double> nu;
    for (std::size_t k = 0; k < tiers.size(); ++k)
        nu.push_back(void_formula(mu, s.share_hat[k], s.zeta[k], tiers[k].intensity));
    return nu;
}

double analytic_void_probability(const std::vector<TierSpec>& tiers, const AssociationPolicy& p, double sigma_ln,
                                 double alpha, double mu_L, double mu_U, int k) {
    AssocStats s = association_stats(tiers, p, sigma_ln, alpha);
    auto nu = p.mode == AssocMode::crossing ? void_probabilities_crossing(tiers, s, mu_L + mu_U)
                                            : void_probabilities_noncrossing(tiers, s, mu_L, mu_U);
    return nu.at(k - 1);
}

double weighted_distance_cdf(const std::vector<TierSpec>& tiers, const AssociationPolicy& p, double sigma_ln,
                             double alpha, const std::vector<int>& eligible, double x) {
    if (x <= 0.0) return 0.0;
    double lam = 0.0;
    for (int k : eligible) lam += tiers[k - 1].intensity * weight_moment(p, tiers[k - 1], sigma_ln, 2.0 / alpha);
    return -std::expm1(-std::numbers::pi * x * x * lam);
}

double void_guard_distance(const std::vector<TierSpec>& tiers, const AssociationPolicy& p, double sigma_ln,
                           double alpha, int k, double quantile) {
    const int K = num_tiers(tiers);
    const double z = 2.0 / alpha;
    std::vector<int> elig = eligible_tiers(p.mode, K, k < K ? 0 : 1);
    double lam = 0.0;
    for (int m : elig) lam += tiers[m - 1].intensity * weight_moment(p, tiers[m - 1], sigma_ln, z);
    if (!(lam > 0.0)) return 0.0;
    double xq = std::sqrt(-std::log1p(-quantile) / (std::numbers::pi * lam));
    if (p.scheme == Scheme::bna) return std::pow(p.bias[k - 1], 1.0 / alpha) * xq;
    double zq = boost::math::quantile(boost::math::normal_distribution<double>(), quantile);
    double wq = std::pow(tiers[k - 1].power, 1.0 / alpha) * std::exp((zq * sigma_ln + z * sigma_ln * sigma_ln) / alpha);
    return wq * xq;
}

Estimate proportion(std::uint64_t hits, std::uint64_t n) {
    Estimate e;
    e.count = n;
    if (n == 0) {
        e.value = std::nan("");
        return e;
    }
    e.value = static_cast<double>(hits) / static_cast<double>(n);
    e.se = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n));
    return e;
}

void VoidTally::add(const Deployment& d, const AssociationMap& m, const std::vector<double>& guard) {
    for (std::size_t i = 0; i < d.aps.size(); ++i) {
        const MarkedPoint& ap = d.aps[i];
        if (boundary_clearance({ap.x, ap.y}, d.window) < guard[ap.tier - 1]) continue;
        ++total_[ap.tier - 1];
        voids_[ap.tier - 1] += m.is_void(i) ? 1 : 0;
    }
}

void VoidTally::merge(const VoidTally& o) {
    for (std::size_t k = 0; k < voids_.size(); ++k) {
        voids_[k] += o.voids_[k];
        total_[k] += o.total_[k];
    }
}

Estimate VoidTally::estimate(int k) const { return proportion(voids_[k - 1], total_[k - 1]); }

Estimate empirical_void_probability(const std::vector<const Deployment*>& deps,
                                    const std::vector<const AssociationMap*>& maps, int k, double guard) {
    if (deps.empty()) return proportion(0, 0);
    VoidTally t(deps.front()->num_tiers());
    std::vector<double> g(deps.front()->num_tiers(), 0.0);
    g[k - 1] = guard;
    for (std::size_t i = 0; i < deps.size(); ++i) t.add(*deps[i], *maps[i], g);
    return t.estimate(k);
}

} // namespace hetnet
