#include "hetnet/simd.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace hetnet::simd {
namespace {

inline float64x2_t ipow_inv(float64x2_t d2, int k) {
    float64x2_t p = d2;
    for (int i = 1; i < k; ++i) p = vmulq_f64(p, d2);
    return vdivq_f64(vdupq_n_f64(1.0), p);
}

// Two 2-lane accumulators mirror the 4-lane blocking of the reference.
double interference_int(const double* x, const double* y, const double* g, std::size_t n, double qx,
                        double qy, int half_alpha) {
    const float64x2_t vqx = vdupq_n_f64(qx), vqy = vdupq_n_f64(qy);
    float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (int h = 0; h < 2; ++h) {
            float64x2_t dx = vsubq_f64(vld1q_f64(x + i + 2 * h), vqx);
            float64x2_t dy = vsubq_f64(vld1q_f64(y + i + 2 * h), vqy);
            float64x2_t d2 = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
            float64x2_t term = vmulq_f64(vld1q_f64(g + i + 2 * h), ipow_inv(d2, half_alpha));
            if (h == 0) a01 = vaddq_f64(a01, term);
            else a23 = vaddq_f64(a23, term);
        }
    }
    float64x2_t pair = vaddq_f64(a01, a23);
    double s = vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
    for (; i < n; ++i) {
        double dx = x[i] - qx, dy = y[i] - qy;
        double d2 = dx * dx + dy * dy, p = d2;
        for (int k = 1; k < half_alpha; ++k) p *= d2;
        s += g[i] * (1.0 / p);
    }
    return s;
}

ArgMin weighted_argmin(const double* x, const double* y, const double* c, std::size_t n, double qx,
                       double qy) {
    ArgMin best{INFINITY, -1};
    std::size_t i = 0;
    if (n >= 2) {
        const float64x2_t vqx = vdupq_n_f64(qx), vqy = vdupq_n_f64(qy);
        float64x2_t vmin = vdupq_n_f64(INFINITY), vidx = vdupq_n_f64(-1.0);
        const double init[2] = {0.0, 1.0};
        float64x2_t cur = vld1q_f64(init);
        const float64x2_t two = vdupq_n_f64(2.0);
        for (; i + 2 <= n; i += 2) {
            float64x2_t dx = vsubq_f64(vld1q_f64(x + i), vqx);
            float64x2_t dy = vsubq_f64(vld1q_f64(y + i), vqy);
            float64x2_t v = vmulq_f64(vld1q_f64(c + i), vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy)));
            uint64x2_t lt = vcltq_f64(v, vmin);
            vmin = vbslq_f64(lt, v, vmin);
            vidx = vbslq_f64(lt, cur, vidx);
            cur = vaddq_f64(cur, two);
        }
        double m[2], ix[2];
        vst1q_f64(m, vmin);
        vst1q_f64(ix, vidx);
        for (int l = 0; l < 2; ++l) {
            if (ix[l] < 0) continue;
            auto li = static_cast<std::ptrdiff_t>(ix[l]);
            if (m[l] < best.value || (m[l] == best.value && li < best.index)) best = {m[l], li};
        }
    }
    for (; i < n; ++i) {
        double dx = x[i] - qx, dy = y[i] - qy;
        double v = c[i] * (dx * dx + dy * dy);
        if (v < best.value) best = {v, static_cast<std::ptrdiff_t>(i)};
    }
    return best;
}

bool earlier_within(const double* x, const double* y, const double* t, const std::int32_t* id,
                    std::size_t n, double qx, double qy, double r2, double tq, std::int32_t self) {
    std::size_t i = 0;
    const float64x2_t vqx = vdupq_n_f64(qx), vqy = vdupq_n_f64(qy);
    const float64x2_t vr2 = vdupq_n_f64(r2), vt = vdupq_n_f64(tq);
    const float64x2_t vself = vdupq_n_f64(static_cast<double>(self));
    for (; i + 2 <= n; i += 2) {
        float64x2_t dx = vsubq_f64(vld1q_f64(x + i), vqx);
        float64x2_t dy = vsubq_f64(vld1q_f64(y + i), vqy);
        float64x2_t d2 = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
        float64x2_t ti = vld1q_f64(t + i);
        const double ids[2] = {static_cast<double>(id[i]), static_cast<double>(id[i + 1])};
        float64x2_t vid = vld1q_f64(ids);
        uint64x2_t earlier = vorrq_u64(vcltq_f64(ti, vt), vandq_u64(vceqq_f64(ti, vt), vcltq_f64(vid, vself)));
        uint64x2_t other = veorq_u64(vceqq_f64(vid, vself), vdupq_n_u64(~0ULL));
        uint64x2_t hit = vandq_u64(vandq_u64(vcltq_f64(d2, vr2), earlier), other);
        if (vgetq_lane_u64(hit, 0) | vgetq_lane_u64(hit, 1)) return true;
    }
    for (; i < n; ++i) {
        if (id[i] == self) continue;
        double dx = x[i] - qx, dy = y[i] - qy;
        if (dx * dx + dy * dy < r2 && (t[i] < tq || (t[i] == tq && id[i] < self))) return true;
    }
    return false;
}

const Kernels kNeon{"neon", interference_int, weighted_argmin, earlier_within};

} // namespace

const Kernels* neon_kernels() { return &kNeon; }

} // namespace hetnet::simd

#else

namespace hetnet::simd {
const Kernels* neon_kernels() { return nullptr; }
} // namespace hetnet::simd

#endif
