#include "hetnet/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace hetnet::simd {
namespace {

inline __m256d ipow_inv(__m256d d2, int k) {
    __m256d p = d2;
    for (int i = 1; i < k; ++i) p = _mm256_mul_pd(p, d2);
    return _mm256_div_pd(_mm256_set1_pd(1.0), p);
}

double interference_int(const double* x, const double* y, const double* g, std::size_t n, double qx,
                        double qy, int half_alpha) {
    const __m256d vqx = _mm256_set1_pd(qx), vqy = _mm256_set1_pd(qy);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vqx);
        __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vqy);
        __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(g + i), ipow_inv(d2, half_alpha)));
    }
    __m128d lo = _mm256_castpd256_pd128(acc), hi = _mm256_extractf128_pd(acc, 1);
    __m128d pair = _mm_add_pd(lo, hi); // (a0 + a2, a1 + a3)
    double s = _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
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
    if (n >= 4) {
        const __m256d vqx = _mm256_set1_pd(qx), vqy = _mm256_set1_pd(qy);
        __m256d vmin = _mm256_set1_pd(INFINITY);
        __m256d vidx = _mm256_set1_pd(-1.0);
        __m256d cur = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
        const __m256d four = _mm256_set1_pd(4.0);
        for (; i + 4 <= n; i += 4) {
            __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vqx);
            __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vqy);
            __m256d v = _mm256_mul_pd(_mm256_loadu_pd(c + i),
                                      _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
            __m256d lt = _mm256_cmp_pd(v, vmin, _CMP_LT_OQ);
            vmin = _mm256_blendv_pd(vmin, v, lt);
            vidx = _mm256_blendv_pd(vidx, cur, lt);
            cur = _mm256_add_pd(cur, four);
        }
        alignas(32) double m[4], ix[4];
        _mm256_store_pd(m, vmin);
        _mm256_store_pd(ix, vidx);
        for (int l = 0; l < 4; ++l) {
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
    const __m256d vqx = _mm256_set1_pd(qx), vqy = _mm256_set1_pd(qy);
    const __m256d vr2 = _mm256_set1_pd(r2), vt = _mm256_set1_pd(tq);
    const __m256d vself = _mm256_set1_pd(static_cast<double>(self));
    for (; i + 4 <= n; i += 4) {
        __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vqx);
        __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vqy);
        __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        __m256d ti = _mm256_loadu_pd(t + i);
        __m256d vid = _mm256_cvtepi32_pd(_mm_loadu_si128(reinterpret_cast<const __m128i*>(id + i)));
        __m256d near = _mm256_cmp_pd(d2, vr2, _CMP_LT_OQ);
        __m256d earlier = _mm256_or_pd(
            _mm256_cmp_pd(ti, vt, _CMP_LT_OQ),
            _mm256_and_pd(_mm256_cmp_pd(ti, vt, _CMP_EQ_OQ), _mm256_cmp_pd(vid, vself, _CMP_LT_OQ)));
        __m256d other = _mm256_cmp_pd(vid, vself, _CMP_NEQ_OQ);
        if (_mm256_movemask_pd(_mm256_and_pd(_mm256_and_pd(near, earlier), other))) return true;
    }
    for (; i < n; ++i) {
        if (id[i] == self) continue;
        double dx = x[i] - qx, dy = y[i] - qy;
        if (dx * dx + dy * dy < r2 && (t[i] < tq || (t[i] == tq && id[i] < self))) return true;
    }
    return false;
}

const Kernels kAvx2{"avx2", interference_int, weighted_argmin, earlier_within};

} // namespace

const Kernels* avx2_kernels() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") ? &kAvx2 : nullptr;
}

} // namespace hetnet::simd

#else

namespace hetnet::simd {
const Kernels* avx2_kernels() { return nullptr; }
} // namespace hetnet::simd

#endif
