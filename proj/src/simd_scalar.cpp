#include "hetnet/simd.hpp"

#include <cmath>

namespace hetnet::simd {
namespace {

double ipow_inv(double d2, int k) {
    double p = d2;
    for (int i = 1; i < k; ++i) p *= d2;
    return 1.0 / p;
}

// Lane-blocked accumulation (4 partial sums) so the reference matches the
// association order of the vector variants up to final reduction.
double interference_int(const double* x, const double* y, const double* g, std::size_t n, double qx,
                        double qy, int half_alpha) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (int l = 0; l < 4; ++l) {
            double dx = x[i + l] - qx, dy = y[i + l] - qy;
            acc[l] += g[i + l] * ipow_inv(dx * dx + dy * dy, half_alpha);
        }
    }
    double s = (acc[0] + acc[2]) + (acc[1] + acc[3]);
    for (; i < n; ++i) {
        double dx = x[i] - qx, dy = y[i] - qy;
        s += g[i] * ipow_inv(dx * dx + dy * dy, half_alpha);
    }
    return s;
}

ArgMin weighted_argmin(const double* x, const double* y, const double* c, std::size_t n, double qx,
                       double qy) {
    ArgMin best{INFINITY, -1};
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - qx, dy = y[i] - qy;
        double v = c[i] * (dx * dx + dy * dy);
        if (v < best.value) best = {v, static_cast<std::ptrdiff_t>(i)};
    }
    return best;
}

bool earlier_within(const double* x, const double* y, const double* t, const std::int32_t* id,
                    std::size_t n, double qx, double qy, double r2, double tq, std::int32_t self) {
    for (std::size_t i = 0; i < n; ++i) {
        if (id[i] == self) continue;
        double dx = x[i] - qx, dy = y[i] - qy;
        if (dx * dx + dy * dy < r2 && (t[i] < tq || (t[i] == tq && id[i] < self))) return true;
    }
    return false;
}

const Kernels kScalar{"scalar", interference_int, weighted_argmin, earlier_within};

} // namespace

const Kernels& scalar_kernels() { return kScalar; }

} // namespace hetnet::simd
