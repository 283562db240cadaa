#include "hetnet/simd.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace hetnet::simd {

namespace {

const Kernels& select() {
    const char* env = std::getenv("HETNET_SIMD");
    std::string want = env ? env : "";
    if (want == "scalar") return scalar_kernels();
    if (want == "avx2" && avx2_kernels()) return *avx2_kernels();
    if (want == "neon" && neon_kernels()) return *neon_kernels();
    if (const Kernels* k = avx2_kernels()) return *k;
    if (const Kernels* k = neon_kernels()) return *k;
    return scalar_kernels();
}

} // namespace

const Kernels& active() {
    static const Kernels& k = select();
    return k;
}

double interference(const Kernels& k, const double* x, const double* y, const double* g, std::size_t n,
                    double qx, double qy, double alpha) {
    double half = 0.5 * alpha;
    if (half == std::floor(half) && half >= 1.0 && half <= 16.0)
        return k.interference_int(x, y, g, n, qx, qy, static_cast<int>(half));
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - qx, dy = y[i] - qy;
        s += g[i] * std::pow(dx * dx + dy * dy, -half);
    }
    return s;
}

} // namespace hetnet::simd
