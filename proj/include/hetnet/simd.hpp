#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace hetnet::simd {

// Result of a weighted-distance scan: smallest c_i * |p_i - q|^2 and the
// first index attaining it (-1 when n == 0).
struct ArgMin {
    double value;
    std::ptrdiff_t index;
};

struct Kernels {
    const char* name;

    // sum_i g_i * (|p_i - q|^2)^(-half_alpha); half_alpha is a positive integer.
    double (*interference_int)(const double* x, const double* y, const double* g, std::size_t n,
                               double qx, double qy, int half_alpha);

    ArgMin (*weighted_argmin)(const double* x, const double* y, const double* c, std::size_t n,
                              double qx, double qy);

    // True if some j != self has |p_j - q|^2 < r2 and (t_j, id_j) < (t, self).
    bool (*earlier_within)(const double* x, const double* y, const double* t, const std::int32_t* id,
                           std::size_t n, double qx, double qy, double r2, double tq, std::int32_t self);
};

const Kernels& scalar_kernels();
// Null when the variant is not compiled in or not supported by the CPU.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

// Picks the best supported variant once; HETNET_SIMD=scalar|avx2|neon forces one.
const Kernels& active();

// Interference sum for any alpha; uses the integer kernel when alpha/2 is integral.
double interference(const Kernels& k, const double* x, const double* y, const double* g, std::size_t n,
                    double qx, double qy, double alpha);

} // namespace hetnet::simd
