#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hetnet/simd.hpp"

using namespace hetnet;

namespace {

struct Cloud {
    std::vector<double> x, y, w;
    std::vector<std::int32_t> id;
};

Cloud cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> pos(-500.0, 500.0), g(0.05, 3.0);
    Cloud c;
    for (std::size_t i = 0; i < n; ++i) {
        c.x.push_back(pos(eng));
        c.y.push_back(pos(eng));
        c.w.push_back(g(eng));
        c.id.push_back(static_cast<std::int32_t>(i));
    }
    return c;
}

std::vector<const simd::Kernels*> variants() {
    std::vector<const simd::Kernels*> v;
    if (const auto* k = simd::avx2_kernels()) v.push_back(k);
    if (const auto* k = simd::neon_kernels()) v.push_back(k);
    return v;
}

} // namespace

TEST_CASE("dispatch") {
    const simd::Kernels& a = simd::active();
    CHECK(a.name != nullptr);
    CHECK(std::string(simd::scalar_kernels().name) == "scalar");
    MESSAGE("active kernels: " << std::string(a.name) << ", vector variants: " << variants().size());
}

TEST_CASE("vector kernels match the scalar reference") {
    const simd::Kernels& ref = simd::scalar_kernels();
    for (const simd::Kernels* k : variants()) {
        CAPTURE(k->name);
        for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 1001u}) {
            Cloud c = cloud(n, n + 1);
            for (int q = 0; q < 20; ++q) {
                double qx = 37.0 * q - 300.0, qy = 11.0 * q - 100.0;
                for (int h : {1, 2, 3}) {
                    double a = ref.interference_int(c.x.data(), c.y.data(), c.w.data(), n, qx, qy, h);
                    double b = k->interference_int(c.x.data(), c.y.data(), c.w.data(), n, qx, qy, h);
                    CHECK(a == b);
                }
                simd::ArgMin a = ref.weighted_argmin(c.x.data(), c.y.data(), c.w.data(), n, qx, qy);
                simd::ArgMin b = k->weighted_argmin(c.x.data(), c.y.data(), c.w.data(), n, qx, qy);
                CHECK(a.index == b.index);
                CHECK((a.value == b.value || (std::isinf(a.value) && std::isinf(b.value))));
                for (double r : {0.0, 10.0, 80.0, 400.0}) {
                    for (std::int32_t self : {0, static_cast<std::int32_t>(n / 2)}) {
                        double t = 0.5 + 0.01 * q;
                        bool ea = ref.earlier_within(c.x.data(), c.y.data(), c.w.data(), c.id.data(), n, qx, qy, r * r, t, self);
                        bool eb = k->earlier_within(c.x.data(), c.y.data(), c.w.data(), c.id.data(), n, qx, qy, r * r, t, self);
                        CHECK(ea == eb);
                    }
                }
            }
        }
    }
}

TEST_CASE("argmin ties keep the first index") {
    std::vector<double> x{1, -1, 1, -1, 1, -1, 1, -1, 1}, y(9, 0.0), w(9, 1.0);
    CHECK(simd::scalar_kernels().weighted_argmin(x.data(), y.data(), w.data(), 9, 0, 0).index == 0);
    for (const simd::Kernels* k : variants()) CHECK(k->weighted_argmin(x.data(), y.data(), w.data(), 9, 0, 0).index == 0);
}

TEST_CASE("earlier_within tie-breaks by id") {
    std::vector<double> x{0, 1}, y{0, 0}, t{0.5, 0.5};
    std::vector<std::int32_t> id{0, 1};
    const auto& k = simd::scalar_kernels();
    CHECK(k.earlier_within(x.data(), y.data(), t.data(), id.data(), 2, 1, 0, 4.0, 0.5, 1));
    CHECK_FALSE(k.earlier_within(x.data(), y.data(), t.data(), id.data(), 2, 0, 0, 4.0, 0.5, 0));
}

TEST_CASE("interference for general alpha") {
    Cloud c = cloud(50, 3);
    const auto& k = simd::scalar_kernels();
    double direct = 0.0;
    for (std::size_t i = 0; i < 50; ++i)
        direct += c.w[i] * std::pow(std::hypot(c.x[i] - 5, c.y[i] + 2), -3.5);
    CHECK(simd::interference(k, c.x.data(), c.y.data(), c.w.data(), 50, 5, -2, 3.5) == doctest::Approx(direct).epsilon(1e-12));
    double d4 = 0.0;
    for (std::size_t i = 0; i < 50; ++i) d4 += c.w[i] * std::pow(std::hypot(c.x[i] - 5, c.y[i] + 2), -4.0);
    CHECK(simd::interference(k, c.x.data(), c.y.data(), c.w.data(), 50, 5, -2, 4.0) == doctest::Approx(d4).epsilon(1e-12));
}
