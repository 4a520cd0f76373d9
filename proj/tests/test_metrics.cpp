#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "attrib/metrics.hpp"

using namespace attrib;

namespace {

Vec random_vec(std::size_t n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vec v(n);
    for (double& e : v) e = u(rng);
    return v;
}

// independent sliding-window SSIM, written as plainly as possible
double ssim_reference(const Vec& a, const Vec& b, std::size_t rows, std::size_t cols,
                      int win, double range) {
    const double c1 = 0.01 * range * 0.01 * range;
    const double c2 = 0.03 * range * 0.03 * range;
    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t r0 = 0; r0 + win <= rows; ++r0)
        for (std::size_t c0 = 0; c0 + win <= cols; ++c0) {
            double ma = 0, mb = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    ma += a[(r0 + i) * cols + c0 + j];
                    mb += b[(r0 + i) * cols + c0 + j];
                }
            const double n = double(win) * win;
            ma /= n;
            mb /= n;
            double va = 0, vb = 0, cab = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double da = a[(r0 + i) * cols + c0 + j] - ma;
                    const double db = b[(r0 + i) * cols + c0 + j] - mb;
                    va += da * da;
                    vb += db * db;
                    cab += da * db;
                }
            va /= n;
            vb /= n;
            cab /= n;
            total += ((2 * ma * mb + c1) * (2 * cab + c2)) /
                     ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++windows;
        }
    return total / double(windows);
}

}  // namespace

TEST_CASE("mse basics") {
    CHECK(mse({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(mse({0, 0}, {1, 1}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(mse({1, 2}, {1}), std::invalid_argument);

    std::mt19937_64 rng(1);
    Vec a = random_vec(64, rng), b = random_vec(64, rng);
    double want = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) want += (a[i] - b[i]) * (a[i] - b[i]);
    want /= double(a.size());
    CHECK(std::fabs(mse(a, b) - want) < 1e-12);
}

TEST_CASE("pearson correlation is exact under affine maps") {
    std::mt19937_64 rng(2);
    Vec a = random_vec(50, rng);
    Vec b(a.size()), c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        b[i] = 2.0 * a[i] + 3.0;
        c[i] = -a[i];
    }
    CHECK(pcc(a, b) == doctest::Approx(1.0));
    CHECK(pcc(a, c) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(pcc(Vec(10, 0.7), a), std::invalid_argument);
}

TEST_CASE("pearson correlation matches the brute-force definition") {
    std::mt19937_64 rng(3);
    Vec a = random_vec(81, rng), b = random_vec(81, rng);
    const std::size_t n = a.size();
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i] / double(n);
        mb += b[i] / double(n);
    }
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    CHECK(std::fabs(pcc(a, b) - cov / std::sqrt(va * vb)) < 1e-12);

    // fixed derangement of a map compared against the same brute force
    Vec p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = a[(i + 1) % n];
    double covp = 0, vp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        covp += (a[i] - ma) * (p[i] - ma);
        vp += (p[i] - ma) * (p[i] - ma);
    }
    CHECK(std::fabs(pcc(a, p) - covp / std::sqrt(va * vp)) < 1e-12);
}

TEST_CASE("ssim is one on identical grids") {
    std::mt19937_64 rng(4);
    Vec a = random_vec(28 * 28, rng);
    CHECK(ssim(a, a, 28, 28, 7, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant patches reduce ssim to the luminance term") {
    const double L = 0.5;
    Vec a(49, 0.0), b(49, L);
    const double c1 = 0.01 * L * 0.01 * L;
    // mu_a = 0, mu_b = L, zero variances: (0 + c1)/(L^2 + c1) * 1
    CHECK(ssim(a, b, 7, 7, 7, L) == doctest::Approx(c1 / (L * L + c1)).epsilon(1e-12));
}

TEST_CASE("ssim matches an independent sliding-window reimplementation") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        Vec a = random_vec(20 * 15, rng), b = random_vec(20 * 15, rng);
        CHECK(std::fabs(ssim(a, b, 20, 15, 7, 1.0) -
                        ssim_reference(a, b, 20, 15, 7, 1.0)) < 1e-10);
    }
}

TEST_CASE("ssim rejects oversized windows") {
    Vec a(16, 0.5), b(16, 0.25);
    CHECK_THROWS_AS(ssim(a, b, 4, 4, 7, 1.0), std::invalid_argument);
}

TEST_CASE("all metrics are symmetric") {
    std::mt19937_64 rng(6);
    Vec a = random_vec(100, rng), b = random_vec(100, rng);
    CHECK(std::fabs(mse(a, b) - mse(b, a)) < 1e-12);
    CHECK(std::fabs(pcc(a, b) - pcc(b, a)) < 1e-12);
    CHECK(std::fabs(ssim(a, b, 10, 10, 7, 1.0) - ssim(b, a, 10, 10, 7, 1.0)) < 1e-12);
}

TEST_CASE("mse satisfies the squared-norm triangle bound") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Vec a = random_vec(30, rng), b = random_vec(30, rng), c = random_vec(30, rng);
        CHECK(mse(a, c) <= 2.0 * (mse(a, b) + mse(b, c)) + 1e-15);
    }
}

TEST_CASE("identical images report perfect similarity") {
    std::mt19937_64 rng(8);
    Vec x = random_vec(28 * 28, rng);
    SimilarityReport r = report(x, x, CompareKind::Image, 28, 28);
    CHECK(r.ssim == doctest::Approx(1.0));
    CHECK(r.pcc == doctest::Approx(1.0));
    CHECK(r.mse == doctest::Approx(0.0));
    CHECK_FALSE(r.negative_correlation);
    CHECK(r.ssim_window == 7);
    CHECK(r.ssim_data_range == doctest::Approx(1.0));
}

TEST_CASE("image reports demand values in the unit interval") {
    Vec good(64, 0.5), bad(64, 0.5);
    good[0] = 0.1;
    bad[3] = 1.5;
    CHECK_THROWS_AS(report(good, bad, CompareKind::Image, 8, 8), std::invalid_argument);
}

TEST_CASE("map reports sum-normalize before comparing") {
    std::mt19937_64 rng(9);
    Vec a = random_vec(64, rng, 0.1, 1.0);
    Vec a4 = a;
    for (double& v : a4) v *= 4.0;  // same map at a different overall scale
    Vec b = random_vec(64, rng, 0.1, 1.0);
    SimilarityReport r1 = report(a, b, CompareKind::Map, 8, 8);
    SimilarityReport r2 = report(a4, b, CompareKind::Map, 8, 8);
    CHECK(r1.pcc == doctest::Approx(r2.pcc).epsilon(1e-12));
    CHECK(r1.mse == doctest::Approx(r2.mse).epsilon(1e-12));
    CHECK(r1.ssim == doctest::Approx(r2.ssim).epsilon(1e-9));
}

TEST_CASE("anti-correlated maps are flagged, not clamped") {
    Vec a(64), b(64);
    for (std::size_t i = 0; i < 64; ++i) {
        a[i] = (i % 2 == 0) ? 1.0 : 0.0;
        b[i] = (i % 2 == 0) ? 0.0 : 1.0;
    }
    SimilarityReport r = report(a, b, CompareKind::Map, 8, 8);
    CHECK(r.pcc == doctest::Approx(-1.0));
    CHECK(r.negative_correlation);
    const std::string json = r.to_json();
    CHECK(json.find("ssim_window") != std::string::npos);
    CHECK(json.find("negative_correlation") != std::string::npos);
}
