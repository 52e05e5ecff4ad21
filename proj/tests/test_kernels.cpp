#include <doctest.h>

#include <cmath>
#include <random>

#include "qmcl/dynamics.hpp"
#include "qmcl/kernels.hpp"

using namespace qmcl;

TEST_SUITE_BEGIN("kernels");

namespace {

Eigen::MatrixXd random_points(int n, int d, unsigned seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd p(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) p(i, j) = u(rng);
  return p;
}

// Test-side brute-force kernel sum, independent of the library scan.
double oracle_kernel_sum(const Eigen::MatrixXd& pts, double eps) {
  const int n = static_cast<int>(pts.rows());
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      s += std::exp(-(pts.row(i) - pts.row(j)).squaredNorm() / (eps * eps));
  return s / (static_cast<double>(n) * n);
}

}  // namespace

TEST_CASE("gaussian_kernel values and symmetry") {
  Eigen::VectorXd a(3), b(3);
  a << 1, 2, 3;
  b << 1, 2, 3;
  CHECK(gaussian_kernel(a, b, 2.0) == 1.0);

  b << 1, 2, 3 + 2.0;  // distance equals bandwidth
  CHECK(gaussian_kernel(a, b, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  // sqrt(19) is a representative tuned value; plain finite sanity plus
  // symmetry and range on random pairs.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd w(3), wp(3);
    for (int j = 0; j < 3; ++j) {
      w[j] = u(rng);
      wp[j] = u(rng);
    }
    const double k1 = gaussian_kernel(w, wp, std::sqrt(19.0));
    const double k2 = gaussian_kernel(wp, w, std::sqrt(19.0));
    CHECK(k1 == k2);
    CHECK(k1 > 0.0);
    CHECK(k1 <= 1.0);
    if (k1 == 1.0) CHECK((w - wp).norm() == 0.0);
  }

  Eigen::VectorXd c(2);
  CHECK_THROWS_AS(gaussian_kernel(a, c, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_kernel(a, b, 0.0), std::invalid_argument);
}

TEST_CASE("sqrt_gaussian_kernel is the square root of the kernel") {
  Eigen::VectorXd a(2), b(2);
  a << 0, 0;
  b << 0, 0;
  CHECK(sqrt_gaussian_kernel(a, b, 1.5) == 1.0);

  b << 1.5, 0;  // distance equals bandwidth
  CHECK(sqrt_gaussian_kernel(a, b, 1.5) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-15));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd w(4), wp(4);
    for (int j = 0; j < 4; ++j) {
      w[j] = u(rng);
      wp[j] = u(rng);
    }
    const double s = sqrt_gaussian_kernel(w, wp, 1.3);
    CHECK(std::abs(s * s - gaussian_kernel(w, wp, 1.3)) < 1e-14);
  }
}

TEST_CASE("delay_embed windowing") {
  SUBCASE("Q = 0 is the identity") {
    Eigen::MatrixXd s = random_points(7, 2, 3);
    DelayEmbedding e = delay_embed(s, DelayConfig{0});
    CHECK(e.points == s);
    for (int i = 0; i < 7; ++i) CHECK(e.center_index[i] == i);
  }

  SUBCASE("five scalars, Q = 2") {
    Eigen::MatrixXd s(5, 1);
    s << 10, 11, 12, 13, 14;
    DelayEmbedding e = delay_embed(s, DelayConfig{2});
    REQUIRE(e.points.rows() == 3);
    REQUIRE(e.points.cols() == 3);
    Eigen::MatrixXd expect(3, 3);
    expect << 10, 11, 12, 11, 12, 13, 12, 13, 14;
    CHECK(e.points == expect);
    CHECK(e.center_index[0] == 1);
    CHECK(e.center_index[2] == 3);
  }

  SUBCASE("length and de-windowing on the partial-data configuration") {
    const int n = 60, q = 10;
    Eigen::MatrixXd s = random_points(n, 1, 4);
    DelayEmbedding e = delay_embed(s, DelayConfig{q});
    REQUIRE(e.points.rows() == n - q);
    REQUIRE(e.points.cols() == q + 1);
    // The center column of each window recovers the interior series.
    for (int i = 0; i < n - q; ++i)
      CHECK(e.points(i, q / 2) == s(e.center_index[i], 0));
  }

  SUBCASE("errors") {
    Eigen::MatrixXd s = random_points(4, 1, 5);
    CHECK_THROWS_AS(delay_embed(s, DelayConfig{4}), std::invalid_argument);
    CHECK_THROWS_AS(delay_embed(s, DelayConfig{1}), std::invalid_argument);
    CHECK_THROWS_AS(delay_embed(s, DelayConfig{-2}), std::invalid_argument);
  }
}

TEST_CASE("tune_bandwidth degenerate input") {
  Eigen::MatrixXd s(2, 2);
  s << 1, 2, 1, 2;
  CHECK_THROWS_AS(tune_bandwidth(s, {0.5, 1.0, 2.0}), std::runtime_error);
}

TEST_CASE("tune_bandwidth recovers dimension one on a line") {
  const int n = 400;
  Eigen::MatrixXd s(n, 3);
  for (int i = 0; i < n; ++i) {
    s(i, 0) = 0.01 * i;
    s(i, 1) = 0.0;
    s(i, 2) = 0.0;
  }
  auto grid = default_bandwidth_grid(s);
  BandwidthScan scan = tune_bandwidth_scan(s, grid);
  const double best = scan.candidates[scan.best_index];

  // Oracle: locate the peak of d(eps) from an independent S(eps) curve;
  // the slope is taken against the squared bandwidth.
  std::vector<double> S(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) S[c] = oracle_kernel_sum(s, grid[c]);
  double peak = 0.0;
  int peak_idx = -1;
  for (std::size_t c = 1; c + 1 < grid.size(); ++c) {
    const double d = (std::log(S[c + 1]) - std::log(S[c - 1])) /
                     (std::log(grid[c + 1]) - std::log(grid[c - 1]));
    if (d > peak) {
      peak = d;
      peak_idx = static_cast<int>(c);
    }
  }
  CHECK(peak == doctest::Approx(1.0).epsilon(0.3));
  CHECK(scan.best_index == peak_idx);
  CHECK(best > 0.01);          // above the sample spacing
  CHECK(best < 0.01 * n);      // below the diameter
}

TEST_CASE("kernel sum is nondecreasing in the bandwidth") {
  Eigen::MatrixXd s = random_points(120, 2, 9);
  auto grid = default_bandwidth_grid(s, 32);
  BandwidthScan scan = tune_bandwidth_scan(s, grid);
  for (std::size_t c = 1; c < scan.kernel_sum.size(); ++c)
    CHECK(scan.kernel_sum[c] >= scan.kernel_sum[c - 1]);
  // Cross-check S against the independent oracle at a few candidates.
  for (std::size_t c = 0; c < grid.size(); c += 11)
    CHECK(scan.kernel_sum[c] ==
          doctest::Approx(oracle_kernel_sum(s, grid[c])).epsilon(1e-12));
}

TEST_CASE("assemble_sparse_kernel dense limit and symmetry") {
  Eigen::MatrixXd s = random_points(40, 2, 10);
  KernelConfig cfg{0.8};

  SUBCASE("k_nn = N matches brute force") {
    SparseKernelMatrix k = assemble_sparse_kernel(s, cfg, 40);
    Eigen::MatrixXd d = k.dense();
    for (int i = 0; i < 40; ++i)
      for (int j = 0; j < 40; ++j)
        CHECK(d(i, j) == gaussian_kernel(s.row(i), s.row(j), cfg.bandwidth));
  }

  SUBCASE("k_nn > N clamps") {
    SparseKernelMatrix k = assemble_sparse_kernel(s, cfg, 1000);
    CHECK(k.k_nn == 40);
    CHECK(k.nnz() == 40 * 40);
  }

  SUBCASE("union symmetrization is exact, diagonal kept, entries in (0,1]") {
    SparseKernelMatrix k = assemble_sparse_kernel(s, cfg, 5);
    Eigen::MatrixXd d = k.dense();
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 40; ++i) CHECK(d(i, i) == 1.0);
    for (std::int64_t p = 0; p < k.nnz(); ++p) {
      CHECK(k.val[p] > 0.0);
      CHECK(k.val[p] <= 1.0);
    }
  }

  SUBCASE("underflowed far-pair values are dropped, not stored as zeros") {
    // A tiny bandwidth drives most kernel values to exact zero.
    SparseKernelMatrix k = assemble_sparse_kernel(s, KernelConfig{1e-3}, 10);
    for (std::int64_t p = 0; p < k.nnz(); ++p) CHECK(k.val[p] > 0.0);
    Eigen::MatrixXd d = k.dense();
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 40; ++i) CHECK(d(i, i) == 1.0);
  }

  SUBCASE("multiply agrees with dense product") {
    SparseKernelMatrix k = assemble_sparse_kernel(s, cfg, 7);
    Eigen::VectorXd v = random_points(40, 1, 11).col(0);
    Eigen::VectorXd a = k.multiply(v);
    Eigen::VectorXd b = k.dense() * v;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("default_k_nn rule") {
  CHECK(default_k_nn(100) == 100);
  CHECK(default_k_nn(1000) == 1000);
  CHECK(default_k_nn(5000) == 1000);
  CHECK(default_k_nn(20000) == 2000);
  CHECK(default_k_nn(150000) == 15000);
}

TEST_SUITE_END();
