#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "tdlab/kernels.hpp"
#include "tdlab/rng.hpp"

using namespace tdlab;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 3.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

// lengths straddling the SIMD width and its remainder paths
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 100, 257, 1000};

}  // namespace

TEST_CASE("scalar kernels hand values") {
  const auto& k = kernels::ops(kernels::Isa::scalar);

  double y[3] = {1.0, 2.0, 3.0};
  const double x[3] = {10.0, 20.0, 30.0};
  k.axpy(0.5, x, y, 3);
  CHECK(y[0] == 6.0);
  CHECK(y[1] == 12.0);
  CHECK(y[2] == 18.0);

  k.add(x, y, 3);
  CHECK(y[0] == 16.0);
  CHECK(y[2] == 48.0);

  k.scale(0.25, y, 3);
  CHECK(y[0] == 4.0);
  CHECK(y[1] == 8.0);

  const double a[4] = {1.0, 2.0, 3.0, 4.0};
  const double b[4] = {4.0, 3.0, 2.0, 1.0};
  CHECK(k.dot(a, b, 4) == 20.0);
  CHECK(k.sum_sq(a, 4) == 30.0);
  CHECK(k.sq_dist(a, b, 4) == 9.0 + 1.0 + 1.0 + 9.0);

  const double r_in[5] = {-1.5, 0.0, 2.5, -0.0, 7.0};
  double r_out[5];
  k.relu(r_in, r_out, 5);
  CHECK(r_out[0] == 0.0);
  CHECK(r_out[1] == 0.0);
  CHECK(r_out[2] == 2.5);
  CHECK(r_out[3] == 0.0);
  CHECK(r_out[4] == 7.0);
}

TEST_CASE("scalar variant always available") {
  CHECK(kernels::available(kernels::Isa::scalar));
  CHECK_NOTHROW(kernels::ops(kernels::Isa::scalar));
  CHECK(std::string(kernels::isa_name(kernels::Isa::scalar)) == "scalar");
}

TEST_CASE("unavailable variant throws") {
  if (!kernels::available(kernels::Isa::neon)) {
    CHECK_THROWS_AS(kernels::ops(kernels::Isa::neon), std::invalid_argument);
  }
  if (!kernels::available(kernels::Isa::avx2)) {
    CHECK_THROWS_AS(kernels::ops(kernels::Isa::avx2), std::invalid_argument);
  }
}

TEST_CASE("force and active round-trip") {
  const auto previous = kernels::active();
  kernels::force(kernels::Isa::scalar);
  CHECK(kernels::active() == kernels::Isa::scalar);
  kernels::force(previous);
  CHECK(kernels::active() == previous);
}

TEST_CASE("simd variants match scalar reference") {
  const auto& ref = kernels::ops(kernels::Isa::scalar);
  for (auto isa : {kernels::Isa::avx2, kernels::Isa::neon}) {
    if (!kernels::available(isa)) continue;
    const auto& var = kernels::ops(isa);
    Rng rng(42);
    for (std::size_t n : kLengths) {
      auto x = random_vec(rng, n);
      auto y0 = random_vec(rng, n);
      const double a = rng.uniform(-2.0, 2.0);

      // elementwise kernels must be bit-identical
      auto y_ref = y0;
      auto y_var = y0;
      ref.axpy(a, x.data(), y_ref.data(), n);
      var.axpy(a, x.data(), y_var.data(), n);
      CHECK(std::memcmp(y_ref.data(), y_var.data(), n * sizeof(double)) == 0);

      y_ref = y0;
      y_var = y0;
      ref.add(x.data(), y_ref.data(), n);
      var.add(x.data(), y_var.data(), n);
      CHECK(std::memcmp(y_ref.data(), y_var.data(), n * sizeof(double)) == 0);

      y_ref = y0;
      y_var = y0;
      ref.scale(a, y_ref.data(), n);
      var.scale(a, y_var.data(), n);
      CHECK(std::memcmp(y_ref.data(), y_var.data(), n * sizeof(double)) == 0);

      std::vector<double> r_ref(n), r_var(n);
      ref.relu(x.data(), r_ref.data(), n);
      var.relu(x.data(), r_var.data(), n);
      CHECK(std::memcmp(r_ref.data(), r_var.data(), n * sizeof(double)) == 0);

      // reductions may reassociate; compare against a scaled tolerance
      const double tol = 1e-12 * (1.0 + static_cast<double>(n));
      CHECK(std::abs(ref.dot(x.data(), y0.data(), n) - var.dot(x.data(), y0.data(), n)) <= tol * 10.0);
      CHECK(std::abs(ref.sum_sq(x.data(), n) - var.sum_sq(x.data(), n)) <= tol * 10.0);
      CHECK(std::abs(ref.sq_dist(x.data(), y0.data(), n) - var.sq_dist(x.data(), y0.data(), n)) <= tol * 10.0);
    }
  }
}

TEST_CASE("wrappers use the forced variant") {
  const auto previous = kernels::active();
  kernels::force(kernels::Isa::scalar);
  const double a[3] = {1.0, 2.0, 3.0};
  CHECK(kernels::sum_sq(a, 3) == 14.0);
  kernels::force(previous);
}
