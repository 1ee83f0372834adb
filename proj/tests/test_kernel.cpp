#include <doctest.h>

#include <cmath>

#include "dealer/errors.hpp"
#include "dealer/kernel.hpp"
#include "dealer/quadrature.hpp"

using namespace dealer;

TEST_CASE("feedback rate reference values") {
  const MeshRate d(50.0);
  CHECK(feedback_rate(d, 1.0, 1.0) == 0.0);
  CHECK(feedback_rate(d, 0.0, 1.0) == doctest::Approx(7.071058).epsilon(1e-7));
  CHECK(feedback_rate(d, 0.0, 1.0) == doctest::Approx(std::sqrt(50.0) * std::tanh(std::sqrt(50.0))).epsilon(1e-15));

  // small rate: F = D (T - t) to leading order
  const MeshRate tiny(1e-6);
  CHECK(feedback_rate(tiny, 0.25, 1.0) == doctest::Approx(0.75e-6).epsilon(1e-6));
}

TEST_CASE("mesh rate caches its square root") {
  for (double v : {1e-8, 0.3, 50.0, 1e8}) {
    const MeshRate d(v);
    CHECK(d.sqrt() * d.sqrt() == doctest::Approx(v).epsilon(1e-15));
  }
  CHECK_THROWS_AS(MeshRate(0.0), DomainError);
  CHECK_THROWS_AS(MeshRate(-1.0), DomainError);
  CHECK_THROWS_AS(MeshRate(std::nan("")), DomainError);
}

TEST_CASE("transfer kernel values and overflow safety") {
  const MeshRate d(100.0);
  CHECK(transfer_kernel(d, 0.3, 0.3, 1.0) == 100.0);
  CHECK(transfer_kernel(d, 0.0, 1.0, 1.0) == doctest::Approx(100.0 / std::cosh(10.0)).epsilon(1e-13));

  // rescaled form agrees with the naive one where the latter is representable
  const MeshRate small(2.5);
  const double a = small.sqrt();
  for (double s : {0.0, 0.2, 0.7, 1.0}) {
    const double naive = 2.5 * std::cosh(a * (1.0 - s)) / std::cosh(a);
    CHECK(transfer_kernel(small, 0.0, s, 1.0) == doctest::Approx(naive).epsilon(1e-14));
  }

  const MeshRate huge(1e8);
  const double k = transfer_kernel(huge, 0.0, 0.5, 1.0);
  CHECK(std::isfinite(k));
  CHECK(k >= 0.0);
  CHECK(std::isfinite(feedback_rate(huge, 0.0, 1.0)));
  CHECK(feedback_rate(huge, 0.0, 1.0) == doctest::Approx(1e4));
}

TEST_CASE("kernel integral equals the feedback rate") {
  for (double dv : {3.7, 50.0, 0.01}) {
    const MeshRate d(dv);
    for (double t : {0.0, 0.4, 0.9}) {
      const double q = simpson([&](double s) { return transfer_kernel(d, t, s, 1.0); }, t, 1.0, 10000);
      CHECK(q == doctest::Approx(feedback_rate(d, t, 1.0)).epsilon(1e-10));
      CHECK(kernel_integral(d, t, 1.0) == feedback_rate(d, t, 1.0));
    }
  }
  CHECK(kernel_integral(MeshRate(3.7), 1.0, 1.0) == 0.0);
}

TEST_CASE("kernel positivity and monotone feedback") {
  const MeshRate d(20.0);
  double prev = feedback_rate(d, 0.0, 2.0);
  for (int i = 1; i <= 200; ++i) {
    const double t = 2.0 * i / 200.0;
    const double f = feedback_rate(d, t, 2.0);
    CHECK(f <= prev);
    prev = f;
    for (int j = i; j <= 200; j += 17) CHECK(transfer_kernel(d, t, 2.0 * j / 200.0, 2.0) > 0.0);
  }
  CHECK(prev == 0.0);
}

TEST_CASE("time arguments outside the horizon are rejected") {
  const MeshRate d(1.0);
  CHECK_THROWS_AS(feedback_rate(d, -0.1, 1.0), DomainError);
  CHECK_THROWS_AS(feedback_rate(d, 1.1, 1.0), DomainError);
  CHECK_THROWS_AS(transfer_kernel(d, 0.5, 0.4, 1.0), DomainError);
}

TEST_CASE("mesh rate from elasticities") {
  CHECK(mesh_rate(0.1, Elasticity(10.0), 10.0).value() == doctest::Approx(50.0).epsilon(1e-15));
  CHECK(mesh_rate(0.1, Elasticity::infinite(), 10.0).value() == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(mesh_rate(0.1, Elasticity(10.0), INFINITY).value() == doctest::Approx(100.0).epsilon(1e-15));
  CHECK_THROWS(mesh_rate(0.1, Elasticity(10.0), 0.0));
  CHECK_THROWS(mesh_rate(0.0, Elasticity(10.0), 1.0));
}

TEST_CASE("hyperbolic ratios stay finite") {
  using namespace hyperbolic;
  CHECK(cosh_ratio(1.0, 0.5, 1.0) == doctest::Approx(std::cosh(0.5) / std::cosh(1.0)).epsilon(1e-15));
  CHECK(sinh_cosh_ratio(1.0, 0.5, 1.0) == doctest::Approx(std::sinh(0.5) / std::cosh(1.0)).epsilon(1e-14));
  CHECK(sech(2.0, 0.3) == doctest::Approx(1.0 / std::cosh(0.6)).epsilon(1e-15));
  CHECK(std::isfinite(cosh_ratio(1e4, 500.0, 1000.0)));
  CHECK(cosh_ratio(1e4, 500.0, 1000.0) == 0.0);
  CHECK(sech(1e4, 1000.0) == 0.0);
}

TEST_CASE("quadrature helpers") {
  CHECK(simpson([](double x) { return x * x * x; }, 0.0, 2.0, 2) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(simpson_layered([](double x) { return std::exp(-50.0 * x); }, 0.0, 1.0, 0.1, 512) ==
        doctest::Approx((1.0 - std::exp(-50.0)) / 50.0).epsilon(1e-9));
  std::vector<double> v(1001);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1;
  CHECK(pairwise_sum(v) == doctest::Approx(100.1).epsilon(1e-14));
  const std::vector<double> t{0.0, 0.5, 2.0}, y{1.0, 3.0, 3.0};
  CHECK(trapezoid(t, y) == doctest::Approx(5.5));
}
