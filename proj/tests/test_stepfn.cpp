#include "doctest.h"

#include <cmath>

#include "core/stepfn.hpp"

using namespace tc;

TEST_CASE("chi boundary values and support") {
  CHECK(chi(-0.5) == 0.0);
  CHECK(chi(0.0) == 0.0);
  CHECK(chi(1.0) == 1.0);
  CHECK(chi(2.0) == 1.0);
  CHECK(chi(0.5) == doctest::Approx(0.5));
  CHECK(chi(1e-9) == 0.0);  // far tail underflows to the exact value
  CHECK(chi(0.3) > 0.0);
  CHECK(chi(0.3) < 1.0);
}

TEST_CASE("chi certified derivative bounds") {
  const StepBounds& b = chi_certified_bounds();
  CHECK(b.max_abs_d1 <= 10.0);
  CHECK(b.max_abs_d2 <= 100.0);
  CHECK(b.max_abs_d1 > 1.0);  // the step is not degenerate
}

TEST_CASE("chi jet matches finite differences") {
  double h = 1e-6;
  for (double t : {0.12, 0.3, 0.5, 0.77, 0.9}) {
    StepJet j = chi_jet(t);
    double fd1 = (chi(t + h) - chi(t - h)) / (2 * h);
    double fd2 = (chi_d1(t + h) - chi_d1(t - h)) / (2 * h);
    CHECK(j.d1 == doctest::Approx(fd1).epsilon(1e-6));
    CHECK(j.d2 == doctest::Approx(fd2).epsilon(1e-6));
  }
}

TEST_CASE("chi_eps scaling and domain error") {
  CHECK(chi_eps(-0.5, 1.0) == 0.0);
  CHECK(chi_eps(2.0, 1.0) == 1.0);
  CHECK(chi_eps(0.05, 0.1) == doctest::Approx(chi(0.5)));
  CHECK_THROWS_AS(chi_eps(0.5, 0.0), validation_error);
  CHECK_THROWS_AS(chi_eps(0.5, -1.0), validation_error);
}

TEST_CASE("chi_eps derivative bound scales like 10/eps") {
  double eps = 0.1;
  double worst = 0;
  for (int i = 0; i <= 2000; ++i) {
    double t = -0.05 + 0.2 * i / 2000.0;
    worst = std::max(worst, std::abs(chi_eps_jet(t, eps).d1));
  }
  CHECK(worst <= 10.0 / eps);
  CHECK(worst > 0.5 / eps);
}
