#include "doctest.h"

#include <cmath>

#include "core/profile.hpp"

using namespace tc;

namespace {

ProfileFunction make_sphere() {
  return ProfileFunction::single("sphere", -1.0, 1.0, std::make_unique<CirclePiece>(0.0, 1.0));
}

}  // namespace

TEST_CASE("circle piece jets and P") {
  ProfileFunction u = make_sphere();
  Jet2 j = u.jet(0.0);
  CHECK(j.v == doctest::Approx(1.0));
  CHECK(j.d1 == doctest::Approx(0.0));
  CHECK(j.d2 == doctest::Approx(-1.0));
  // Sphere satisfies P = 2/(1-x^2) (positive, blowing up at the poles).
  CHECK(u.P(0.0) == doctest::Approx(2.0));
  CHECK(u.P(0.6) == doctest::Approx(2.0 / (1.0 - 0.36)));
}

TEST_CASE("poly piece triple Horner") {
  // p(t) = 2 - 3(t-1) + 0.5(t-1)^2 + (t-1)^3
  PolyPiece p(1.0, {2.0, -3.0, 0.5, 1.0});
  Jet2 j = p.jet(1.5);
  CHECK(j.v == doctest::Approx(2 - 1.5 + 0.125 + 0.125));
  CHECK(j.d1 == doctest::Approx(-3 + 0.5 + 3 * 0.25));
  CHECK(j.d2 == doctest::Approx(1.0 + 6 * 0.5));
  auto tay = p.taylor(1.5, 3);
  REQUIRE(tay.has_value());
  CHECK((*tay)[0] == doctest::Approx(j.v));
  CHECK((*tay)[1] == doctest::Approx(j.d1));
  CHECK((*tay)[2] == doctest::Approx(j.d2 / 2));
  CHECK((*tay)[3] == doctest::Approx(1.0));
}

TEST_CASE("circle taylor recurrence agrees with derivatives") {
  CirclePiece c(0.0, 1.0);
  auto tay = c.taylor(0.3, 6);
  REQUIRE(tay.has_value());
  Jet2 j = c.jet(0.3);
  CHECK((*tay)[0] == doctest::Approx(j.v).epsilon(1e-12));
  CHECK((*tay)[1] == doctest::Approx(j.d1).epsilon(1e-12));
  CHECK((*tay)[2] == doctest::Approx(j.d2 / 2).epsilon(1e-12));
  // third derivative of sqrt(1-x^2): -3x/(1-x^2)^{5/2}
  double x = 0.3;
  double d3 = -3 * x / std::pow(1 - x * x, 2.5);
  CHECK((*tay)[3] == doctest::Approx(d3 / 6).epsilon(1e-10));
}

TEST_CASE("profile tails") {
  ProfileFunction u = make_sphere();
  CHECK_THROWS_AS(u.eval(1.5), validation_error);
  u.set_tails(ProfileFunction::Tail::kConstant, ProfileFunction::Tail::kError);
  CHECK(u.eval(-2.0) == doctest::Approx(u.eval(-1.0)));
  CHECK_THROWS_AS(u.eval(1.5), validation_error);
}

TEST_CASE("defect report grid includes breakpoints and brackets extrema") {
  ProfileFunction u;
  u.set_label("two_pieces");
  u.append(-1.0, 0.0, std::make_unique<ConstantPiece>(0.5));
  u.append(0.0, 1.0, std::make_unique<PolyPiece>(0.0, std::vector<double>{0.5, 0.0, 1.0}));
  DefectReport r = u.defect_report("P", -1.0, 1.0, 1e-3);
  // P = 1 on the constant piece; P = 1 + 4x^2 - (0.5 + x^2) 2 on the parabola
  CHECK(r.min_value <= 1.0);
  CHECK(r.min_value > -1e30);
  CHECK(r.grid_size > 2000);
  CHECK(r.min_value <= r.max_value);
}

TEST_CASE("derivative consistency for piecewise profiles") {
  ProfileFunction u = make_sphere();
  CHECK(u.derivative_consistency_error(-0.9, 0.9) < 1e-6);
}

TEST_CASE("scaled profile is the geometric dilation") {
  ProfileFunction u = make_sphere();
  ProfileFunction v = u.scaled(2.5);
  CHECK(v.eval(0.0) == doctest::Approx(2.5));
  CHECK(v.eval(1.25) == doctest::Approx(2.5 * std::sqrt(1 - 0.25)));
  CHECK(v.domain_lo() == doctest::Approx(-2.5));
  // curvature halves... d2 scales by 1/s
  CHECK(v.jet(0.0).d2 == doctest::Approx(-1.0 / 2.5));
}

TEST_CASE("lin_comb evaluates the pointwise combination") {
  ProfileFunction u = make_sphere();
  ProfileFunction c;
  c.append(-1.0, 1.0, std::make_unique<ConstantPiece>(1.0));
  ProfileFunction w = ProfileFunction::lin_comb(0.25, u, 0.75, c, "mix");
  CHECK(w.eval(0.0) == doctest::Approx(1.0));
  CHECK(w.eval(0.5) == doctest::Approx(0.25 * std::sqrt(0.75) + 0.75));
  CHECK(w.jet(0.5).d1 == doctest::Approx(0.25 * u.jet(0.5).d1));
}
