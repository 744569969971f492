#include "doctest.h"

#include <cmath>

#include "core/curve.hpp"

using namespace tc;

namespace {

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

CurvePtr unit_circle_arc(double R, double sweep) {
  return std::make_shared<ArcCurve>(v3(0, 0, 0), R, v3(1, 0, 0), v3(0, 1, 0), sweep);
}

}  // namespace

TEST_CASE("segment basics") {
  SegmentCurve s(v3(0, 0, 0), v3(2, 0, 0));
  CHECK(s.length() == doctest::Approx(2.0));
  CHECK(s.position(1.0)[0] == doctest::Approx(1.0));
  CHECK(s.tangent(0.5)[0] == doctest::Approx(1.0));
  CHECK(s.curvature(1.0) == 0.0);
}

TEST_CASE("arc curvature is 1/R toward the center") {
  ArcCurve a(v3(0, 0, 0), 2.0, v3(1, 0, 0), v3(0, 1, 0), kPi);
  CHECK(a.length() == doctest::Approx(2 * kPi));
  CHECK(a.curvature(1.0) == doctest::Approx(0.5));
  Vec kv = a.curvature_vector(0.0);
  CHECK(kv[0] == doctest::Approx(-0.5));
  CHECK(std::abs(a.tangent(0.3).dot(a.curvature_vector(0.3))) < 1e-12);
}

TEST_CASE("spline reproduces a circle to tolerance") {
  std::vector<Vec> pts;
  int K = 128;
  for (int i = 0; i <= K; ++i) {
    double th = kPi * i / K;  // half circle, unit radius
    pts.push_back(v3(std::cos(th), std::sin(th), 0));
  }
  SplineCurve sp(pts);
  CHECK(sp.length() == doctest::Approx(kPi).epsilon(1e-3));
  for (double f : {0.2, 0.5, 0.8}) {
    double s = sp.length() * f;
    CHECK(sp.position(s).norm() == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(sp.curvature(s) == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("chain locates positions across parts") {
  CurvePtr a = std::make_shared<SegmentCurve>(v3(0, 0, 0), v3(1, 0, 0));
  CurvePtr b = std::make_shared<SegmentCurve>(v3(1, 0, 0), v3(1, 2, 0));
  ChainCurve chain({a, b});
  CHECK(chain.length() == doctest::Approx(3.0));
  CHECK(chain.position(0.5)[0] == doctest::Approx(0.5));
  CHECK(chain.position(2.0)[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(ChainCurve({a, std::make_shared<SegmentCurve>(v3(5, 0, 0), v3(6, 0, 0))}),
                  validation_error);
}

TEST_CASE("validate_curve clauses against the circle oracle") {
  SUBCASE("straight segment passes for any reasonable b") {
    ControlledCurve c;
    c.components = {std::make_shared<SegmentCurve>(v3(0, 0, 0), v3(10, 0, 0))};
    c.b = 1.0;
    CHECK(validate_curve(c).pass);
  }
  SUBCASE("curvature clause: circle radius R with b > R fails") {
    ControlledCurve c;
    c.components = {unit_circle_arc(1.0, kPi / 2)};
    c.b = 2.0;
    CurveVerdict v = validate_curve(c);
    CHECK_FALSE(v.pass);
    CHECK(v.clause == "curvature");
    c.b = 0.5;
    CHECK(validate_curve(c).pass);
  }
  SUBCASE("separation clause: parallel segments 5b apart fail") {
    ControlledCurve c;
    c.components = {std::make_shared<SegmentCurve>(v3(0, 0, 0), v3(10, 0, 0)),
                    std::make_shared<SegmentCurve>(v3(0, 5, 0), v3(10, 5, 0))};
    c.b = 1.0;
    CurveVerdict v = validate_curve(c);
    CHECK_FALSE(v.pass);
    CHECK(v.clause == "separation");
    c.b = 0.4;
    CHECK(validate_curve(c).pass);
  }
  SUBCASE("injectivity proxy: near-closed arc fails with zero curvature slack") {
    // sweep just short of a full circle: curvature passes at b = R but the
    // endpoints come within 0.1 R of each other
    ControlledCurve c;
    c.components = {unit_circle_arc(1.0, 2 * kPi - 0.1)};
    c.b = 1.0;
    CurveVerdict v = validate_curve(c, 800);
    CHECK_FALSE(v.pass);
    CHECK(v.clause == "injectivity");
  }
}

TEST_CASE("bend_curve") {
  SUBCASE("already straight end returns the input") {
    ControlledCurve c;
    c.components = {std::make_shared<SegmentCurve>(v3(0, 0, 0), v3(10, 0, 0))};
    c.b = 100.0;
    BendResult r = bend_curve(c, 0, true, 1.0);
    CHECK(r.unchanged);
    CHECK(r.curve.b == doctest::Approx(1e-4));
  }

  SUBCASE("circular arc end straightens with certified control") {
    double b = 2.0;
    CurvePtr arc = unit_circle_arc(2.0, kPi / 2);  // curvature 1/2 = 1/b
    ControlledCurve c;
    c.components = {arc};
    c.b = b;
    double delta = b / 40.0;
    BendResult r = bend_curve(c, 0, true, delta);
    CHECK_FALSE(r.unchanged);
    CHECK(r.curve.b == doctest::Approx(1e-6 * b));
    CHECK(r.hausdorff < delta / 100.0);
    CHECK(r.max_curvature <= 1e6 / b);
    const CurveComponent& bent = *r.curve.components[0];
    // straight inside B_{delta/2}: the first part is an exact segment
    Vec p = arc->position(0.0);
    CHECK((bent.position(0.0) - p).norm() < 1e-12);
    CHECK(bent.curvature(delta / 4) == doctest::Approx(0.0));
    // equals the input outside B_delta(p); compare from the untouched far end
    // (the bent part's arc length differs slightly from the original's)
    double Lb = bent.length(), La = arc->length();
    for (double t : {0.0, 0.5, 1.0, La - 2 * delta}) {
      CHECK((bent.position(Lb - t) - arc->position(La - t)).norm() < 1e-12);
    }
    // sampled displacement below delta/100
    double disp = 0;
    for (int i = 0; i <= 200; ++i) {
      double s = delta * i / 200.0;
      double best = 1e300;
      for (int j = 0; j <= 400; ++j)
        best = std::min(best, (bent.position(s) - arc->position(delta * j / 400.0)).norm());
      disp = std::max(disp, best);
    }
    CHECK(disp < delta / 100.0);
  }

  SUBCASE("end selection works at the far endpoint") {
    double b = 2.0;
    CurvePtr arc = unit_circle_arc(2.0, kPi / 2);
    ControlledCurve c;
    c.components = {arc};
    c.b = b;
    double delta = b / 40.0;
    BendResult r = bend_curve(c, 0, false, delta);
    const CurveComponent& bent = *r.curve.components[0];
    CHECK((bent.start() - arc->start()).norm() < 1e-12);
    double L = bent.length();
    CHECK(bent.curvature(L - delta / 4) == doctest::Approx(0.0));
  }

  SUBCASE("oversized delta is rejected") {
    ControlledCurve c;
    c.components = {unit_circle_arc(2.0, kPi / 2)};
    c.b = 2.0;
    CHECK_THROWS_AS(bend_curve(c, 0, true, 0.5), validation_error);
  }
}

TEST_CASE("rigid transforms preserve curve geometry") {
  Mat Q(3, 3);
  double th = 0.7;
  Q << std::cos(th), -std::sin(th), 0, std::sin(th), std::cos(th), 0, 0, 0, 1;
  RigidMotion m{Q, v3(1, -2, 3)};
  CurvePtr arc = unit_circle_arc(1.5, kPi / 3);
  auto moved = arc->transformed(m);
  for (double f : {0.0, 0.3, 0.9}) {
    double s = arc->length() * f;
    CHECK((moved->position(s) - m.apply(arc->position(s))).norm() < 1e-12);
    CHECK(moved->curvature(s) == doctest::Approx(arc->curvature(s)));
  }
}
