#include "doctest.h"

#include <cmath>
#include <set>

#include "core/scene.hpp"

using namespace tc;

namespace {

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

ControlParams dumbbell_params() {
  ControlParams p;
  p.n = 2;
  p.alpha = 0.5;
  p.beta = 0.3;
  p.c_H = 1.0;
  p.C_A = 2.2;
  p.D_A = 10.0;
  return p;
}

Configuration dumbbell(double b = 1e6) {
  Configuration cfg;
  cfg.marbles = {{v3(0, 0, 0), 1.0}, {v3(10, 0, 0), 1.0}};
  cfg.curve.b = b;
  cfg.curve.components = {std::make_shared<SegmentCurve>(v3(1, 0, 0), v3(9, 0, 0))};
  cfg.attachments = {{Attachment{0}, Attachment{1}}};
  cfg.params = dumbbell_params();
  return cfg;
}

}  // namespace

TEST_CASE("validate_configuration") {
  SUBCASE("straight dumbbell passes") {
    Configuration cfg = dumbbell(0.05);
    ConfigVerdict v = validate_configuration(cfg);
    CHECK(v.pass);
  }
  SUBCASE("five-degree contact fails orthogonality") {
    Configuration cfg = dumbbell(0.05);
    double a = 5.0 * kPi / 180.0;
    Vec p = v3(1, 0, 0);
    Vec dir = v3(std::cos(a), std::sin(a), 0);
    cfg.curve.components = {std::make_shared<SegmentCurve>(p, Vec(p + 8.0 * dir))};
    cfg.attachments = {{Attachment{0}, Attachment{-1}}};
    // keep the loose end legal so the orthogonality clause is what trips
    ConfigVerdict v = validate_configuration(cfg);
    CHECK_FALSE(v.pass);
    CHECK(v.clause == "orthogonality");
  }
  SUBCASE("loose end too close to a marble") {
    double b = 0.05;
    Configuration cfg = dumbbell(b);
    Vec p0 = v3(1 + 3 * b, 0, 0);
    cfg.curve.components = {std::make_shared<SegmentCurve>(p0, v3(9, 0, 0))};
    cfg.attachments = {{Attachment{-1}, Attachment{-1}}};
    ConfigVerdict v = validate_configuration(cfg);
    CHECK_FALSE(v.pass);
    CHECK(v.clause == "loose endpoint clearance");
  }
  SUBCASE("curve entering a marble fails") {
    Configuration cfg = dumbbell(0.05);
    cfg.curve.components = {std::make_shared<SegmentCurve>(v3(-1, 0, 0), v3(9, 0, 0))};
    cfg.attachments = {{Attachment{0}, Attachment{1}}};
    ConfigVerdict v = validate_configuration(cfg);
    CHECK_FALSE(v.pass);
  }
}

TEST_CASE("glue thresholds") {
  ControlParams p = dumbbell_params();
  double r_bar = glue_r_bar(p, 1e6);
  CHECK(r_bar > 0.05);
  CHECK(r_bar < 0.11);
  // delta(r) strictly increasing with delta(r) -> 0
  double prev = 0;
  for (double r : {1e-4, 1e-3, 1e-2, 0.05}) {
    double d = glue_delta_of_r(p, r);
    CHECK(d > prev);
    prev = d;
  }
  CHECK(glue_delta_of_r(p, 1e-9) < 1e-2);
}

TEST_CASE("glue: empty curve yields marbles only") {
  Configuration cfg = dumbbell();
  cfg.curve.components.clear();
  cfg.attachments.clear();
  GlueResult g = glue(cfg, 0.05);
  CHECK(g.domain.patches().size() == 2);
  for (const auto& p : g.domain.patches()) CHECK(p->kind() == "sphere");
}

TEST_CASE("glue: dumbbell") {
  Configuration cfg = dumbbell();
  GlueResult g = glue(cfg, 0.05);

  SUBCASE("patch multiset: two sphere caps, two collars, one straight tube") {
    std::multiset<std::string> kinds;
    int collars = 0, caps = 0;
    for (const auto& p : g.domain.patches()) {
      kinds.insert(p->kind());
      if (auto* rp = dynamic_cast<const RevolutionPatch*>(p.get())) {
        if (rp->profile()->label() == "collar") collars++;
        if (rp->profile()->label().rfind("cap_r", 0) == 0) caps++;
      }
    }
    CHECK(kinds.count("sphere") == 2);
    CHECK(kinds.count("revolution") == 2);
    CHECK(kinds.count("tube") == 1);
    CHECK(collars == 2);
    CHECK(caps == 0);
  }

  SUBCASE("collar scale is rho^{-1}(r/R)") {
    REQUIRE(g.info.collars.size() == 2);
    for (const auto& c : g.info.collars)
      CHECK(c.delta == doctest::Approx(delta_of_rho(0.05)).epsilon(1e-12));
  }

  SUBCASE("full certificate: beta-uniform and embedded") {
    CHECK(g.info.report.verdict.kind == CurvatureVerdict::kBetaUniform);
    CHECK(g.info.report.min_S > 0);
    CHECK(g.info.report.min_S_over_H >= cfg.params.beta);
    CHECK(g.domain.check_embedded().pass);
  }

  SUBCASE("adjacent patches match to 1e-8") {
    CHECK(g.domain.adjacency_defect() < 1e-8);
  }

  SUBCASE("solid membership") {
    CHECK(g.domain.contains(v3(0, 0, 0)));
    CHECK(g.domain.contains(v3(5, 0, 0.04)));              // inside the tube
    CHECK_FALSE(g.domain.contains(v3(5, 0, 0.06)));        // just outside the tube
    CHECK_FALSE(g.domain.contains(v3(1.001, 0.5, 0)));     // beside the neck
    // at the collar neck: just inside the waist is in, three waists out is not
    CdeltaResult cd = build_Cdelta_profile(g.info.collars[0].delta);
    double x_neck = cd.t_star + cd.t_min;
    CHECK(g.domain.contains(v3(x_neck, 0.9 * cd.rho, 0)));
    CHECK_FALSE(g.domain.contains(v3(x_neck, 3.0 * cd.rho, 0)));
  }
}

TEST_CASE("glue: capped loose string carries exactly one cap") {
  Configuration cfg;
  cfg.marbles = {{v3(0, 0, 0), 1.0}};
  double b = 1e3;
  cfg.curve.b = b;
  double len = 10 * b + 1;
  cfg.curve.components = {std::make_shared<SegmentCurve>(v3(1, 0, 0), v3(1 + len, 0, 0))};
  cfg.attachments = {{Attachment{0}, Attachment{-1}}};
  cfg.params = dumbbell_params();
  double r = 5e-5;
  GlueResult g = glue(cfg, r);
  int caps = 0, collars = 0;
  for (const auto& p : g.domain.patches()) {
    if (auto* rp = dynamic_cast<const RevolutionPatch*>(p.get())) {
      if (rp->profile()->label().rfind("cap_r", 0) == 0) caps++;
      if (rp->profile()->label() == "collar") collars++;
    }
  }
  CHECK(caps == 1);
  CHECK(collars == 1);
  CHECK(g.info.report.verdict.kind == CurvatureVerdict::kBetaUniform);
}

TEST_CASE("glue locality: far-side changes keep near patches bit-identical") {
  Configuration a = dumbbell();
  Configuration b = dumbbell();
  b.marbles[1].radius = 0.8;  // change the far marble
  b.curve.components = {std::make_shared<SegmentCurve>(v3(1, 0, 0), Vec(v3(10, 0, 0) - v3(0.8, 0, 0)))};
  GlueResult ga = glue(a, 0.05);
  GlueResult gb = glue(b, 0.05);
  // the collar at the near contact (component 0, at_start) must be identical
  auto near_collar = [](const GlueResult& g) -> const RevolutionPatch* {
    for (const auto& p : g.domain.patches())
      if (auto* rp = dynamic_cast<const RevolutionPatch*>(p.get()))
        if (rp->profile()->label() == "collar" && rp->origin().norm() < 1e-12) return rp;
    return nullptr;
  };
  const RevolutionPatch* ca = near_collar(ga);
  const RevolutionPatch* cb = near_collar(gb);
  REQUIRE(ca != nullptr);
  REQUIRE(cb != nullptr);
  CHECK(ca->x0() == cb->x0());
  CHECK(ca->x1() == cb->x1());
  CHECK((ca->axis() - cb->axis()).norm() == 0.0);
  for (int i = 0; i <= 32; ++i) {
    double x = ca->x0() + (ca->x1() - ca->x0()) * i / 32.0;
    CHECK(ca->profile()->eval(x) == cb->profile()->eval(x));
  }
}

TEST_CASE("glue equivariance under rigid motions") {
  Configuration cfg = dumbbell();
  GlueResult g = glue(cfg, 0.05);

  double th = 0.83;
  Mat Q(3, 3);
  Q << std::cos(th), -std::sin(th), 0, std::sin(th), std::cos(th), 0, 0, 0, 1;
  RigidMotion m{Q, v3(0.3, -1.2, 2.0)};

  Configuration moved = cfg;
  moved.marbles[0].center = m.apply(cfg.marbles[0].center);
  moved.marbles[1].center = m.apply(cfg.marbles[1].center);
  moved.curve.components = {cfg.curve.components[0]->transformed(m)};
  GlueResult gm = glue(moved, 0.05);
  GluedDomain expected = g.domain.transformed(m);

  REQUIRE(gm.domain.patches().size() == expected.patches().size());
  for (std::size_t i = 0; i < gm.domain.patches().size(); ++i) {
    const Patch& pa = *gm.domain.patches()[i];
    const Patch& pb = *expected.patches()[i];
    CHECK(pa.kind() == pb.kind());
    Vec ca, cb;
    double ra, rb;
    pa.bounding_sphere(ca, ra);
    pb.bounding_sphere(cb, rb);
    CHECK((ca - cb).norm() < 1e-9);
    CHECK(std::abs(ra - rb) < 1e-9);
  }
}

TEST_CASE("capped_tube") {
  ControlParams p = dumbbell_params();
  SUBCASE("straight axis: revolution of the scaled cap profile") {
    ControlledCurve c;
    c.b = 10.0;
    c.components = {std::make_shared<SegmentCurve>(v3(0, 0, 0), v3(5, 0, 0))};
    double r = 0.2;
    CappedTubeResult res = capped_tube(c, 0, 5.0, r, true, p);
    CHECK((res.tip - v3(5, 0, 0)).norm() < 1e-12);
    CHECK(res.report.verdict.kind == CurvatureVerdict::kBetaUniform);
    // the surface at the cylinder end has ring radius r
    bool found_tube = false;
    for (const auto& patch : res.domain.patches())
      if (patch->kind() == "tube") found_tube = true;
    CHECK(found_tube);
  }
  SUBCASE("arc spine of curvature 1/b at r = zeta b / 2") {
    double b = 1.0;
    double zeta = zeta_threshold(p);
    double r = zeta * b / 2;
    ControlledCurve c;
    c.b = b;
    c.components = {std::make_shared<ArcCurve>(v3(0, 0, 0), b, v3(1, 0, 0), v3(0, 1, 0), 2.0)};
    CappedTubeResult res = capped_tube(c, 0, c.components[0]->length(), r, true, p);
    CHECK(res.report.min_S_over_H >= p.beta);
    CHECK(res.report.min_S > 0);
  }
  SUBCASE("cap tip sits at gamma(s0) for every radius") {
    ControlledCurve c;
    c.b = 10.0;
    c.components = {std::make_shared<SegmentCurve>(v3(0, 0, 0), v3(5, 0, 0))};
    for (double r : {1e-2, 1e-3}) {
      CappedTubeResult res = capped_tube(c, 0, 4.0, r, true, p);
      CHECK((res.tip - v3(4, 0, 0)).norm() < 1e-12);
    }
  }
}

TEST_CASE("check_embedded catches overlapping marbles") {
  GluedDomain d;
  d.n = 2;
  d.params = dumbbell_params();
  d.add_patch(std::make_unique<SpherePatch>(v3(0, 0, 0), 1.0));
  d.add_patch(std::make_unique<SpherePatch>(v3(1.5, 0, 0), 1.0));
  EmbedVerdict v = d.check_embedded();
  CHECK_FALSE(v.pass);

  GluedDomain ok;
  ok.n = 2;
  ok.params = dumbbell_params();
  ok.add_patch(std::make_unique<SpherePatch>(v3(0, 0, 0), 1.0));
  ok.add_patch(std::make_unique<SpherePatch>(v3(10, 0, 0), 1.0));
  CHECK(ok.check_embedded().pass);
}

TEST_CASE("sample_boundary density contract") {
  GluedDomain d;
  d.n = 2;
  d.params = dumbbell_params();
  d.add_patch(std::make_unique<SpherePatch>(v3(0, 0, 0), 1.0));
  double res = 0.1;
  CurvatureReport r = d.sample_boundary(res);
  CHECK(static_cast<double>(r.sample_count) >= d.total_area() / (res * res) * 0.9);
  for (const auto& s : r.samples) {
    CHECK(s.pc.lambdas[0] == doctest::Approx(1.0));
    CHECK(s.pc.lambdas[1] == doctest::Approx(1.0));
  }
}

TEST_CASE("export_mesh") {
  SUBCASE("unit marble vertex count tracks area density") {
    GluedDomain d;
    d.n = 2;
    d.params = dumbbell_params();
    d.add_patch(std::make_unique<SpherePatch>(v3(0, 0, 0), 1.0));
    double res = 0.1;
    MeshStats st = export_mesh(d, "/tmp/tc_marble.obj", res);
    double expect = 4 * kPi / (res * res);
    CHECK(st.vertices > expect * 0.9);
    CHECK(st.vertices < expect * 1.1);
    CHECK(st.boundary_edges == 0);
    CHECK(st.components == 1);
    CHECK(st.signed_volume > 0);
    CHECK(st.signed_volume == doctest::Approx(4.0 / 3.0 * kPi).epsilon(0.02));
  }
  SUBCASE("dumbbell mesh is one watertight component with outward normals") {
    Configuration cfg = dumbbell();
    GlueResult g = glue(cfg, 0.05);
    MeshStats st = export_mesh(g.domain, "/tmp/tc_dumbbell.obj", 0.02);
    CHECK(st.components == 1);
    CHECK(st.boundary_edges == 0);
    CHECK(st.signed_volume > 0);
  }
}

TEST_CASE("marble tree validation") {
  MarbleTree t;
  t.r_m = 1.0;
  t.b = 0.05;
  t.r_s = 1e-4;
  t.params = dumbbell_params();
  t.marbles = {{v3(0, 0, 0), 1.0}, {v3(10, 0, 0), 1.0}, {v3(20, 0, 0), 1.0}};
  t.strings.push_back({0, 1, std::make_shared<SegmentCurve>(v3(1, 0, 0), v3(9, 0, 0))});
  t.strings.push_back({1, 2, std::make_shared<SegmentCurve>(v3(11, 0, 0), v3(19, 0, 0))});
  CHECK(validate_marble_tree(t).pass);

  SUBCASE("a cycle is rejected") {
    MarbleTree bad = t;
    bad.strings.push_back({0, 2, std::make_shared<SegmentCurve>(v3(1, 0, 0), v3(19, 0, 0))});
    TreeVerdict v = validate_marble_tree(bad);
    CHECK_FALSE(v.pass);
    CHECK(v.clause == "not a tree");
  }
  SUBCASE("oversized string radius is rejected") {
    MarbleTree bad = t;
    bad.r_s = 0.5;
    TreeVerdict v = validate_marble_tree(bad);
    CHECK_FALSE(v.pass);
    CHECK(v.clause == "r_s < r_bar");
  }
}
