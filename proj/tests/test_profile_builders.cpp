#include "doctest.h"

#include <cmath>

#include "core/profile_build.hpp"
#include "core/stepfn.hpp"

using namespace tc;

TEST_CASE("eval_chi spec examples") {
  CHECK(eval_chi(-0.5, 1.0) == 0.0);
  CHECK(eval_chi(2.0, 1.0) == 1.0);
  CHECK_THROWS_AS(eval_chi(0.0, -0.1), validation_error);
  // finite-difference scan of |d/dt chi_eps| <= 10/eps for eps = 0.1
  double eps = 0.1, h = 1e-7, worst = 0;
  for (int i = 0; i <= 5000; ++i) {
    double t = -0.02 + 0.14 * i / 5000.0;
    worst = std::max(worst, std::abs(eval_chi(t + h, eps) - eval_chi(t - h, eps)) / (2 * h));
  }
  CHECK(worst <= 100.0);
}

TEST_CASE("phi_tilde closed form") {
  CHECK(eval_phi_tilde(0.1, 0.1) == doctest::Approx(-0.5));
  // second derivative at t = delta is 3/(2 delta^2)
  PhiTildePiece p(0.1);
  CHECK(p.jet(0.1).d2 == doctest::Approx(150.0));
  // Q == 1/2 identically
  for (double t : {0.05, 0.1, 0.37, 1.0, 10.0}) {
    Jet2 j = p.jet(t);
    double Q = t * t * j.d2 + 4 * t * j.d1 + 2 * j.v;
    CHECK(Q == doctest::Approx(0.5).epsilon(1e-9));
  }
  CHECK_THROWS_AS(eval_phi_tilde(-1.0, 0.1), validation_error);
  CHECK_THROWS_AS(eval_phi_tilde(0.1, 0.0), validation_error);
}

TEST_CASE("transition phi boundary values and Q certificate") {
  TransitionPhi t = build_transition_phi();
  CHECK(t.phi.eval(-3.0) == -0.5);
  CHECK(t.phi.eval(0.0) == -0.5);
  CHECK(t.phi.eval(1.0) == 0.25);
  CHECK(t.phi.eval(7.0) == 0.25);
  CHECK(t.q_report.max_value <= 0.95);
  CHECK(t.q_report.resolution == doctest::Approx(1e-4));
  // support of phi' inside (0,1)
  CHECK(t.phi.eval(1e-9) == -0.5);
  // derivative consistency on the active region
  CHECK(t.phi.derivative_consistency_error(-0.5, 1.5) < 1e-6);
}

TEST_CASE("blend_preserving_Q trivial case") {
  ProfileFunction c0, c1;
  c0.append(0.0, 2.0, std::make_unique<ConstantPiece>(-0.5));
  c0.set_tails(ProfileFunction::Tail::kConstant, ProfileFunction::Tail::kConstant);
  c1 = c0;
  ProfileFunction b = blend_preserving_Q(c0, c1, 0.5, 0.1);
  for (double t : {0.1, 0.5, 0.55, 0.7, 1.5}) CHECK(b.eval(t) == doctest::Approx(-0.5));
  DefectReport q = b.defect_report("Q", 0.1, 1.5, 1e-4);
  CHECK(q.max_value == doctest::Approx(-1.0));
}

TEST_CASE("blend_preserving_Q phi_tilde against its Taylor polynomial") {
  double delta = 0.1, t_star = 0.2;
  ProfileFunction pt;
  pt.append(delta, 2.0, std::make_unique<PhiTildePiece>(delta));
  Jet2 j = pt.jet(t_star);
  ProfileFunction taylor;
  taylor.append(delta, 2.0, std::make_unique<PolyPiece>(
                                 t_star, std::vector<double>{j.v, j.d1, j.d2 / 2}));
  taylor.set_tails(ProfileFunction::Tail::kError, ProfileFunction::Tail::kError);
  // proof-scale eps (the cross terms need eps below 1e-5 t_star^-2 / D)
  double D = 2.0 * std::abs(9.0 * delta / std::pow(t_star, 4));
  double eps = std::min(t_star / 2, 1e-5 / (t_star * t_star * D)) * 0.5;
  ProfileFunction b = blend_preserving_Q(pt, taylor, t_star, eps);
  DefectReport q = b.defect_report("Q", t_star, t_star + eps, eps / 1024);
  CHECK(q.max_value <= 0.95);
  CHECK(b.eval(t_star - 1e-3) == doctest::Approx(pt.eval(t_star - 1e-3)));
  CHECK(b.eval(t_star + 2 * eps) == doctest::Approx(taylor.eval(t_star + 2 * eps)));
}

TEST_CASE("blend cross-term bound from the transition lemma") {
  // |t^2 chi_eps''(t-t*) (phi1-phi0)(t)| <= 1e-2 for the proof's eps
  double delta = 0.1, t_star = 0.2;
  PhiTildePiece pt(delta);
  Jet2 j = pt.jet(t_star);
  PolyPiece taylor(t_star, {j.v, j.d1, j.d2 / 2});
  double D = 2.0 * std::abs(9.0 * delta / std::pow(t_star, 4));
  double eps = std::min(t_star / 2, 1e-5 * std::pow(t_star, -2) / D);
  double worst = 0;
  for (int i = 0; i <= 4000; ++i) {
    double t = t_star + eps * i / 4000.0;
    double cross = t * t * chi_eps_jet(t - t_star, eps).d2 * (taylor.jet(t).v - pt.jet(t).v);
    worst = std::max(worst, std::abs(cross));
  }
  CHECK(worst <= 1e-2);
}

TEST_CASE("blend precondition rejections are named") {
  ProfileFunction c0, c1;
  c0.append(0.0, 2.0, std::make_unique<ConstantPiece>(-0.5));
  c1.append(0.0, 2.0, std::make_unique<ConstantPiece>(-0.4));
  c0.set_tails(ProfileFunction::Tail::kConstant, ProfileFunction::Tail::kConstant);
  c1.set_tails(ProfileFunction::Tail::kConstant, ProfileFunction::Tail::kConstant);
  CHECK_THROWS_WITH_AS(blend_preserving_Q(c0, c1, 0.5, 0.1),
                       doctest::Contains("phi0(t*)=phi1(t*)"), validation_error);
  CHECK_THROWS_WITH_AS(blend_preserving_Q(c0, c0, 0.5, 0.3),
                       doctest::Contains("eps<t_star/2"), validation_error);
}

TEST_CASE("trim_to_taylor fixed point on quadratics") {
  ProfileFunction q;
  q.append(0.0, 1.0, std::make_unique<PolyPiece>(0.0, std::vector<double>{1.0, 0.1, -0.3}));
  ProfileFunction v = trim_to_taylor(q, 0.5, 0.05, 1.0);
  for (double x : {0.1, 0.45, 0.48, 0.5, 0.8})
    CHECK(v.eval(x) == doctest::Approx(q.eval(x)).epsilon(1e-12));
}

TEST_CASE("trim_to_taylor on the sphere keeps P positive") {
  ProfileFunction s;
  s.append(-1.0, 1.0, std::make_unique<CirclePiece>(0.0, 1.0));
  ProfileFunction v = trim_to_taylor(s, 0.5, 1e-3, 0.6);
  DefectReport p = v.defect_report("P", 0.0, 0.5, 1e-4);
  CHECK(p.min_value > 0);
  // remainder bound sup |(v-u)^{(i)}| <= C eps^{3-i} on the zone
  double eps = 1e-3;
  double x0 = 0.5;
  double d3 = 3 * x0 / std::pow(1 - x0 * x0, 2.5);  // |u'''| near t*
  double C = 4.0 * d3;
  double w0 = 0, w1 = 0, w2 = 0;
  for (int i = 0; i <= 300; ++i) {
    double x = 0.5 - eps + eps * i / 300.0;
    Jet2 a = v.jet(x), b = s.jet(x);
    w0 = std::max(w0, std::abs(a.v - b.v));
    w1 = std::max(w1, std::abs(a.d1 - b.d1));
    w2 = std::max(w2, std::abs(a.d2 - b.d2));
  }
  CHECK(w0 <= C * eps * eps * eps);
  CHECK(w1 <= C * eps * eps);
  CHECK(w2 <= C * eps);
}

TEST_CASE("psi dyadic structure") {
  PsiResult r = build_psi(0.5);
  CHECK(r.N == 20000);
  CHECK(r.c_exp2 == -20000);
  CHECK(r.c == 0.0);  // underflows as a double; exponent bookkeeping holds it
  CHECK(r.psi.eval(2.0) == 0.0);
  CHECK(r.psi.eval(1.0) == 0.0);
  CHECK(r.psi.eval(0.0) == 1.0);
  CHECK(r.defect_max < 0.5);
  // dyadic piece formula psi(2^-k * 1.5) = (k-1)/N + chi(2 - 1.5)/N
  const PsiPiece probe(r.N);
  double t = std::ldexp(1.5, -8);  // in [2^-8, 2^-7], k = 8
  CHECK(probe.jet(t).v == doctest::Approx(7.0 / 20000.0 + chi(0.5) / 20000.0).epsilon(1e-12));
  // psi(c/2) = 1 via exponent arithmetic
  CHECK(probe.value_at_exp2(-20001) == 1.0);
  CHECK(probe.value_at_exp2(-20000) == doctest::Approx(1.0));
  CHECK(probe.value_at_exp2(-1) == doctest::Approx(1.0 / 20000.0));
}

TEST_CASE("psi defect bound honored for small eps") {
  PsiResult r = build_psi(0.01);
  CHECK(r.N == 1000000);
  CHECK(r.defect_max < 0.01);
}

TEST_CASE("C_delta profile certificates") {
  for (double d : {0.1, 0.5, 0.99}) {
    CdeltaResult c = build_Cdelta_profile(d);
    CHECK(c.p_report.min_value > 0);
    CHECK(c.rho == doctest::Approx(cube(c.delta1)).epsilon(1e-12));
    // sphere region intact
    CHECK(c.u_delta.eval(-0.5) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
    // cylinder region constant
    CHECK(c.u_delta.eval(c.x_cyl + 0.1) == doctest::Approx(c.rho).epsilon(1e-12));
    // parabola minimum value delta1^3 at t_min
    double pm = c.u_delta.eval(c.t_star + c.t_min);
    CHECK(pm == doctest::Approx(cube(c.delta1)).epsilon(1e-8));
  }
}

TEST_CASE("C_delta at 0.99 has second derivative below one") {
  CdeltaResult c = build_Cdelta_profile(0.99);
  double worst = -1e300;
  for (double x : c.u_delta.certification_grid(-0.9, c.x_cyl + 0.1, 1e-4))
    worst = std::max(worst, c.u_delta.jet(x).d2);
  CHECK(worst < 1.0);
}

TEST_CASE("rho is strictly increasing and vanishes at zero") {
  double prev = 0.0;
  for (double d : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    CdeltaResult c = build_Cdelta_profile(d);
    CHECK(c.rho > prev);
    prev = c.rho;
    CHECK(c.rho == doctest::Approx(rho_of_delta(d)).epsilon(1e-12));
    CHECK(delta_of_rho(c.rho) == doctest::Approx(d).epsilon(1e-9));
  }
  CHECK(rho_of_delta(1e-6) < 1e-8);
}

TEST_CASE("C_delta varies continuously in delta") {
  CdeltaResult a = build_Cdelta_profile(0.3000);
  CdeltaResult b = build_Cdelta_profile(0.3001);
  double worst = 0;
  for (int i = 0; i <= 500; ++i) {
    double x = -1.0 + (std::min(a.x_cyl, b.x_cyl) + 0.9) * i / 500.0;
    worst = std::max(worst, std::abs(a.u_delta.eval(x) - b.u_delta.eval(x)));
  }
  CHECK(worst < 5e-3);
}

TEST_CASE("standard cap profile") {
  StandardCapResult cap = build_standard_cap_profile();
  CHECK(cap.u_st.eval(0.5) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
  CHECK(cap.u_st.eval(-5.0) == 1.0);
  CHECK(cap.max_d2 <= 0.0);
  CHECK(cap.beta >= 0.45);
  // transition is monotone decreasing
  double prev = 2.0;
  for (int i = 0; i <= 200; ++i) {
    double x = -0.01 + 0.02 * i / 200.0;
    double v = cap.u_st.eval(x);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("profile invariants: derivative consistency of builders") {
  CdeltaResult c = build_Cdelta_profile(0.5);
  CHECK(c.u_delta.derivative_consistency_error(-0.99, c.x_cyl + 0.2) < 1e-6);
  StandardCapResult cap = build_standard_cap_profile();
  CHECK(cap.u_st.derivative_consistency_error(-0.1, 0.99) < 1e-6);
}
