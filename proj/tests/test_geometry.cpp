#include "doctest.h"

#include <cmath>

#include "core/geometry.hpp"

using namespace tc;

namespace {

// Independent oracle: second fundamental form from finite differences of the
// unit normal along the graph, eigenvalues via the generalized problem with
// the induced metric. Never forms the Weingarten contraction.
Vec normal_variation_curvatures(const GraphFunction& f, const Vec& x, double h = 1e-5) {
  int n = f.dim();
  auto normal = [&](const Vec& p) {
    Vec g = f.grad(p);
    Vec nu(n + 1);
    for (int i = 0; i < n; ++i) nu[i] = -g[i];
    nu[n] = 1.0;
    return Vec(nu / nu.norm());
  };
  Vec g = f.grad(x);
  Mat hmat(n, n), gmat(n, n);
  for (int i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    Vec dn = (normal(xp) - normal(xm)) / (2 * h);
    for (int j = 0; j < n; ++j) {
      // e_j = (delta_j, u_j); h_ij = -<d_i nu, e_j>
      hmat(i, j) = -(dn[j] + dn[n] * g[j]);
      gmat(i, j) = (i == j ? 1.0 : 0.0) + g[i] * g[j];
    }
  }
  Mat hs = 0.5 * (hmat + hmat.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(hs, gmat);
  return es.eigenvalues();
}

struct PolyGraph : GraphFunction {
  // u(x) = sum over multi-indices of coeff * x^alpha, degree <= 4, n = 2
  std::vector<double> c;  // 15 coefficients in graded-lex order for n=2
  double value(const Vec& x) const override {
    double X = x[0], Y = x[1];
    double m[15] = {1, X, Y, X * X, X * Y, Y * Y, X * X * X, X * X * Y, X * Y * Y, Y * Y * Y,
                    X * X * X * X, X * X * X * Y, X * X * Y * Y, X * Y * Y * Y, Y * Y * Y * Y};
    double v = 0;
    for (int i = 0; i < 15; ++i) v += c[i] * m[i];
    return v;
  }
  Vec grad(const Vec& x) const override {
    double h = 1e-6;
    Vec g(2);
    for (int i = 0; i < 2; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = (value(xp) - value(xm)) / (2 * h);
    }
    return g;
  }
  Mat hess(const Vec& x) const override {
    double h = 1e-4;
    Mat H(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Vec a = x, b = x, cc = x, d = x;
        a[i] += h; a[j] += h;
        b[i] += h; b[j] -= h;
        cc[i] -= h; cc[j] += h;
        d[i] -= h; d[j] -= h;
        H(i, j) = (value(a) - value(b) - value(cc) + value(d)) / (4 * h * h);
      }
    return 0.5 * (H + H.transpose());
  }
  int dim() const override { return 2; }
};

struct SphereGraph : GraphFunction {
  double R;
  int n;
  explicit SphereGraph(double radius, int dims) : R(radius), n(dims) {}
  double value(const Vec& x) const override { return R - std::sqrt(R * R - x.squaredNorm()); }
  Vec grad(const Vec& x) const override {
    double w = std::sqrt(R * R - x.squaredNorm());
    return x / w;
  }
  Mat hess(const Vec& x) const override {
    double w = std::sqrt(R * R - x.squaredNorm());
    return Mat::Identity(n, n) / w + (x * x.transpose()) / (w * w * w);
  }
  int dim() const override { return n; }
};

// Sphere of radius 2 with a tiny cubic bump; vanishes to second order at 0.
struct BumpedSphereGraph : GraphFunction {
  SphereGraph base{2.0, 2};
  double a = 1e-4;
  double value(const Vec& x) const override { return base.value(x) + a * cube(x.norm()); }
  Vec grad(const Vec& x) const override {
    double r = x.norm();
    if (r == 0) return base.grad(x);
    return Vec(base.grad(x) + 3.0 * a * r * x);
  }
  Mat hess(const Vec& x) const override {
    double r = x.norm();
    if (r == 0) return base.hess(x);
    return Mat(base.hess(x) + 3.0 * a * (r * Mat::Identity(2, 2) + (x * x.transpose()) / r));
  }
  int dim() const override { return 2; }
};

}  // namespace

TEST_CASE("revolution curvatures: sphere, cylinder, catenoid") {
  PrincipalCurvatures sph = revolution_curvatures(1.0, 0.0, -1.0, 2);
  CHECK(sph.lambdas[0] == doctest::Approx(1.0));
  CHECK(sph.lambdas[1] == doctest::Approx(1.0));
  CHECK(sph.H == doctest::Approx(2.0));

  PrincipalCurvatures cyl = revolution_curvatures(0.5, 0.0, 0.0, 3);
  CHECK(cyl.lambdas[0] == doctest::Approx(0.0));
  CHECK(cyl.lambdas[1] == doctest::Approx(2.0));
  CHECK(cyl.lambdas[2] == doctest::Approx(2.0));

  PrincipalCurvatures cat = revolution_curvatures(1.0, 0.0, 1.0, 2);
  CHECK(cat.S == doctest::Approx(0.0));
  CHECK(cat.H == doctest::Approx(0.0));

  CHECK_THROWS_AS(revolution_curvatures(0.0, 0.0, 0.0, 2), validation_error);
}

TEST_CASE("graph shape operator: flat gauge and paraboloid") {
  Vec g = Vec::Zero(3);
  Mat h = Mat::Zero(3, 3);
  h.diagonal() << 1.0, 2.0, 3.0;
  Mat W = graph_shape_operator(g, h);
  CHECK((W - h).norm() == doctest::Approx(0.0));

  Vec g2(2);
  g2 << 1.0, 0.0;
  Mat h2 = Mat::Identity(2, 2);
  Vec ev = graph_principal_curvatures(g2, h2);
  CHECK(ev[0] == doctest::Approx(std::pow(2.0, -1.5)));
  CHECK(ev[1] == doctest::Approx(std::pow(2.0, -0.5)));
}

TEST_CASE("sphere graphs give curvature 1/R everywhere sampled") {
  SplitMix64 rng(7);
  for (double R : {0.5, 1.0, 2.0}) {
    SphereGraph s(R, 2);
    for (int k = 0; k < 20; ++k) {
      Vec x(2);
      x << rng.uniform(-0.4, 0.4) * R, rng.uniform(-0.4, 0.4) * R;
      Vec ev = graph_principal_curvatures(s.grad(x), s.hess(x));
      for (int i = 0; i < 2; ++i) CHECK(std::abs(ev[i] - 1.0 / R) < 1e-6);
    }
  }
}

TEST_CASE("shape operator matches the normal-variation oracle on random graphs") {
  SplitMix64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    PolyGraph f;
    f.c.resize(15);
    for (auto& c : f.c) c = rng.uniform(-0.5, 0.5);
    Vec x(2);
    x << rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3);
    Vec mine = graph_principal_curvatures(f.grad(x), f.hess(x));
    Vec oracle = normal_variation_curvatures(f, x);
    double scale = std::max(1.0, std::max(std::abs(mine[0]), std::abs(mine[1])));
    CHECK(std::abs(mine[0] - oracle[0]) / scale < 1e-4);
    CHECK(std::abs(mine[1] - oracle[1]) / scale < 1e-4);
  }
}

TEST_CASE("u_lambda values and derivatives") {
  Vec l1 = Vec::Ones(2);
  Vec x(2);
  x << 0.3, -0.2;
  CHECK(u_lambda(x, l1) == doctest::Approx(1.0 - std::sqrt(1.0 - x.squaredNorm())));

  Vec l2(2);
  l2 << 1.0, 2.0;
  Vec zero = Vec::Zero(2);
  CHECK(u_lambda(zero, l2) == doctest::Approx(0.0));
  CHECK(u_lambda_grad(zero, l2).norm() == doctest::Approx(0.0));
  double h = 1e-4;
  for (int i = 0; i < 2; ++i) {
    Vec xp = zero, xm = zero;
    xp[i] += h;
    xm[i] -= h;
    double fd = (u_lambda(xp, l2) - 2 * u_lambda(zero, l2) + u_lambda(xm, l2)) / (h * h);
    CHECK(fd == doctest::Approx(l2[i]).epsilon(1e-6));
  }

  Vec l3(3);
  l3 << 0.5, 1.0, 1.5;
  ULambdaGraph ug(l3);
  Vec z3 = Vec::Zero(3);
  Vec ev = graph_principal_curvatures(ug.grad(z3), ug.hess(z3));
  for (int i = 0; i < 3; ++i) CHECK(ev[i] == doctest::Approx(l3[i]).epsilon(1e-9));

  Vec far(2);
  far << 1.5, 0.0;
  CHECK_THROWS_AS(u_lambda(far, l1), validation_error);
}

TEST_CASE("u_lambda graph hessian is consistent off the origin") {
  Vec l(2);
  l << 0.7, 1.3;
  ULambdaGraph ug(l);
  Vec x(2);
  x << 0.2, 0.1;
  double h = 1e-5;
  for (int i = 0; i < 2; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    Vec fd = (ug.grad(xp) - ug.grad(xm)) / (2 * h);
    for (int j = 0; j < 2; ++j) CHECK(fd[j] == doctest::Approx(ug.hess(x)(i, j)).epsilon(1e-6));
  }
}

TEST_CASE("sum_two_smallest") {
  CHECK(sum_two_smallest(Mat::Identity(3, 3)) == doctest::Approx(2.0));
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << -1.0, 2.0, 3.0;
  CHECK(sum_two_smallest(d) == doctest::Approx(1.0));
  SplitMix64 rng(23);
  for (int t = 0; t < 20; ++t) {
    Mat A(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) A(i, j) = rng.uniform(-1, 1);
    Mat S = 0.5 * (A + A.transpose());
    Eigen::EigenSolver<Mat> ges(S);
    std::vector<double> ev;
    for (int i = 0; i < 4; ++i) ev.push_back(ges.eigenvalues()[i].real());
    std::sort(ev.begin(), ev.end());
    CHECK(sum_two_smallest(S) == doctest::Approx(ev[0] + ev[1]).epsilon(1e-9));
  }
}

TEST_CASE("Weyl stability of sum_two_smallest") {
  SplitMix64 rng(31);
  for (int t = 0; t < 50; ++t) {
    int n = 3 + static_cast<int>(rng.next() % 3);
    Mat A(n, n), E(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        A(i, j) = rng.uniform(-1, 1);
        E(i, j) = rng.uniform(-0.1, 0.1);
      }
    Mat As = 0.5 * (A + A.transpose());
    Mat Es = 0.5 * (E + E.transpose());
    double norm2 = Es.operatorNorm();
    CHECK(sum_two_smallest(As + Es) >= sum_two_smallest(As) - 2 * norm2 - 1e-10);
  }
}

TEST_CASE("tube curvatures") {
  PrincipalCurvatures straight = tube_curvatures(0.2, 0.0, 0.3, 3);
  CHECK(straight.lambdas[0] == doctest::Approx(0.0));
  CHECK(straight.lambdas[1] == doctest::Approx(5.0));

  PrincipalCurvatures orth = tube_curvatures(0.2, 1.0, kPi / 2, 2);
  CHECK(orth.lambdas[0] == doctest::Approx(0.0).epsilon(1e-12));

  PrincipalCurvatures bent = tube_curvatures(0.1, 1.0, 0.0, 2);
  CHECK(bent.lambdas[0] == doctest::Approx(-1.0 / 0.9));
  CHECK(bent.lambdas[1] == doctest::Approx(10.0));
  CHECK(bent.S > 0);

  CHECK_THROWS_AS(tube_curvatures(1.0, 1.0, 0.0, 2), validation_error);
}

TEST_CASE("tube curvatures against a finite-difference torus patch") {
  double kappa = 1.0, r = 0.1;
  auto point = [&](double s, double phi) {
    double R0 = 1.0 / kappa;
    double rad = R0 - r * std::cos(phi);
    Vec p(3);
    p << rad * std::cos(s), rad * std::sin(s), r * std::sin(phi);
    return p;
  };
  double h = 1e-4;
  for (double phi : {0.0, 0.7, kPi / 2, 2.2, kPi}) {
    Vec xs = (point(h, phi) - point(-h, phi)) / (2 * h);
    Vec xp = (point(0, phi + h) - point(0, phi - h)) / (2 * h);
    Vec xss = (point(h, phi) - 2 * point(0, phi) + point(-h, phi)) / (h * h);
    Vec xpp = (point(0, phi + h) - 2 * point(0, phi) + point(0, phi - h)) / (h * h);
    Vec xsp = (point(h, phi + h) - point(h, phi - h) - point(-h, phi + h) + point(-h, phi - h)) /
              (4 * h * h);
    // inward normal of the solid tube: from the surface point toward the spine
    Vec spine(3);
    spine << 1.0 / kappa, 0.0, 0.0;
    Vec nu3 = spine - point(0, phi);
    nu3 /= nu3.norm();
    Mat g(2, 2), hh(2, 2);
    g << xs.dot(xs), xs.dot(xp), xp.dot(xs), xp.dot(xp);
    hh << xss.dot(nu3), xsp.dot(nu3), xsp.dot(nu3), xpp.dot(nu3);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(hh, g);
    PrincipalCurvatures mine = tube_curvatures(r, kappa, phi, 2);
    CHECK(es.eigenvalues()[0] == doctest::Approx(mine.lambdas[0]).epsilon(1e-3));
    CHECK(es.eigenvalues()[1] == doctest::Approx(mine.lambdas[1]).epsilon(1e-3));
  }
}

TEST_CASE("tube S is minimized at theta=0") {
  double r = 0.05, kappa = 1.0;
  double s0 = tube_curvatures(r, kappa, 0.0, 3).S;
  for (int i = 1; i <= 60; ++i) {
    double th = kPi * i / 60.0;
    CHECK(tube_curvatures(r, kappa, th, 3).S >= s0 - 1e-12);
  }
}

TEST_CASE("deform_mixed_curvatures") {
  ControlParams p;
  p.n = 2;
  p.beta = 0.3;
  p.c_H = 1.0;
  p.C_A = 2.2;

  SUBCASE("equal curvatures stay exactly the round graph") {
    Vec l(2);
    l << 1.0, 1.0;
    MixedDeformResult r = deform_mixed_curvatures(l, 0.05, p, 48);
    ULambdaGraph ul(l);
    SplitMix64 rng(3);
    for (int t = 0; t < 30; ++t) {
      Vec x(2);
      double rad = std::sqrt(2 * 0.05) * rng.uniform();
      double th = rng.uniform(0, 2 * kPi);
      x << rad * std::cos(th), rad * std::sin(th);
      CHECK(r.graph->value(x) == doctest::Approx(ul.value(x)).epsilon(1e-12));
    }
  }

  SUBCASE("mixed curvatures certify S>0 and match u_lambda on the outer trace") {
    Vec l(2);
    l << 0.2, 1.0;
    double delta = mixed_delta_bar(l, p);
    REQUIRE(delta > 0);
    MixedDeformResult r = deform_mixed_curvatures(l, delta, p, 200);
    CHECK(r.min_S > 0);
    ULambdaGraph ul(l);
    double rad = std::sqrt(delta);
    for (double th : {0.1, 1.0, 2.5}) {
      Vec x(2);
      x << rad * std::cos(th), rad * std::sin(th);
      CHECK(r.graph->value(x) == doctest::Approx(ul.value(x)).epsilon(1e-14));
      CHECK((r.graph->grad(x) - ul.grad(x)).norm() == doctest::Approx(0.0).epsilon(1e-12));
    }
    Vec tiny = Vec::Zero(2);
    Mat h0 = r.graph->hess(tiny);
    CHECK(h0(0, 0) == doctest::Approx(l.mean()));
    CHECK(h0(1, 1) == doctest::Approx(l.mean()));
  }

  SUBCASE("mixed graph derivatives are internally consistent") {
    Vec l(2);
    l << 0.2, 1.0;
    MixedDeformResult r = deform_mixed_curvatures(l, 0.02, p, 48);
    SplitMix64 rng(11);
    double h = 1e-6;
    for (int t = 0; t < 25; ++t) {
      Vec x(2);
      double rad = std::sqrt(2 * 0.02) * (0.05 + 0.9 * rng.uniform());
      double th = rng.uniform(0, 2 * kPi);
      x << rad * std::cos(th), rad * std::sin(th);
      Vec gp(2), ga = r.graph->grad(x);
      for (int i = 0; i < 2; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        gp[i] = (r.graph->value(xp) - r.graph->value(xm)) / (2 * h);
      }
      CHECK((gp - ga).norm() < 1e-6 * (1 + ga.norm()));
      Mat ha = r.graph->hess(x);
      for (int i = 0; i < 2; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        Vec fd = (r.graph->grad(xp) - r.graph->grad(xm)) / (2 * h);
        for (int j = 0; j < 2; ++j)
          CHECK(std::abs(fd[j] - ha(i, j)) < 2e-5 * (1 + std::abs(ha(i, j))));
      }
    }
  }
}

TEST_CASE("second_order_approx") {
  ControlParams p;
  p.n = 2;

  SUBCASE("round inputs are fixed points") {
    Vec l(2);
    l << 0.5, 0.5;
    auto u = std::make_shared<ULambdaGraph>(l);
    SecondOrderApproxResult r = second_order_approx(u, 0.2, p);
    SplitMix64 rng(5);
    for (int t = 0; t < 20; ++t) {
      Vec x(2);
      x << rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15);
      CHECK(r.graph->value(x) == doctest::Approx(u->value(x)).epsilon(1e-12));
    }
  }

  SUBCASE("bumped sphere certifies and obeys the remainder bound") {
    auto u = std::make_shared<BumpedSphereGraph>();
    double delta = 0.1;
    SecondOrderApproxResult r = second_order_approx(u, delta, p);
    CHECK(r.min_S > p.beta * p.c_H / 4);
    CHECK(r.lambda[0] == doctest::Approx(0.5).epsilon(1e-9));
    Vec x(2);
    x << 0.11, 0.02;
    CHECK(r.graph->value(x) == doctest::Approx(u->value(x)).epsilon(1e-14));
    ULambdaGraph ul(r.lambda);
    Vec y(2);
    y << 0.02, -0.01;
    CHECK(r.graph->value(y) == doctest::Approx(ul.value(y)).epsilon(1e-14));
    double C = 4.0 * (p.D_A + p.C_A * p.C_A);
    SplitMix64 rng(9);
    for (int t = 0; t < 40; ++t) {
      Vec z(2);
      double rad = delta * rng.uniform();
      double th = rng.uniform(0, 2 * kPi);
      z << rad * std::cos(th), rad * std::sin(th);
      double E = r.graph->value(z) - ul.value(z);
      double dE = (r.graph->grad(z) - ul.grad(z)).norm();
      double d2E = (r.graph->hess(z) - ul.hess(z)).norm();
      CHECK(std::abs(E) <= C * cube(delta));
      CHECK(dE <= C * sq(delta));
      CHECK(d2E <= C * delta);
    }
  }
}

TEST_CASE("zeta threshold") {
  ControlParams p;
  p.n = 2;
  p.beta = 0.3;
  double z = zeta_threshold(p);
  CHECK(z > 0);
  CHECK(z <= 0.0999 + 1e-12);
  PrincipalCurvatures worst = tube_curvatures(z, 1.0, 0.0, p.n);
  CHECK(worst.S >= p.beta * worst.H - 1e-9);

  // brute-force minimization over theta agrees with the theta=0 worst case
  double r = z * 0.999;
  double best = 1e300;
  for (int i = 0; i <= 2000; ++i) {
    double th = kPi * i / 2000.0;
    PrincipalCurvatures pc = tube_curvatures(r, 1.0, th, p.n);
    best = std::min(best, pc.S - p.beta * pc.H);
  }
  PrincipalCurvatures at0 = tube_curvatures(r, 1.0, 0.0, p.n);
  CHECK(best == doctest::Approx(at0.S - p.beta * at0.H).epsilon(1e-9));

  // beta -> 0 recovers the self-overlap-limited cap
  ControlParams p0 = p;
  p0.beta = 1e-9;
  CHECK(zeta_threshold(p0) == doctest::Approx(0.0999).epsilon(1e-6));

  // monotone decreasing in beta
  double prev = 1e300;
  for (double b : {0.05, 0.15, 0.25, 0.35, 0.44}) {
    ControlParams pb = p;
    pb.beta = b;
    double zb = zeta_threshold(pb);
    CHECK(zb <= prev + 1e-12);
    prev = zb;
  }
}
