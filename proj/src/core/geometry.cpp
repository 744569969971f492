#include "core/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "core/stepfn.hpp"

namespace tc {

void ControlParams::validate() const {
  if (n < 2) throw validation_error("n>=2", "hypersurface dimension must be at least 2");
  if (!(alpha > 0 && alpha < n - 1)) throw validation_error("alpha in (0,n-1)", "bad alpha");
  if (!(beta > 0 && beta < 1.0 / (n - 1))) throw validation_error("beta in (0,1/(n-1))", "bad beta");
  if (!(c_H > 0 && C_A > 0 && D_A > 0)) throw validation_error("positive bounds", "c_H, C_A, D_A must be positive");
}

PrincipalCurvatures PrincipalCurvatures::from_values(std::vector<double> ls) {
  std::sort(ls.begin(), ls.end());
  PrincipalCurvatures pc;
  pc.H = 0;
  for (double l : ls) pc.H += l;
  pc.S = ls.size() >= 2 ? ls[0] + ls[1] : (ls.empty() ? 0.0 : ls[0]);
  pc.lambdas = std::move(ls);
  return pc;
}

PrincipalCurvatures revolution_curvatures(double u, double du, double ddu, int n) {
  if (!(u > 0)) throw validation_error("u>0", "revolution profile touches the axis");
  if (n < 2) throw validation_error("n>=2", "revolution curvatures need n >= 2");
  double om = 1.0 + du * du;
  double merid = -ddu / std::pow(om, 1.5);
  double circ = 1.0 / (u * std::sqrt(om));
  std::vector<double> ls(static_cast<std::size_t>(n), circ);
  ls[0] = merid;
  return PrincipalCurvatures::from_values(std::move(ls));
}

Mat graph_shape_operator(const Vec& grad, const Mat& hess) {
  if (hess.rows() != hess.cols() || hess.rows() != grad.size())
    throw validation_error("shapes", "grad/hess dimensions disagree");
  if ((hess - hess.transpose()).norm() > 1e-9 * (1.0 + hess.norm()))
    throw validation_error("hess symmetric", "hessian must be symmetric");
  Eigen::Index n = grad.size();
  double g2 = grad.squaredNorm();
  double w = std::sqrt(1.0 + g2);
  Mat ginvhalf = Mat::Identity(n, n);
  if (g2 > 0) ginvhalf -= ((1.0 - 1.0 / w) / g2) * (grad * grad.transpose());
  Mat m = (ginvhalf * hess * ginvhalf) / w;
  return 0.5 * (m + m.transpose());
}

Vec graph_principal_curvatures(const Vec& grad, const Mat& hess) {
  Eigen::SelfAdjointEigenSolver<Mat> es(graph_shape_operator(grad, hess));
  return es.eigenvalues();
}

double sum_two_smallest(const Mat& M) {
  if (M.rows() != M.cols() || M.rows() < 2)
    throw validation_error("square n>=2", "sum_two_smallest needs an n>=2 symmetric matrix");
  if ((M - M.transpose()).norm() > 1e-9 * (1.0 + M.norm()))
    throw validation_error("symmetric", "matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  return es.eigenvalues()[0] + es.eigenvalues()[1];
}

namespace {
double lambda_mean(const Vec& lambda) {
  if (lambda.size() < 1) throw validation_error("lambda", "empty curvature vector");
  return lambda.mean();
}
}  // namespace

double u_lambda(const Vec& x, const Vec& lambda) {
  double mean = lambda_mean(lambda);
  if (!(mean > 0)) throw validation_error("mean(lambda)>0", "u_lambda needs positive mean");
  double T = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) T += lambda[i] * x[i] * x[i];
  double rad = 1.0 - mean * T;
  if (!(rad > 0)) throw validation_error("radicand>0", "u_lambda outside its chart");
  return (1.0 - std::sqrt(rad)) / mean;
}

Vec u_lambda_grad(const Vec& x, const Vec& lambda) {
  double mean = lambda_mean(lambda);
  double T = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) T += lambda[i] * x[i] * x[i];
  double W = std::sqrt(1.0 - mean * T);
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = lambda[i] * x[i] / W;
  return g;
}

Mat u_lambda_hess(const Vec& x, const Vec& lambda) {
  double mean = lambda_mean(lambda);
  double T = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) T += lambda[i] * x[i] * x[i];
  double W = std::sqrt(1.0 - mean * T);
  Vec Tj(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) Tj[i] = 2.0 * lambda[i] * x[i];
  Mat h = Mat::Zero(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) h(i, i) = 2.0 * lambda[i];
  h /= 2.0 * W;
  h += (mean / (4.0 * W * W * W)) * (Tj * Tj.transpose());
  return h;
}

PrincipalCurvatures tube_curvatures(double r, double kappa, double theta, int n) {
  if (!(r > 0)) throw validation_error("r>0", "tube radius must be positive");
  if (!(kappa >= 0)) throw validation_error("kappa>=0", "curvature magnitude is nonnegative");
  if (!(r * kappa < 1)) throw validation_error("r*kappa<1", "tube overlaps itself");
  double c = kappa * std::cos(theta);
  double axial = -c / (1.0 - r * c);
  std::vector<double> ls(static_cast<std::size_t>(n), 1.0 / r);
  ls[0] = axial;
  return PrincipalCurvatures::from_values(std::move(ls));
}

ULambdaGraph::ULambdaGraph(Vec lambda) : lambda_(std::move(lambda)) {
  if (!(lambda_mean(lambda_) > 0))
    throw validation_error("mean(lambda)>0", "u_lambda graph needs positive mean");
}

MixedCurvatureGraph::MixedCurvatureGraph(Vec lambda, double delta,
                                         std::shared_ptr<const PsiPiece> psi)
    : lambda_(std::move(lambda)), delta_(delta), mean_(lambda_.mean()), psi_(std::move(psi)) {
  if (!(delta_ > 0)) throw validation_error("delta>0", "mixed deformation needs delta > 0");
}

double MixedCurvatureGraph::eta(double r) const { return psi_->jet(r / delta_).v; }
double MixedCurvatureGraph::eta1_times_r(double r) const { return psi_->d1_times_t(r / delta_); }
double MixedCurvatureGraph::eta2_times_r2(double r) const { return psi_->d2_times_t2(r / delta_); }

double MixedCurvatureGraph::value(const Vec& x) const {
  double r = x.norm();
  double T = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) T += lambda_[i] * x[i] * x[i];
  double q = (r == 0.0) ? 0.0 : T + eta(r) * (mean_ * r * r - T);
  double rad = 1.0 - mean_ * q;
  if (!(rad > 0)) throw validation_error("radicand>0", "mixed graph outside its chart");
  return (1.0 - std::sqrt(rad)) / mean_;
}

Vec MixedCurvatureGraph::grad(const Vec& x) const {
  Eigen::Index n = x.size();
  double r = x.norm();
  if (r == 0.0) return Vec::Zero(n);
  double T = 0;
  for (Eigen::Index i = 0; i < n; ++i) T += lambda_[i] * x[i] * x[i];
  double D = mean_ * r * r - T;
  double et = eta(r), A1 = eta1_times_r(r);
  double q = T + et * D;
  double W = std::sqrt(1.0 - mean_ * q);
  Vec g(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double qj = 2.0 * lambda_[j] * x[j] + A1 * x[j] * (D / (r * r)) +
                et * 2.0 * (mean_ - lambda_[j]) * x[j];
    g[j] = qj / (2.0 * W);
  }
  return g;
}

Mat MixedCurvatureGraph::hess(const Vec& x) const {
  Eigen::Index n = x.size();
  double r = x.norm();
  if (r == 0.0) {
    Mat h = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) h(i, i) = mean_;  // eta(0)=1: round graph
    return h;
  }
  double T = 0;
  for (Eigen::Index i = 0; i < n; ++i) T += lambda_[i] * x[i] * x[i];
  double D = mean_ * r * r - T;
  double Dr2 = D / (r * r);
  double et = eta(r), A1 = eta1_times_r(r), A2 = eta2_times_r2(r);
  double q = T + et * D;
  double W = std::sqrt(1.0 - mean_ * q);

  Vec qj(n);
  for (Eigen::Index j = 0; j < n; ++j)
    qj[j] = 2.0 * lambda_[j] * x[j] + A1 * x[j] * Dr2 + et * 2.0 * (mean_ - lambda_[j]) * x[j];

  Mat qjk(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      double djk = (j == k) ? 1.0 : 0.0;
      double xjk = x[j] * x[k] / (r * r);
      double term = A2 * xjk * Dr2;
      term += A1 * ((djk - xjk) * Dr2 + (x[j] / r) * 2.0 * (mean_ - lambda_[k]) * x[k] / r +
                    (x[k] / r) * 2.0 * (mean_ - lambda_[j]) * x[j] / r);
      term += 2.0 * lambda_[j] * djk + et * 2.0 * (mean_ - lambda_[j]) * djk;
      qjk(j, k) = term;
    }
  }
  Mat h = qjk / (2.0 * W);
  h += (mean_ / (4.0 * W * W * W)) * (qj * qj.transpose());
  return 0.5 * (h + h.transpose());
}

namespace {

// Certification directions: coordinate axes plus deterministic pseudo-random
// unit vectors.
std::vector<Vec> sample_directions(int n, std::size_t count) {
  std::vector<Vec> dirs;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    dirs.push_back(e);
  }
  SplitMix64 rng(0x5eed5eedULL + static_cast<std::uint64_t>(n));
  while (dirs.size() < count + static_cast<std::size_t>(n)) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = 2.0 * rng.uniform() - 1.0;
    double nm = v.norm();
    if (nm < 1e-3) continue;
    dirs.push_back(v / nm);
  }
  return dirs;
}

double blend_diag_entry(double lambda_i, double mean, double eta) {
  return (1.0 - eta) * lambda_i + eta * mean;
}

}  // namespace

MixedDeformResult deform_mixed_curvatures(const Vec& lambda, double delta,
                                          const ControlParams& params, std::size_t grid) {
  params.validate();
  if (lambda.size() != params.n)
    throw validation_error("lambda size", "curvature vector must have n entries");
  for (Eigen::Index i = 0; i + 1 < lambda.size(); ++i)
    if (lambda[i] > lambda[i + 1] + 1e-15)
      throw validation_error("lambda sorted", "curvatures must be ascending");
  if (lambda.minCoeff() < -params.C_A - 1e-12 || lambda.maxCoeff() > params.C_A + 1e-12)
    throw validation_error("|lambda|<=C_A", "curvatures exceed the control bound");
  if (lambda[0] + lambda[1] < params.beta * params.c_H - 1e-12)
    throw validation_error("lambda1+lambda2>=beta*c_H", "input not uniformly 2-convex");

  int n = params.n;
  double mean = lambda.mean();
  if (!(mean > 0)) throw validation_error("mean(lambda)>0", "mean curvature direction degenerate");

  // Bootstrap remainder constant C1 with a reference gauge, then pick the
  // gauge quality from omega(beta c_H)/(2 C1), doubled for safety.
  PsiResult psi0 = build_psi(0.5);
  auto psi0_piece = std::make_shared<const PsiPiece>(psi0.N);
  MixedCurvatureGraph probe(lambda, delta, psi0_piece);
  double c1 = 0;
  auto dirs = sample_directions(n, 24);
  for (std::size_t i = 1; i <= 40; ++i) {
    double r = std::sqrt(2.0 * delta) * static_cast<double>(i) / 40.0;
    double t = r / delta;
    double weight = r + std::abs(psi0_piece->d1_times_t(t)) + std::abs(psi0_piece->d2_times_t2(t));
    for (const Vec& d : dirs) {
      Vec x = r * d;
      double etav = psi0_piece->jet(t).v;
      Mat W = graph_shape_operator(probe.grad(x), probe.hess(x));
      Mat Dm = Mat::Zero(n, n);
      for (int j = 0; j < n; ++j) Dm(j, j) = blend_diag_entry(lambda[j], mean, etav);
      double err = (W - Dm).cwiseAbs().maxCoeff();
      c1 = std::max(c1, err / std::max(weight, 1e-12));
    }
  }
  double c1_est = 2.0 * std::max(c1, 1e-6);
  double eps_psi = std::min(0.5, omega_modulus(params.beta * params.c_H) / (2.0 * c1_est));

  PsiResult psi = build_psi(eps_psi);
  auto psi_piece = std::make_shared<const PsiPiece>(psi.N);
  auto g = std::make_shared<MixedCurvatureGraph>(lambda, delta, psi_piece);

  double rmax = std::sqrt(2.0 * delta);
  double min_S = std::numeric_limits<double>::infinity();
  Vec worst = Vec::Zero(n);
  auto cert_dirs = sample_directions(n, n == 2 ? 0 : grid);
  if (n == 2) {
    cert_dirs.clear();
    for (std::size_t j = 0; j < grid; ++j) {
      double th = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(grid);
      Vec d(2);
      d << std::cos(th), std::sin(th);
      cert_dirs.push_back(d);
    }
  }
  for (std::size_t i = 0; i <= grid; ++i) {
    double r = rmax * static_cast<double>(i) / static_cast<double>(grid);
    for (const Vec& d : cert_dirs) {
      Vec x = r * d;
      double S = sum_two_smallest(graph_shape_operator(g->grad(x), g->hess(x)));
      if (S < min_S) {
        min_S = S;
        worst = x;
      }
    }
  }
  if (!(min_S > 0))
    throw construction_error("mixed-curvature deformation failed S>0 (delta above threshold)",
                             worst.norm());
  MixedDeformResult out;
  out.graph = g;
  out.min_S = min_S;
  out.worst_x = worst;
  out.psi_levels = psi.N;
  out.c1_estimate = c1_est;
  return out;
}

double mixed_delta_bar(const Vec& lambda, const ControlParams& params) {
  auto ok = [&](double d) {
    try {
      deform_mixed_curvatures(lambda, d, params, 48);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  };
  double hi = 0.25 / std::max(1.0, params.C_A);
  int guard = 0;
  while (!ok(hi) && guard++ < 40) hi /= 2;
  if (guard >= 40) return 0.0;
  double lo = hi;
  if (ok(2 * hi)) lo = 2 * hi;  // cheap expansion probe
  double bad = 4 * lo;
  for (int i = 0; i < 20; ++i) {
    double mid = 0.5 * (lo + bad);
    if (ok(mid))
      lo = mid;
    else
      bad = mid;
  }
  return lo;
}

SecondOrderApproxGraph::SecondOrderApproxGraph(std::shared_ptr<const GraphFunction> u, Vec lambda,
                                               double delta)
    : u_(std::move(u)), ulam_(std::move(lambda)), delta_(delta) {}

double SecondOrderApproxGraph::value(const Vec& x) const {
  double r = x.norm();
  if (r >= delta_) return u_->value(x);
  double e = chi_eps(r - delta_ / 2, delta_ / 2);
  double ul = ulam_.value(x);
  return (e == 0.0) ? ul : ul + e * (u_->value(x) - ul);
}

Vec SecondOrderApproxGraph::grad(const Vec& x) const {
  double r = x.norm();
  if (r >= delta_) return u_->grad(x);
  StepJet e = chi_eps_jet(r - delta_ / 2, delta_ / 2);
  Vec gl = ulam_.grad(x);
  if (e.v == 0.0 && e.d1 == 0.0) return gl;
  double E = u_->value(x) - ulam_.value(x);
  Vec dE = u_->grad(x) - gl;
  return gl + e.d1 * (x / r) * E + e.v * dE;
}

Mat SecondOrderApproxGraph::hess(const Vec& x) const {
  double r = x.norm();
  if (r >= delta_) return u_->hess(x);
  StepJet e = chi_eps_jet(r - delta_ / 2, delta_ / 2);
  Mat hl = ulam_.hess(x);
  if (e.v == 0.0 && e.d1 == 0.0 && e.d2 == 0.0) return hl;
  Eigen::Index n = x.size();
  double E = u_->value(x) - ulam_.value(x);
  Vec dE = u_->grad(x) - ulam_.grad(x);
  Mat d2E = u_->hess(x) - hl;
  Vec xr = x / r;
  Mat h = hl + e.d2 * (xr * xr.transpose()) * E +
          e.d1 * ((Mat::Identity(n, n) - xr * xr.transpose()) / r * E + xr * dE.transpose() +
                  dE * xr.transpose()) +
          e.v * d2E;
  return 0.5 * (h + h.transpose());
}

SecondOrderApproxResult second_order_approx(std::shared_ptr<const GraphFunction> u, double delta,
                                            const ControlParams& params) {
  params.validate();
  int n = u->dim();
  Vec zero = Vec::Zero(n);
  if (std::abs(u->value(zero)) > 1e-9 || u->grad(zero).norm() > 1e-9)
    throw validation_error("pointed gauge", "graph must vanish to first order at the origin");
  Eigen::SelfAdjointEigenSolver<Mat> es(u->hess(zero));
  Vec lambda = es.eigenvalues();

  double C = 4.0 * (params.D_A + params.C_A * params.C_A);
  ULambdaGraph ul(lambda);
  auto dirs = sample_directions(n, 16);
  for (std::size_t i = 1; i <= 32; ++i) {
    double r = delta * static_cast<double>(i) / 32.0;
    for (const Vec& d : dirs) {
      Vec x = r * d;
      double E = u->value(x) - ul.value(x);
      double dE = (u->grad(x) - ul.grad(x)).norm();
      double d2E = (u->hess(x) - ul.hess(x)).norm();
      if (std::abs(E) > C * cube(delta) || dE > C * sq(delta) || d2E > C * delta)
        throw validation_error("A-controlled", "remainder exceeds C*delta^{3-i} at this scale");
    }
  }

  auto g = std::make_shared<SecondOrderApproxGraph>(u, lambda, delta);
  double min_S = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= 64; ++i) {
    double r = delta * static_cast<double>(i) / 64.0;
    for (const Vec& d : dirs) {
      Vec x = r * d;
      min_S = std::min(min_S, sum_two_smallest(graph_shape_operator(g->grad(x), g->hess(x))));
    }
  }
  if (!(min_S > params.beta * params.c_H / 4.0))
    throw construction_error("second-order approximation failed S > beta*c_H/4", min_S);
  SecondOrderApproxResult out;
  out.graph = g;
  out.lambda = lambda;
  out.min_S = min_S;
  return out;
}

double zeta_threshold(const ControlParams& params) {
  params.validate();
  // The cap profile certifies ratio 0.45; beta above that can never hold on caps.
  if (params.beta > 0.45) return 0.0;
  auto tube_ok = [&](double zeta) {
    double r = zeta;  // b = 1, kappa = 1 worst case
    for (int i = 0; i <= 720; ++i) {
      double th = kPi * i / 720.0;
      PrincipalCurvatures pc = tube_curvatures(r, 1.0, th, params.n);
      if (pc.S < params.beta * pc.H) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 0.0999;
  if (tube_ok(hi)) return hi;
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    if (tube_ok(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace tc
