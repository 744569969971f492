#include "core/profile_build.hpp"

#include <algorithm>
#include <cmath>

#include "core/stepfn.hpp"

namespace tc {

double eval_chi(double t, double eps) { return chi_eps(t, eps); }

double eval_phi_tilde(double t, double delta) {
  if (!(delta > 0.0)) throw validation_error("delta>0", "phi_tilde needs delta > 0");
  return PhiTildePiece(delta).jet(t).v;
}

namespace {

// Reference-scale construction of the transition function, later dilated so
// that spt(phi') lands in (0,1). The quintic bridges the constant -1/2 to the
// 2-jet of phi_tilde(.;1) at t=1; the chi-blend flattens the tail onto 1/4.
ProfileFunction assemble_phi(double T) {
  const double t0 = 0.5;
  const double h = 1.0 - t0;
  const double K = 1.5 * h * h;
  const double sigma = 3.0 * T;

  std::vector<double> quintic{-0.5, 0.0, 0.0, (K / 2) / cube(h), -K / (h * h * h * h),
                              (K / 2) / (h * h * h * h * h)};

  ProfileFunction phi;
  phi.set_label("transition_phi");
  phi.append(-1.0, t0 / sigma, std::make_unique<ConstantPiece>(-0.5));
  phi.append(t0 / sigma, 1.0 / sigma,
             std::make_unique<AffinePiece>(std::make_unique<PolyPiece>(t0, quintic), sigma, 0.0,
                                           1.0, 0.0));
  phi.append(1.0 / sigma, T / sigma,
             std::make_unique<AffinePiece>(std::make_unique<PhiTildePiece>(1.0), sigma, 0.0, 1.0,
                                           0.0));
  phi.append(T / sigma, 1.0,
             std::make_unique<AffinePiece>(
                 std::make_unique<ChiBlendPiece>(std::make_unique<PhiTildePiece>(1.0),
                                                 std::make_unique<ConstantPiece>(0.25), T, 2.0 * T),
                 sigma, 0.0, 1.0, 0.0));
  phi.append(1.0, 2.0, std::make_unique<ConstantPiece>(0.25));
  phi.set_tails(ProfileFunction::Tail::kConstant, ProfileFunction::Tail::kConstant);
  return phi;
}

}  // namespace

TransitionPhi build_transition_phi() {
  chi_certified_bounds();
  for (double T : {250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0}) {
    ProfileFunction phi = assemble_phi(T);
    DefectReport q = phi.defect_report("Q", -1.0, 2.0, kDefaultResolution);
    double target = (T < 8000.0) ? 0.93 : kQBound;
    if (q.max_value <= target) return {std::move(phi), q};
  }
  DefectReport q = assemble_phi(8000.0).defect_report("Q", -1.0, 2.0, kDefaultResolution);
  throw construction_error("transition function failed Q certification", q.argmax);
}

const ProfileFunction& transition_phi() { return *transition_phi_shared(); }

std::shared_ptr<const ProfileFunction> transition_phi_shared() {
  static std::shared_ptr<const ProfileFunction> cached =
      std::make_shared<const ProfileFunction>(build_transition_phi().phi);
  return cached;
}

ProfileFunction blend_preserving_Q(const ProfileFunction& phi0, const ProfileFunction& phi1,
                                   double t_star, double eps) {
  if (!(t_star > 0)) throw validation_error("t_star>0", "blend point must be positive");
  if (!(eps > 0 && eps < t_star / 2)) throw validation_error("eps<t_star/2", "blend width too large");

  Jet2 j0 = phi0.jet(t_star);
  Jet2 j1 = phi1.jet(t_star);
  if (std::abs(j0.v - j1.v) > 1e-9 * std::max(1.0, std::abs(j0.v)))
    throw validation_error("phi0(t*)=phi1(t*)", "values differ at the gluing point");
  if (std::abs(j0.d1 - j1.d1) > 1e-9 * std::max(1.0, std::abs(j0.d1)))
    throw validation_error("phi0'(t*)=phi1'(t*)", "slopes differ at the gluing point");
  if (std::abs(t_star * t_star * (j0.d2 - j1.d2)) > 1e-5 * (1.0 + 1e-9))
    throw validation_error("|t*^2(phi0''-phi1'')|<=1e-5", "second-derivative gap too large");

  auto near_max_q = [&](const ProfileFunction& f) {
    double lo = std::max(f.domain_lo(), t_star - eps);
    double hi = std::min(f.domain_hi(), t_star + 2 * eps);
    if (!(hi > lo)) return -1.0;
    DefectReport r = f.defect_report("Q", lo, hi, std::max(eps / 64, 1e-12));
    return r.max_value;
  };
  if (near_max_q(phi0) > 0.9 + 1e-12)
    throw validation_error("Q[phi0]<=0.9 near t_star", "phi0 exceeds the margin");
  if (near_max_q(phi1) > 0.9 + 1e-12)
    throw validation_error("Q[phi1]<=0.9 near t_star", "phi1 exceeds the margin");

  auto p0 = phi0.shared_clone();
  auto p1 = phi1.shared_clone();

  ProfileFunction out;
  out.set_label("blend(" + phi0.label() + "," + phi1.label() + ")");
  ProfileFunction left = phi0.restricted(phi0.domain_lo(), t_star);
  for (std::size_t i = 0; i < left.piece_count(); ++i)
    out.append(left.breakpoints()[i], left.breakpoints()[i + 1], left.piece(i).clone());
  out.append(t_star, t_star + eps,
             std::make_unique<ChiBlendPiece>(std::make_unique<ProfileRefPiece>(p0),
                                             std::make_unique<ProfileRefPiece>(p1), t_star, eps));
  ProfileFunction right = phi1.restricted(t_star + eps, phi1.domain_hi());
  for (std::size_t i = 0; i < right.piece_count(); ++i)
    out.append(right.breakpoints()[i], right.breakpoints()[i + 1], right.piece(i).clone());

  DefectReport r = out.defect_report("Q", t_star - eps, t_star + 2 * eps,
                                     std::max(eps / 256, 1e-12));
  if (r.max_value > kQBound)
    throw construction_error("blend failed Q<=0.95 certification", r.argmax);
  return out;
}

ProfileFunction trim_to_taylor(const ProfileFunction& u, double t_star, double eps,
                               double extend_to) {
  if (!(eps > 0)) throw validation_error("eps>0", "trim width must be positive");
  if (t_star - eps < u.domain_lo() || t_star > u.domain_hi())
    throw validation_error("domain", "trim zone must lie inside the profile domain");
  if (extend_to <= t_star) extend_to = t_star;

  Jet2 j = u.jet(t_star);
  auto taylor_poly = std::make_unique<PolyPiece>(
      t_star, std::vector<double>{j.v, j.d1, 0.5 * j.d2});

  // Prefer the exact-series zone: needs high-order data from the piece that
  // covers [t_star-eps, t_star].
  std::optional<std::vector<double>> tail;
  const std::vector<double>& bp = u.breakpoints();
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    if (bp[p] <= t_star - eps && t_star <= bp[p + 1] + 1e-300) {
      auto full = u.piece(p).taylor(t_star, 10);
      if (full && full->size() >= 4) {
        tail = std::vector<double>(full->begin() + 3, full->end());
      }
      break;
    }
  }

  auto us = u.shared_clone();
  PiecePtr zone;
  if (tail) {
    zone = std::make_unique<TrimSeriesPiece>(std::make_unique<ProfileRefPiece>(us), t_star, eps,
                                             *tail);
  } else {
    zone = std::make_unique<ChiBlendPiece>(std::make_unique<ProfileRefPiece>(us),
                                           taylor_poly->clone(), t_star - eps, eps);
  }

  ProfileFunction out;
  out.set_label("trim(" + u.label() + ")");
  if (t_star - eps > u.domain_lo()) {
    ProfileFunction left = u.restricted(u.domain_lo(), t_star - eps);
    for (std::size_t i = 0; i < left.piece_count(); ++i)
      out.append(left.breakpoints()[i], left.breakpoints()[i + 1], left.piece(i).clone());
  }
  out.append(t_star - eps, t_star, std::move(zone));
  if (extend_to > t_star) out.append(t_star, extend_to, std::move(taylor_poly));

  DefectReport r = out.defect_report("P", out.domain_lo(), t_star, kDefaultResolution);
  if (!(r.min_value > 0))
    throw construction_error("trim failed P>0 certification (eps too large)", r.argmin);
  return out;
}

PsiResult build_psi(double eps) {
  if (!(eps > 0 && eps < 1)) throw validation_error("eps in (0,1)", "psi needs eps in (0,1)");
  long long N = static_cast<long long>(std::ceil(10000.0 / eps));
  PsiResult out;
  out.N = N;
  out.c_exp2 = -N;
  out.c = (N <= 1074) ? std::ldexp(1.0, static_cast<int>(-N)) : 0.0;
  auto piece = std::make_unique<PsiPiece>(N);

  // Levels are self-similar; sampling a few shallow and deep levels covers
  // the bound |t^2 psi''| + |t psi'| < eps.
  double worst = 0.0;
  PsiPiece probe(N);
  long long levels[] = {1, 2, 3, 5, 17, std::max<long long>(1, N / 2), N};
  for (long long k : levels) {
    if (k < 1 || k > N) continue;
    int e = static_cast<int>(std::max<long long>(1 - k, -1000));
    if (1 - k < -1000) continue;  // below double range; identical by similarity
    double t_hi = std::ldexp(1.0, e);
    for (int i = 1; i < 64; ++i) {
      double t = t_hi * (0.5 + 0.5 * i / 64.0);
      worst = std::max(worst, std::abs(probe.d2_times_t2(t)) + std::abs(probe.d1_times_t(t)));
    }
  }
  if (!(worst < eps))
    throw construction_error("psi failed |t^2 psi''|+|t psi'| < eps certification", worst);
  out.defect_max = worst;

  ProfileFunction psi;
  psi.set_label("psi");
  psi.append(0.0, 1.0, std::move(piece));
  psi.set_tails(ProfileFunction::Tail::kConstant, ProfileFunction::Tail::kConstant);
  out.psi = std::move(psi);
  return out;
}

double rho_of_delta(double delta) {
  const double k9 = (1e9 - 1.0) / 1e9;
  double d1sq = delta * k9 * (2.0 - delta * k9);
  return std::pow(d1sq, 1.5);
}

double delta_of_rho(double rho) {
  const double k9 = (1e9 - 1.0) / 1e9;
  double d1sq = std::pow(rho, 2.0 / 3.0);
  // delta*k9 solves x(2-x) = d1sq, the root in (0,1].
  double x = 1.0 - std::sqrt(std::max(0.0, 1.0 - d1sq));
  return x / k9;
}

namespace {

// Shared gauge for the parabola->cylinder flip: 1/12 - phi/3 runs 1/4 -> 0.
std::shared_ptr<const ProfileFunction> cylinder_gauge() {
  static std::shared_ptr<const ProfileFunction> cached = [] {
    ProfileFunction twelfth;
    twelfth.set_label("const_1_12");
    twelfth.append(-1.0, 2.0, std::make_unique<ConstantPiece>(1.0 / 12.0));
    twelfth.set_tails(ProfileFunction::Tail::kConstant, ProfileFunction::Tail::kConstant);
    ProfileFunction g =
        ProfileFunction::lin_comb(1.0, twelfth, -1.0 / 3.0, transition_phi(), "cyl_gauge");
    g.set_tails(ProfileFunction::Tail::kConstant, ProfileFunction::Tail::kConstant);
    return std::make_shared<const ProfileFunction>(std::move(g));
  }();
  return cached;
}

bool stage_ok(const ProfileFunction& stage, double lo, double hi, double res) {
  DefectReport p = stage.defect_report("P", lo, hi, res);
  if (!(p.min_value > 0)) return false;
  // positivity of the profile itself
  for (double x : stage.certification_grid(lo, hi, res))
    if (!(stage.eval(x) > 0)) return false;
  return true;
}

}  // namespace

CdeltaResult build_Cdelta_profile(double delta) {
  if (!(delta > 0 && delta < 1)) throw validation_error("delta in (0,1)", "C_delta needs delta in (0,1)");
  const double k9 = (1e9 - 1.0) / 1e9;
  CdeltaResult out;
  out.delta = delta;
  out.t_star = 1.0 - delta * k9;
  double eps_trim = delta / 2e9;
  if (eps_trim < 4.0 * std::numeric_limits<double>::epsilon())
    throw construction_error("delta too small for a double-precision trim zone", delta);
  out.delta1 = std::sqrt(delta * k9 * (2.0 - delta * k9));
  const double d1 = out.delta1;
  const double c1 = out.t_star / d1;
  out.t_min = 2.0 * out.t_star * d1 * d1;
  out.rho = cube(d1);
  out.x_sphere_end = out.t_star - eps_trim;

  ProfileFunction sphere;
  sphere.set_label("unit_sphere");
  sphere.append(-1.0, 1.0, std::make_unique<CirclePiece>(0.0, 1.0));

  // Stage 1+2: sphere trimmed to its 2nd-order Taylor polynomial at t_star.
  ProfileFunction trimmed = trim_to_taylor(sphere, out.t_star, eps_trim, out.t_star);

  auto phi = transition_phi_shared();

  // Stage 3: flip the quadratic coefficient from -1/(2 d1^3) to +1/(4 d1^3).
  double delta2 = d1 / 4.0;
  bool flip_ok = false;
  for (int iter = 0; iter < 120; ++iter) {
    if (delta2 < 0.5 * out.t_min) {
      ProfileFunction stage;
      stage.set_label("flip");
      stage.append(out.t_star, out.t_star + delta2,
                   std::make_unique<QuadGaugePiece>(out.t_star, d1, -c1, 1.0 / cube(d1), delta2,
                                                    phi));
      if (stage_ok(stage, out.t_star, out.t_star + delta2, delta2 / 512)) {
        flip_ok = true;
        break;
      }
    }
    delta2 *= 0.5;
    if (delta2 < 64.0 * std::numeric_limits<double>::epsilon() * out.t_star) break;
  }
  if (!flip_ok)
    throw construction_error("C_delta stage 'quadratic flip' failed P certification", out.t_star);
  out.delta2 = delta2;

  // Stage 5: flatten the parabola onto the cylinder (mirrored flip).
  double rho = out.rho;
  double delta3 = cube(d1) / 4.0;
  double vertex = out.t_star + out.t_min;
  bool flat_ok = false;
  for (int iter = 0; iter < 120; ++iter) {
    ProfileFunction stage;
    stage.set_label("flatten");
    stage.append(vertex, vertex + delta3,
                 std::make_unique<QuadGaugePiece>(vertex, rho, 0.0, 1.0 / cube(d1), delta3,
                                                  cylinder_gauge()));
    if (stage_ok(stage, vertex, vertex + delta3, delta3 / 512)) {
      flat_ok = true;
      break;
    }
    delta3 *= 0.5;
    if (delta3 < 64.0 * std::numeric_limits<double>::epsilon() * vertex) break;
  }
  if (!flat_ok)
    throw construction_error("C_delta stage 'flatten' failed P certification", vertex);
  out.delta3 = delta3;
  out.x_cyl = vertex + delta3;

  // Assemble the full profile.
  ProfileFunction u;
  u.set_label("C_delta");
  ProfileFunction left = trimmed.restricted(-1.0, out.t_star);
  for (std::size_t i = 0; i < left.piece_count(); ++i)
    u.append(left.breakpoints()[i], left.breakpoints()[i + 1], left.piece(i).clone());
  u.append(out.t_star, out.t_star + delta2,
           std::make_unique<QuadGaugePiece>(out.t_star, d1, -c1, 1.0 / cube(d1), delta2, phi));
  u.append(out.t_star + delta2, vertex,
           std::make_unique<PolyPiece>(out.t_star,
                                       std::vector<double>{d1, -c1, 1.0 / (4.0 * cube(d1))}));
  u.append(vertex, vertex + delta3,
           std::make_unique<QuadGaugePiece>(vertex, rho, 0.0, 1.0 / cube(d1), delta3,
                                            cylinder_gauge()));
  double cyl_len = std::max(0.5, delta);
  u.append(out.x_cyl, out.x_cyl + cyl_len, std::make_unique<ConstantPiece>(rho));
  u.set_tails(ProfileFunction::Tail::kError, ProfileFunction::Tail::kConstant);

  out.p_report = u.defect_report("P", -1.0, out.x_cyl + 0.5 * cyl_len, kDefaultResolution);
  if (!(out.p_report.min_value > 0))
    throw construction_error("C_delta failed the full P>0 certification", out.p_report.argmin);
  out.u_delta = std::move(u);
  return out;
}

StandardCapResult build_standard_cap_profile() {
  const double h = 0.02;
  const double x1 = 0.01;
  const double sphere_v = std::sqrt(1.0 - x1 * x1);
  const double w1 = 1.0 / (sphere_v * sphere_v * sphere_v);  // -u''(0.01) of the sphere
  const double I1 = (-x1 / sphere_v) / h;                    // integral of W
  const double I2 = (sphere_v - 1.0) / (h * h);              // integral of (1-s) W
  const double j = 40.0;
  double U = -I1 - w1 / (j + 1.0);
  double V = -I2 - w1 / ((j + 1.0) * (j + 2.0));
  double m = 2.0 * U / V - 3.0;
  double A = U * (m + 1.0) * (m + 2.0);
  if (!(U > 0 && V > 0 && m > 2.0 && A > 0))
    throw construction_error("standard cap transition solve failed", m);

  // u(x) = 1 - h^2 [ w1 s^{j+2}/((j+1)(j+2)) + A s^{m+2}/((m+1)(m+2)) - A s^{m+3}/((m+2)(m+3)) ]
  std::vector<double> coeffs{1.0, -h * h * w1 / ((j + 1.0) * (j + 2.0)),
                             -h * h * A / ((m + 1.0) * (m + 2.0)),
                             h * h * A / ((m + 2.0) * (m + 3.0))};
  std::vector<double> expos{0.0, j + 2.0, m + 2.0, m + 3.0};

  ProfileFunction u;
  u.set_label("standard_cap");
  u.append(-0.21, -0.01, std::make_unique<ConstantPiece>(1.0));
  u.append(-0.01, 0.01,
           std::make_unique<MonomialSumPiece>(-0.01, coeffs, expos, h));
  u.append(0.01, 1.0, std::make_unique<CirclePiece>(0.0, 1.0));
  u.set_tails(ProfileFunction::Tail::kConstant, ProfileFunction::Tail::kError);

  // Junction sanity at x = 0.01.
  Jet2 a = u.piece(1).jet(0.01);
  Jet2 b = u.piece(2).jet(0.01);
  if (std::abs(a.v - b.v) > 1e-12 || std::abs(a.d1 - b.d1) > 1e-10 ||
      std::abs(a.d2 - b.d2) > 1e-8)
    throw construction_error("standard cap junction mismatch", 0.01);

  StandardCapResult out;
  // Concavity certificate: u'' <= 0 on the whole profile.
  double max_d2 = -std::numeric_limits<double>::infinity();
  for (double x : u.certification_grid(-0.02, 1.0 - 1e-9, kDefaultResolution))
    max_d2 = std::max(max_d2, u.jet(x).d2);
  if (!(max_d2 <= 0.0))
    throw construction_error("standard cap failed concavity certification", max_d2);
  out.max_d2 = max_d2;

  // Uniform 2-convexity ratio for n = 2, 3 (poles approached, not touched).
  double min_ratio = std::numeric_limits<double>::infinity();
  for (int n = 2; n <= 3; ++n) {
    for (double x : u.certification_grid(-0.02, 1.0 - 1e-7, 1e-3)) {
      Jet2 jx = u.jet(x);
      double om = 1.0 + jx.d1 * jx.d1;
      double lm = -jx.d2 / std::pow(om, 1.5);
      double lc = 1.0 / (jx.v * std::sqrt(om));
      double S = (lm <= lc) ? lm + lc : 2.0 * lc;
      double H = lm + (n - 1) * lc;
      min_ratio = std::min(min_ratio, S / H);
    }
  }
  out.beta = 0.45;
  if (!(min_ratio >= out.beta))
    throw construction_error("standard cap failed beta-uniform certification", min_ratio);
  out.u_st = std::move(u);
  return out;
}

const ProfileFunction& standard_cap_profile() {
  static ProfileFunction cached = build_standard_cap_profile().u_st;
  return cached;
}

}  // namespace tc
