#include <algorithm>
#include <cmath>

#include "core/scene.hpp"

namespace tc {

namespace {

// Distance from x to the circle {center + r(cos t e1 + sin t e2)} embedded in
// the hyperplane through center orthogonal to axis.
double circle_distance(const Vec& x, const Vec& center, const Vec& axis, double r) {
  double d_ax = (x - center).dot(axis);
  Vec radial = x - center - d_ax * axis;
  double rho = radial.norm();
  return std::sqrt(d_ax * d_ax + sq(rho - r));
}

}  // namespace

// ---------------------------------------------------------------------- sphere

SpherePatch::SpherePatch(Vec center, double radius, std::vector<SphereHole> holes)
    : center_(std::move(center)), radius_(radius), holes_(std::move(holes)) {
  if (!(radius_ > 0)) throw validation_error("radius>0", "sphere patch needs positive radius");
  for (auto& h : holes_) {
    if (std::abs(h.axis.norm() - 1.0) > 1e-9)
      throw validation_error("hole axis", "hole axis must be a unit vector");
    if (!std::isfinite(h.cut)) h.cut = radius_ * h.cos_cap;
  }
}

bool SpherePatch::in_hole(const Vec& unit_dir, double slack) const {
  for (const auto& h : holes_)
    if (unit_dir.dot(h.axis) > h.cos_cap - slack) return true;
  return false;
}

void SpherePatch::certify_samples(int n, double, std::vector<CurvatureSample>& out) const {
  int N = ambient_dim();
  std::vector<Vec> dirs;
  for (int i = 0; i < N; ++i)
    for (double sgn : {1.0, -1.0}) {
      Vec d = Vec::Zero(N);
      d[i] = sgn;
      dirs.push_back(d);
    }
  SplitMix64 rng(71);
  for (int k = 0; k < 16; ++k) {
    Vec d(N);
    for (int i = 0; i < N; ++i) d[i] = rng.uniform(-1, 1);
    if (d.norm() < 1e-3) continue;
    dirs.push_back(d / d.norm());
  }
  for (const Vec& d : dirs) {
    if (in_hole(d)) continue;
    CurvatureSample s;
    s.point = center_ + radius_ * d;
    s.pc = PrincipalCurvatures::from_values(
        std::vector<double>(static_cast<std::size_t>(n), 1.0 / radius_));
    s.patch_id = id;
    out.push_back(std::move(s));
  }
}

void SpherePatch::surface_points(double res, std::vector<Vec>& out) const {
  int N = ambient_dim();
  Vec pole = Vec::Zero(N);
  if (!holes_.empty())
    pole = holes_[0].axis;
  else
    pole[N - 1] = 1.0;
  Vec e1, e2;
  perp_frame(pole, e1, e2);
  int rings = std::max(8, static_cast<int>(std::ceil(kPi * radius_ / res)));
  for (int i = 0; i <= rings; ++i) {
    double th = kPi * i / rings;
    double rho = radius_ * std::sin(th);
    int m = std::max(1, static_cast<int>(std::ceil(2 * kPi * rho / res)));
    for (int j = 0; j < m; ++j) {
      double az = 2 * kPi * j / m;
      Vec d = std::cos(th) * pole + std::sin(th) * (std::cos(az) * e1 + std::sin(az) * e2);
      if (in_hole(d)) continue;
      out.push_back(center_ + radius_ * d);
    }
  }
}

bool SpherePatch::solid_contains(const Vec& x, double tol) const {
  if ((x - center_).norm() > radius_ + tol) return false;
  // the solid is the ball cut by a half-space at each string contact
  for (const auto& h : holes_)
    if ((x - center_).dot(h.axis) > h.cut + tol) return false;
  return true;
}

PrincipalCurvatures SpherePatch::curvature_at(const Vec&, int n) const {
  return PrincipalCurvatures::from_values(
      std::vector<double>(static_cast<std::size_t>(n), 1.0 / radius_));
}

double SpherePatch::surface_distance(const Vec& x) const {
  Vec d = x - center_;
  double nm = d.norm();
  if (nm < 1e-14) return radius_;
  if (!in_hole(Vec(d / nm))) return std::abs(nm - radius_);
  double best = 1e300;
  for (const auto& h : holes_) {
    double sth = std::sqrt(std::max(0.0, 1.0 - h.cos_cap * h.cos_cap));
    best = std::min(best, circle_distance(x, Vec(center_ + radius_ * h.cos_cap * h.axis), h.axis,
                                          radius_ * sth));
  }
  return best;
}

void SpherePatch::bounding_sphere(Vec& c, double& r) const {
  c = center_;
  r = radius_;
}

double SpherePatch::area() const {
  double a = 4 * kPi * radius_ * radius_;
  for (const auto& h : holes_) a -= 2 * kPi * radius_ * radius_ * (1.0 - h.cos_cap);
  return std::max(a, 0.0);
}

std::unique_ptr<Patch> SpherePatch::transformed(const RigidMotion& m) const {
  std::vector<SphereHole> holes = holes_;
  for (auto& h : holes) h.axis = m.apply_dir(h.axis);
  auto p = std::make_unique<SpherePatch>(m.apply(center_), radius_, std::move(holes));
  p->id = id;
  return p;
}

// ------------------------------------------------------------------------ tube

TubePatch::TubePatch(CurvePtr spine, double s0, double s1, double radius)
    : spine_(std::move(spine)), s0_(s0), s1_(s1), r_(radius) {
  if (!(r_ > 0)) throw validation_error("radius>0", "tube radius must be positive");
  if (!(s1_ > s0_)) throw validation_error("s1>s0", "empty tube range");
  build_frames();
}

void TubePatch::build_frames() {
  // Rotation-minimizing frame by the double-reflection method.
  frame_count_ = std::min<std::size_t>(20000, std::max<std::size_t>(129, 512));
  fr_n1_.resize(frame_count_);
  fr_n2_.resize(frame_count_);
  Vec t0 = spine_->tangent(s0_);
  Vec e1, e2;
  perp_frame(t0, e1, e2);
  fr_n1_[0] = e1;
  fr_n2_[0] = e2;
  for (std::size_t i = 1; i < frame_count_; ++i) {
    double sa = s0_ + (s1_ - s0_) * static_cast<double>(i - 1) / static_cast<double>(frame_count_ - 1);
    double sb = s0_ + (s1_ - s0_) * static_cast<double>(i) / static_cast<double>(frame_count_ - 1);
    Vec xa = spine_->position(sa), xb = spine_->position(sb);
    Vec ta = spine_->tangent(sa), tb = spine_->tangent(sb);
    Vec v1 = xb - xa;
    double c1 = v1.squaredNorm();
    Vec n1 = fr_n1_[i - 1], n2 = fr_n2_[i - 1];
    if (c1 > 1e-28) {
      Vec n1L = n1 - (2.0 / c1) * v1.dot(n1) * v1;
      Vec n2L = n2 - (2.0 / c1) * v1.dot(n2) * v1;
      Vec tL = ta - (2.0 / c1) * v1.dot(ta) * v1;
      Vec v2 = tb - tL;
      double c2 = v2.squaredNorm();
      if (c2 > 1e-28) {
        n1 = n1L - (2.0 / c2) * v2.dot(n1L) * v2;
        n2 = n2L - (2.0 / c2) * v2.dot(n2L) * v2;
      } else {
        n1 = n1L;
        n2 = n2L;
      }
    }
    n1 -= n1.dot(tb) * tb;
    n1.normalize();
    n2 -= n2.dot(tb) * tb + n2.dot(n1) * n1;
    n2.normalize();
    fr_n1_[i] = n1;
    fr_n2_[i] = n2;
  }
}

void TubePatch::frame(double s, Vec& n1, Vec& n2) const {
  double w = (s - s0_) / (s1_ - s0_) * static_cast<double>(frame_count_ - 1);
  std::size_t i = std::min<std::size_t>(frame_count_ - 1,
                                        static_cast<std::size_t>(std::max(0.0, w)));
  Vec t = spine_->tangent(s);
  n1 = fr_n1_[i] - fr_n1_[i].dot(t) * t;
  n1.normalize();
  n2 = fr_n2_[i] - fr_n2_[i].dot(t) * t - fr_n2_[i].dot(n1) * n1;
  n2.normalize();
}

Vec TubePatch::ring_point(double s, double theta) const {
  Vec n1, n2;
  frame(s, n1, n2);
  return spine_->position(s) + r_ * (std::cos(theta) * n1 + std::sin(theta) * n2);
}

void TubePatch::certify_samples(int n, double res_frac, std::vector<CurvatureSample>& out) const {
  bool straight = spine_->kind() == "segment";
  std::size_t s_count = straight ? 2 : std::min<std::size_t>(2000, std::max<std::size_t>(
      64, static_cast<std::size_t>(5.12 / std::max(res_frac, 1e-4))));
  std::size_t t_count = 64;
  for (std::size_t i = 0; i <= s_count; ++i) {
    double s = s0_ + (s1_ - s0_) * static_cast<double>(i) / static_cast<double>(s_count);
    Vec kv = spine_->curvature_vector(s);
    double kap = kv.norm();
    Vec n1, n2;
    frame(s, n1, n2);
    double theta_k = 0.0;
    if (kap > 1e-14) theta_k = std::atan2(kv.dot(n2), kv.dot(n1));
    for (std::size_t j = 0; j < t_count; ++j) {
      double th = 2 * kPi * static_cast<double>(j) / static_cast<double>(t_count);
      CurvatureSample cs;
      cs.pc = tube_curvatures(r_, kap, th - theta_k, n);
      cs.point = spine_->position(s) + r_ * (std::cos(th) * n1 + std::sin(th) * n2);
      cs.patch_id = id;
      cs.u = s;
      cs.v = th;
      out.push_back(std::move(cs));
    }
  }
}

void TubePatch::surface_points(double res, std::vector<Vec>& out) const {
  std::size_t s_count = std::max<std::size_t>(2, static_cast<std::size_t>((s1_ - s0_) / res));
  std::size_t t_count = std::max<std::size_t>(3, static_cast<std::size_t>(2 * kPi * r_ / res));
  for (std::size_t i = 0; i <= s_count; ++i) {
    double s = s0_ + (s1_ - s0_) * static_cast<double>(i) / static_cast<double>(s_count);
    for (std::size_t j = 0; j < t_count; ++j)
      out.push_back(ring_point(s, 2 * kPi * static_cast<double>(j) / static_cast<double>(t_count)));
  }
}

bool TubePatch::solid_contains(const Vec& x, double tol) const {
  auto [s, d] = project_to_curve(*spine_, x, s0_, s1_);
  return d <= r_ + tol;
}

double TubePatch::surface_distance(const Vec& x) const {
  auto [s, d] = project_to_curve(*spine_, x, s0_, s1_);
  double lateral = std::abs(d - r_);
  // ends: distance to the end rings
  Vec n1, n2;
  frame(s0_, n1, n2);
  double de0 = circle_distance(x, spine_->position(s0_), Vec(spine_->tangent(s0_)), r_);
  double de1 = circle_distance(x, spine_->position(s1_), Vec(spine_->tangent(s1_)), r_);
  if (s <= s0_ + 1e-12 || s >= s1_ - 1e-12) return std::min({lateral, de0, de1});
  return lateral;
}

PrincipalCurvatures TubePatch::curvature_at(const Vec& x, int n) const {
  auto [s, d] = project_to_curve(*spine_, x, s0_, s1_);
  Vec kv = spine_->curvature_vector(s);
  double kap = kv.norm();
  double theta = 0.0;
  if (kap > 1e-14 && d > 1e-14) {
    Vec radial = x - spine_->position(s);
    radial -= radial.dot(spine_->tangent(s)) * spine_->tangent(s);
    theta = std::acos(std::clamp(radial.dot(kv) / (radial.norm() * kap), -1.0, 1.0));
  }
  return tube_curvatures(r_, kap, theta, n);
}

void TubePatch::bounding_sphere(Vec& c, double& r) const {
  Vec a = spine_->position(s0_), b = spine_->position(s1_);
  c = 0.5 * (a + b);
  double reach = 0;
  for (int i = 0; i <= 16; ++i) {
    double s = s0_ + (s1_ - s0_) * i / 16.0;
    reach = std::max(reach, (spine_->position(s) - c).norm());
  }
  r = reach + r_ * 1.5;
}

double TubePatch::area() const { return 2 * kPi * r_ * (s1_ - s0_); }

std::unique_ptr<Patch> TubePatch::transformed(const RigidMotion& m) const {
  auto p = std::make_unique<TubePatch>(spine_->transformed(m), s0_, s1_, r_);
  p->id = id;
  return p;
}

// ------------------------------------------------------------------ revolution

RevolutionPatch::RevolutionPatch(Vec origin, Vec axis,
                                 std::shared_ptr<const ProfileFunction> profile, double x0,
                                 double x1)
    : origin_(std::move(origin)), axis_(std::move(axis)), profile_(std::move(profile)), x0_(x0),
      x1_(x1) {
  if (std::abs(axis_.norm() - 1.0) > 1e-9)
    throw validation_error("axis unit", "revolution axis must be a unit vector");
  if (!(x1_ > x0_)) throw validation_error("x1>x0", "empty revolution range");
}

Vec RevolutionPatch::ring_point(double x, double theta) const {
  Vec e1, e2;
  perp_frame(axis_, e1, e2);
  double u = profile_->eval(x);
  return origin_ + x * axis_ + u * (std::cos(theta) * e1 + std::sin(theta) * e2);
}

void RevolutionPatch::local_coords(const Vec& p, double& xi, double& rho) const {
  Vec d = p - origin_;
  xi = d.dot(axis_);
  rho = (d - xi * axis_).norm();
}

void RevolutionPatch::certify_samples(int n, double res_frac,
                                      std::vector<CurvatureSample>& out) const {
  double res = std::max(1e-6, res_frac) * (x1_ - x0_);
  std::vector<double> grid = profile_->certification_grid(x0_, x1_, res);
  // geometric refinement toward pole ends (profile -> 0)
  double span = x1_ - x0_;
  for (int end = 0; end < 2; ++end) {
    double xe = end == 0 ? x0_ : x1_;
    double ue = profile_->eval(xe);
    if (std::abs(ue) < 1e-6 * span) {
      for (int k = 2; k < 44; ++k) {
        double x = end == 0 ? x0_ + span * std::ldexp(1.0, -k) : x1_ - span * std::ldexp(1.0, -k);
        grid.push_back(x);
      }
    }
  }
  std::sort(grid.begin(), grid.end());
  Vec e1, e2;
  perp_frame(axis_, e1, e2);
  double scale = 0;
  for (double x : grid) scale = std::max(scale, std::abs(profile_->eval(x)));
  for (double x : grid) {
    Jet2 j = profile_->jet(x);
    if (!(j.v > 1e-9 * scale) || !std::isfinite(j.d1) || !std::isfinite(j.d2)) continue;
    CurvatureSample cs;
    cs.pc = revolution_curvatures(j.v, j.d1, j.d2, n);
    cs.point = origin_ + x * axis_ + j.v * e1;
    cs.patch_id = id;
    cs.u = x;
    out.push_back(std::move(cs));
  }
}

void RevolutionPatch::surface_points(double res, std::vector<Vec>& out) const {
  Vec e1, e2;
  perp_frame(axis_, e1, e2);
  double x = x0_;
  int guard = 0;
  while (x <= x1_ && guard++ < 2000000) {
    Jet2 j = profile_->jet(x);
    double u = std::max(j.v, 0.0);
    int m = std::max(1, static_cast<int>(std::ceil(2 * kPi * u / res)));
    for (int k = 0; k < m; ++k) {
      double th = 2 * kPi * k / m;
      out.push_back(origin_ + x * axis_ + u * (std::cos(th) * e1 + std::sin(th) * e2));
    }
    double slope = std::isfinite(j.d1) ? std::abs(j.d1) : 1e6;
    x += res / std::sqrt(1.0 + slope * slope);
  }
}

bool RevolutionPatch::solid_contains(const Vec& x, double tol) const {
  double xi, rho;
  local_coords(x, xi, rho);
  if (xi < x0_ - tol || xi > x1_ + tol) return false;
  double u = profile_->eval(std::clamp(xi, x0_, x1_));
  return rho <= u + tol;
}

double RevolutionPatch::surface_distance(const Vec& x) const {
  double xi, rho;
  local_coords(x, xi, rho);
  double best = 1e300;
  int m = 256;
  for (int i = 0; i <= m; ++i) {
    double xx = x0_ + (x1_ - x0_) * i / static_cast<double>(m);
    double u = profile_->eval(xx);
    best = std::min(best, std::sqrt(sq(xx - xi) + sq(u - rho)));
  }
  return best;
}

PrincipalCurvatures RevolutionPatch::curvature_at(const Vec& x, int n) const {
  double xi, rho;
  local_coords(x, xi, rho);
  xi = std::clamp(xi, x0_, x1_);
  Jet2 j = profile_->jet(xi);
  return revolution_curvatures(std::max(j.v, 1e-12), j.d1, j.d2, n);
}

void RevolutionPatch::bounding_sphere(Vec& c, double& r) const {
  double umax = 0;
  for (int i = 0; i <= 64; ++i)
    umax = std::max(umax, profile_->eval(x0_ + (x1_ - x0_) * i / 64.0));
  double mid = 0.5 * (x0_ + x1_);
  c = origin_ + mid * axis_;
  r = std::sqrt(sq(0.5 * (x1_ - x0_)) + sq(umax)) + 1e-12;
}

double RevolutionPatch::area() const {
  double a = 0;
  int m = 512;
  for (int i = 0; i < m; ++i) {
    double xa = x0_ + (x1_ - x0_) * i / static_cast<double>(m);
    double xb = x0_ + (x1_ - x0_) * (i + 1) / static_cast<double>(m);
    double ua = std::max(0.0, profile_->eval(xa));
    double ub = std::max(0.0, profile_->eval(xb));
    double ds = std::sqrt(sq(xb - xa) + sq(ub - ua));
    a += kPi * (ua + ub) * ds;
  }
  return a;
}

std::unique_ptr<Patch> RevolutionPatch::transformed(const RigidMotion& m) const {
  auto p = std::make_unique<RevolutionPatch>(m.apply(origin_), m.apply_dir(axis_), profile_, x0_,
                                             x1_);
  p->id = id;
  return p;
}

// -------------------------------------------------------------------- meridian

MeridianPatch::MeridianPatch(Vec origin, Vec axis, std::vector<Node> nodes,
                             std::vector<SphereHole> holes)
    : origin_(std::move(origin)), axis_(std::move(axis)), nodes_(std::move(nodes)),
      holes_(std::move(holes)) {
  if (nodes_.size() < 3) throw validation_error("nodes", "meridian needs at least 3 nodes");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (nodes_[i].phi < nodes_[i - 1].phi - 1e-12)
      throw validation_error("phi sorted", "meridian nodes must be sorted by normal angle");
}

Vec MeridianPatch::ring_point(const Node& nd, double theta) const {
  Vec e1, e2;
  perp_frame(axis_, e1, e2);
  return origin_ + nd.x * axis_ + nd.y * (std::cos(theta) * e1 + std::sin(theta) * e2);
}

void MeridianPatch::certify_samples(int n, double, std::vector<CurvatureSample>& out) const {
  double scale = 0;
  for (const auto& nd : nodes_) scale = std::max(scale, std::abs(nd.y) + std::abs(nd.x));
  Vec e1, e2;
  perp_frame(axis_, e1, e2);
  for (const auto& nd : nodes_) {
    double lm = (std::isfinite(nd.r_merid) && nd.r_merid > 0) ? 1.0 / nd.r_merid : 0.0;
    double lc;
    if (nd.y > 1e-9 * scale)
      lc = std::sin(nd.phi) / nd.y;
    else
      lc = lm;  // umbilic pole limit
    Vec dir = std::cos(nd.phi) > 0.999999
                  ? axis_
                  : Vec((nd.x * axis_ + nd.y * e1) / std::max(1e-300, std::hypot(nd.x, nd.y)));
    (void)dir;
    // hole exclusion by direction from the origin
    Vec p = origin_ + nd.x * axis_ + nd.y * e1;
    Vec rel = p - origin_;
    double nm = rel.norm();
    if (nm > 1e-12) {
      bool excluded = false;
      for (const auto& h : holes_)
        if (rel.dot(h.axis) / nm > h.cos_cap) excluded = true;
      if (excluded) continue;
    }
    std::vector<double> ls(static_cast<std::size_t>(n), lc);
    ls[0] = lm;
    CurvatureSample cs;
    cs.pc = PrincipalCurvatures::from_values(std::move(ls));
    cs.point = p;
    cs.patch_id = id;
    cs.u = nd.phi;
    out.push_back(std::move(cs));
  }
}

void MeridianPatch::surface_points(double res, std::vector<Vec>& out) const {
  Vec e1, e2;
  perp_frame(axis_, e1, e2);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (i > 0) {
      double ds = std::hypot(nodes_[i].x - nodes_[i - 1].x, nodes_[i].y - nodes_[i - 1].y);
      if (ds < 0.2 * res && i + 1 < nodes_.size()) continue;
    }
    const Node& nd = nodes_[i];
    int m = std::max(1, static_cast<int>(std::ceil(2 * kPi * nd.y / res)));
    for (int k = 0; k < m; ++k) {
      double th = 2 * kPi * k / m;
      Vec p = origin_ + nd.x * axis_ + nd.y * (std::cos(th) * e1 + std::sin(th) * e2);
      Vec rel = p - origin_;
      double nm = rel.norm();
      bool excluded = false;
      if (nm > 1e-12)
        for (const auto& h : holes_)
          if (rel.dot(h.axis) / nm > h.cos_cap) excluded = true;
      if (!excluded) out.push_back(p);
    }
  }
}

bool MeridianPatch::solid_contains(const Vec& x, double tol) const {
  Vec d = x - origin_;
  double xi = d.dot(axis_);
  double rho = (d - xi * axis_).norm();
  if (xi < nodes_.front().x - tol || xi > nodes_.back().x + tol) return false;
  // x is monotone in phi for convex meridians; find the bracketing nodes.
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), xi,
                             [](const Node& nd, double v) { return nd.x < v; });
  if (it == nodes_.begin()) return rho <= nodes_.front().y + tol;
  if (it == nodes_.end()) return rho <= nodes_.back().y + tol;
  const Node& b = *it;
  const Node& a = *(it - 1);
  double w = (b.x - a.x) > 1e-300 ? (xi - a.x) / (b.x - a.x) : 0.0;
  double y = (1 - w) * a.y + w * b.y;
  return rho <= y + tol;
}

double MeridianPatch::surface_distance(const Vec& x) const {
  Vec d = x - origin_;
  double xi = d.dot(axis_);
  double rho = (d - xi * axis_).norm();
  double best = 1e300;
  for (const auto& nd : nodes_) best = std::min(best, std::hypot(nd.x - xi, nd.y - rho));
  return best;
}

void MeridianPatch::bounding_sphere(Vec& c, double& r) const {
  double xmin = nodes_.front().x, xmax = nodes_.back().x, ymax = 0;
  for (const auto& nd : nodes_) ymax = std::max(ymax, nd.y);
  double mid = 0.5 * (xmin + xmax);
  c = origin_ + mid * axis_;
  r = std::sqrt(sq(0.5 * (xmax - xmin)) + sq(ymax)) + 1e-12;
}

double MeridianPatch::area() const {
  double a = 0;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    double ds = std::hypot(nodes_[i].x - nodes_[i - 1].x, nodes_[i].y - nodes_[i - 1].y);
    a += kPi * (nodes_[i].y + nodes_[i - 1].y) * ds;
  }
  return a;
}

PrincipalCurvatures MeridianPatch::curvature_at(const Vec& x, int n) const {
  Vec d = x - origin_;
  double xi = d.dot(axis_);
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), xi,
                             [](const Node& nd, double v) { return nd.x < v; });
  const Node& nd = (it == nodes_.end()) ? nodes_.back() : *it;
  double scale = std::abs(nd.x) + std::abs(nd.y) + 1e-300;
  double lm = (std::isfinite(nd.r_merid) && nd.r_merid > 0) ? 1.0 / nd.r_merid : 0.0;
  double lc = nd.y > 1e-9 * scale ? std::sin(nd.phi) / nd.y : lm;
  std::vector<double> ls(static_cast<std::size_t>(n), lc);
  ls[0] = lm;
  return PrincipalCurvatures::from_values(std::move(ls));
}

double MeridianPatch::support(const Vec& d) const {
  double d_ax = d.dot(axis_);
  double d_perp = (d - d_ax * axis_).norm();
  double best = -1e300;
  for (const auto& nd : nodes_)
    best = std::max(best, d.dot(origin_) + nd.x * d_ax + nd.y * d_perp);
  return best;
}

std::unique_ptr<Patch> MeridianPatch::transformed(const RigidMotion& m) const {
  std::vector<SphereHole> holes = holes_;
  for (auto& h : holes) h.axis = m.apply_dir(h.axis);
  auto p = std::make_unique<MeridianPatch>(m.apply(origin_), m.apply_dir(axis_), nodes_,
                                           std::move(holes));
  p->id = id;
  return p;
}

}  // namespace tc
