#include "core/curve.hpp"

#include <algorithm>
#include <cmath>

#include "core/stepfn.hpp"

namespace tc {

RigidMotion RigidMotion::identity(int dim) {
  return {Mat::Identity(dim, dim), Vec::Zero(dim)};
}

SegmentCurve::SegmentCurve(Vec a, Vec b) : a_(std::move(a)) {
  Vec d = b - a_;
  len_ = d.norm();
  if (!(len_ > 0)) throw validation_error("segment", "degenerate segment");
  dir_ = d / len_;
}

std::shared_ptr<CurveComponent> SegmentCurve::transformed(const RigidMotion& m) const {
  return std::make_shared<SegmentCurve>(m.apply(a_), m.apply(a_ + len_ * dir_));
}

ArcCurve::ArcCurve(Vec center, double radius, Vec e1, Vec e2, double sweep_angle)
    : center_(std::move(center)), e1_(std::move(e1)), e2_(std::move(e2)), radius_(radius),
      sweep_(sweep_angle) {
  if (!(radius_ > 0 && sweep_ > 0)) throw validation_error("arc", "bad radius or sweep");
  if (std::abs(e1_.norm() - 1) > 1e-9 || std::abs(e2_.norm() - 1) > 1e-9 ||
      std::abs(e1_.dot(e2_)) > 1e-9)
    throw validation_error("arc frame", "e1,e2 must be orthonormal");
}

Vec ArcCurve::position(double s) const {
  double a = s / radius_;
  return center_ + radius_ * (std::cos(a) * e1_ + std::sin(a) * e2_);
}

Vec ArcCurve::tangent(double s) const {
  double a = s / radius_;
  return -std::sin(a) * e1_ + std::cos(a) * e2_;
}

Vec ArcCurve::curvature_vector(double s) const {
  double a = s / radius_;
  return (-(std::cos(a) * e1_ + std::sin(a) * e2_)) / radius_;
}

std::shared_ptr<CurveComponent> ArcCurve::transformed(const RigidMotion& m) const {
  return std::make_shared<ArcCurve>(m.apply(center_), radius_, m.apply_dir(e1_),
                                    m.apply_dir(e2_), sweep_);
}

SplineCurve::SplineCurve(std::vector<Vec> points) : pts_(std::move(points)) {
  build(nullptr, nullptr);
}

SplineCurve::SplineCurve(std::vector<Vec> points, Vec t0, Vec t1) : pts_(std::move(points)) {
  build(&t0, &t1);
}

void SplineCurve::build(const Vec* t0, const Vec* t1) {
  std::size_t k = pts_.size();
  if (k < 3) throw validation_error("spline", "need at least 3 knots");
  dim_ = static_cast<int>(pts_[0].size());
  double total = 0;
  for (std::size_t i = 0; i + 1 < k; ++i) total += (pts_[i + 1] - pts_[i]).norm();
  len_ = total;
  h_ = len_ / static_cast<double>(k - 1);
  if (!(h_ > 0)) throw validation_error("spline", "zero-length spline");

  // Tridiagonal solve for knot second derivatives (natural or clamped ends).
  std::vector<double> a(k, 0), b(k, 0), c(k, 0);
  std::vector<Vec> d(k, Vec::Zero(dim_));
  if (t0) {
    b[0] = 2, c[0] = 1;
    d[0] = 6.0 / h_ * ((pts_[1] - pts_[0]) / h_ - *t0);
  } else {
    b[0] = 1;
  }
  for (std::size_t i = 1; i + 1 < k; ++i) {
    a[i] = 1, b[i] = 4, c[i] = 1;
    d[i] = 6.0 * (pts_[i - 1] - 2 * pts_[i] + pts_[i + 1]) / (h_ * h_);
  }
  if (t1) {
    a[k - 1] = 1, b[k - 1] = 2;
    d[k - 1] = 6.0 / h_ * (*t1 - (pts_[k - 1] - pts_[k - 2]) / h_);
  } else {
    b[k - 1] = 1;
  }
  for (std::size_t i = 1; i < k; ++i) {
    double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  m_.assign(k, Vec::Zero(dim_));
  m_[k - 1] = d[k - 1] / b[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
}

void SplineCurve::eval(double s, Vec* p, Vec* d1, Vec* d2) const {
  s = std::clamp(s, 0.0, len_);
  std::size_t i = std::min(static_cast<std::size_t>(s / h_), pts_.size() - 2);
  double sl = s - h_ * static_cast<double>(i);
  double sr = h_ - sl;
  const Vec& P0 = pts_[i];
  const Vec& P1 = pts_[i + 1];
  const Vec& M0 = m_[i];
  const Vec& M1 = m_[i + 1];
  if (p)
    *p = M0 * (sr * sr * sr) / (6 * h_) + M1 * (sl * sl * sl) / (6 * h_) +
         (P0 / h_ - M0 * h_ / 6) * sr + (P1 / h_ - M1 * h_ / 6) * sl;
  if (d1)
    *d1 = -M0 * (sr * sr) / (2 * h_) + M1 * (sl * sl) / (2 * h_) - (P0 / h_ - M0 * h_ / 6) +
          (P1 / h_ - M1 * h_ / 6);
  if (d2) *d2 = M0 * sr / h_ + M1 * sl / h_;
}

Vec SplineCurve::position(double s) const {
  Vec p;
  eval(s, &p, nullptr, nullptr);
  return p;
}

Vec SplineCurve::tangent(double s) const {
  Vec d1;
  eval(s, nullptr, &d1, nullptr);
  double nm = d1.norm();
  if (!(nm > 0)) throw validation_error("spline", "vanishing velocity");
  return d1 / nm;
}

Vec SplineCurve::curvature_vector(double s) const {
  Vec d1, d2;
  eval(s, nullptr, &d1, &d2);
  double v2 = d1.squaredNorm();
  return (d2 - (d2.dot(d1) / v2) * d1) / v2;
}

std::shared_ptr<CurveComponent> SplineCurve::transformed(const RigidMotion& m) const {
  auto out = std::make_shared<SplineCurve>(*this);
  for (auto& p : out->pts_) p = m.apply(p);
  for (auto& v : out->m_) v = m.apply_dir(v);
  return out;
}

SubCurve::SubCurve(CurvePtr base, double s0, double s1) : base_(std::move(base)), s0_(s0), s1_(s1) {
  if (!(s1_ > s0_ && s0_ >= -1e-12 && s1_ <= base_->length() + 1e-9))
    throw validation_error("subcurve", "range outside base curve");
}

std::shared_ptr<CurveComponent> SubCurve::transformed(const RigidMotion& m) const {
  return std::make_shared<SubCurve>(base_->transformed(m), s0_, s1_);
}

ChainCurve::ChainCurve(std::vector<CurvePtr> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw validation_error("chain", "empty chain");
  offsets_.push_back(0);
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i > 0) {
      double gap = (parts_[i]->start() - parts_[i - 1]->end()).norm();
      if (gap > 1e-9) throw validation_error("chain", "parts are not contiguous");
    }
    len_ += parts_[i]->length();
    offsets_.push_back(len_);
  }
}

std::pair<std::size_t, double> ChainCurve::locate(double s) const {
  s = std::clamp(s, 0.0, len_);
  std::size_t i =
      static_cast<std::size_t>(std::upper_bound(offsets_.begin(), offsets_.end(), s) -
                               offsets_.begin());
  i = (i == 0) ? 0 : std::min(i - 1, parts_.size() - 1);
  return {i, s - offsets_[i]};
}

Vec ChainCurve::position(double s) const {
  auto [i, t] = locate(s);
  return parts_[i]->position(t);
}
Vec ChainCurve::tangent(double s) const {
  auto [i, t] = locate(s);
  return parts_[i]->tangent(t);
}
Vec ChainCurve::curvature_vector(double s) const {
  auto [i, t] = locate(s);
  return parts_[i]->curvature_vector(t);
}

std::shared_ptr<CurveComponent> ChainCurve::transformed(const RigidMotion& m) const {
  std::vector<CurvePtr> out;
  out.reserve(parts_.size());
  for (const auto& p : parts_) out.push_back(p->transformed(m));
  return std::make_shared<ChainCurve>(std::move(out));
}

namespace {

CurvePtr spline_from_formula_impl(const std::function<Vec(double)>& f, double t0, double t1,
                                  std::size_t dense, std::size_t knots, bool clamped) {
  std::vector<Vec> samples;
  samples.reserve(dense + 1);
  for (std::size_t i = 0; i <= dense; ++i)
    samples.push_back(f(t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(dense)));
  std::vector<double> cum(samples.size(), 0.0);
  for (std::size_t i = 1; i < samples.size(); ++i)
    cum[i] = cum[i - 1] + (samples[i] - samples[i - 1]).norm();
  double L = cum.back();
  if (!(L > 0)) throw validation_error("formula curve", "zero length");
  std::vector<Vec> resampled;
  resampled.reserve(knots + 1);
  std::size_t j = 0;
  for (std::size_t i = 0; i <= knots; ++i) {
    double target = L * static_cast<double>(i) / static_cast<double>(knots);
    while (j + 1 < cum.size() && cum[j + 1] < target) ++j;
    if (j + 1 >= cum.size()) {
      resampled.push_back(samples.back());
    } else {
      double seg = cum[j + 1] - cum[j];
      double w = seg > 0 ? (target - cum[j]) / seg : 0.0;
      resampled.push_back((1 - w) * samples[j] + w * samples[j + 1]);
    }
  }
  if (!clamped) return std::make_shared<SplineCurve>(std::move(resampled));
  double hfd = (t1 - t0) * 1e-6;
  Vec d0 = f(t0 + hfd) - f(t0);
  Vec d1 = f(t1) - f(t1 - hfd);
  return std::make_shared<SplineCurve>(std::move(resampled), Vec(d0 / d0.norm()),
                                       Vec(d1 / d1.norm()));
}

}  // namespace

CurvePtr spline_from_formula(const std::function<Vec(double)>& f, double t0, double t1,
                             std::size_t dense, std::size_t knots) {
  return spline_from_formula_impl(f, t0, t1, dense, knots, false);
}

CurvePtr spline_from_formula_clamped(const std::function<Vec(double)>& f, double t0, double t1,
                                     std::size_t dense, std::size_t knots) {
  return spline_from_formula_impl(f, t0, t1, dense, knots, true);
}

void perp_frame(const Vec& axis, Vec& e1, Vec& e2) {
  Eigen::Index n = axis.size();
  Eigen::Index imin = 0, imin2 = 1;
  for (Eigen::Index i = 1; i < n; ++i)
    if (std::abs(axis[i]) < std::abs(axis[imin])) imin = i;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != imin && (imin2 == imin || std::abs(axis[i]) < std::abs(axis[imin2]))) imin2 = i;
  if (imin2 == imin) imin2 = (imin + 1) % n;
  Vec a = Vec::Zero(n), b = Vec::Zero(n);
  a[imin] = 1;
  b[imin2] = 1;
  e1 = a - a.dot(axis) * axis;
  e1 /= e1.norm();
  e2 = b - b.dot(axis) * axis - b.dot(e1) * e1;
  e2 /= e2.norm();
}

std::pair<double, double> project_to_curve(const CurveComponent& c, const Vec& x, double s_lo,
                                           double s_hi) {
  s_lo = std::max(0.0, s_lo);
  s_hi = std::min(c.length(), s_hi);
  const int coarse = 96;
  double best_s = s_lo, best_d = 1e300;
  for (int i = 0; i <= coarse; ++i) {
    double s = s_lo + (s_hi - s_lo) * i / static_cast<double>(coarse);
    double d = (c.position(s) - x).norm();
    if (d < best_d) {
      best_d = d;
      best_s = s;
    }
  }
  double step = (s_hi - s_lo) / coarse;
  double lo = std::max(s_lo, best_s - step), hi = std::min(s_hi, best_s + step);
  for (int it = 0; it < 60; ++it) {
    double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if ((c.position(m1) - x).norm() < (c.position(m2) - x).norm())
      hi = m2;
    else
      lo = m1;
  }
  double s = 0.5 * (lo + hi);
  return {s, (c.position(s) - x).norm()};
}

CurveVerdict validate_curve(const ControlledCurve& c, std::size_t samples_per_component) {
  CurveVerdict v;
  double b = c.b;
  if (!(b > 0)) {
    v.pass = false;
    v.clause = "b>0";
    return v;
  }
  const double tol = 1.0 + 1e-9;
  for (std::size_t ci = 0; ci < c.components.size(); ++ci) {
    const CurveComponent& comp = *c.components[ci];
    double L = comp.length();
    double hfd = L / (4.0 * static_cast<double>(samples_per_component));
    for (std::size_t i = 0; i <= samples_per_component; ++i) {
      double s = L * static_cast<double>(i) / static_cast<double>(samples_per_component);
      double kap = comp.curvature(s);
      if (kap > tol / b) {
        v.pass = false;
        v.clause = "curvature";
        v.witness_s = s;
        v.value = kap;
        return v;
      }
      double sl = std::max(0.0, s - hfd), sr = std::min(L, s + hfd);
      if (sr > sl) {
        double dk = (comp.curvature(sr) - comp.curvature(sl)) / (sr - sl);
        if (std::abs(dk) > tol / (b * b) + 1e-12) {
          v.pass = false;
          v.clause = "curvature_derivative";
          v.witness_s = s;
          v.value = dk;
          return v;
        }
      }
    }
    // chord/arc injectivity proxy at scale b/10
    std::size_t m = std::min<std::size_t>(samples_per_component, 200);
    std::vector<Vec> pos;
    std::vector<double> ss;
    for (std::size_t i = 0; i <= m; ++i) {
      double s = L * static_cast<double>(i) / static_cast<double>(m);
      ss.push_back(s);
      pos.push_back(comp.position(s));
    }
    double min_chord = b / 5.0 * (2.0 / kPi) * (1.0 - 1e-9);
    for (std::size_t i = 0; i < pos.size(); ++i)
      for (std::size_t j = i + 1; j < pos.size(); ++j) {
        if (ss[j] - ss[i] < b / 5.0) continue;
        if ((pos[j] - pos[i]).norm() < min_chord) {
          v.pass = false;
          v.clause = "injectivity";
          v.witness_s = ss[i];
          v.witness_s2 = ss[j];
          v.value = (pos[j] - pos[i]).norm();
          return v;
        }
      }
  }
  // separation between distinct components
  for (std::size_t ci = 0; ci < c.components.size(); ++ci)
    for (std::size_t cj = ci + 1; cj < c.components.size(); ++cj) {
      const CurveComponent& A = *c.components[ci];
      const CurveComponent& B = *c.components[cj];
      std::size_t m = 120;
      for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = 0; j <= m; ++j) {
          Vec pa = A.position(A.length() * i / static_cast<double>(m));
          Vec pb = B.position(B.length() * j / static_cast<double>(m));
          if ((pa - pb).norm() < 10.0 * b * (1.0 - 1e-9)) {
            v.pass = false;
            v.clause = "separation";
            v.witness_s = A.length() * i / static_cast<double>(m);
            v.witness_s2 = B.length() * j / static_cast<double>(m);
            v.value = (pa - pb).norm();
            return v;
          }
        }
    }
  return v;
}

BendResult bend_curve(const ControlledCurve& c, std::size_t idx, bool endpoint_at_start,
                      double delta) {
  if (idx >= c.components.size()) throw validation_error("index", "no such component");
  const CurvePtr& comp = c.components[idx];
  double L = comp->length();
  if (!(delta > 0 && delta < c.b / 20.0))
    throw validation_error("delta<delta_bar(b)", "bend scale too large for the control b");
  if (delta > L / 2) throw validation_error("delta", "bend scale exceeds half the component");

  // Arc-length accessor measured from the chosen endpoint.
  auto gamma = [&](double t) {
    return endpoint_at_start ? comp->position(t) : comp->position(L - t);
  };
  Vec p = gamma(0.0);
  Vec vdir = endpoint_at_start ? Vec(comp->tangent(0.0)) : Vec(-comp->tangent(L));

  // Already straight inside B_delta(p)?
  double straight_dev = 0;
  for (int i = 0; i <= 64; ++i) {
    double t = delta * i / 64.0;
    straight_dev = std::max(straight_dev, (gamma(t) - (p + t * vdir)).norm());
  }
  BendResult out;
  if (straight_dev < 1e-12 * delta) {
    out.curve = c;
    out.curve.b = 1e-6 * c.b;
    out.unchanged = true;
    return out;
  }

  auto mu = [&](double t) {
    double eta = chi_eps(t - delta / 2, delta / 2);
    Vec ell = p + t * vdir;
    return Vec(eta * gamma(t) + (1 - eta) * ell);
  };

  // Straight segment for t <= delta/2, spline blend on [delta/2, delta],
  // untouched remainder beyond.
  CurvePtr seg = std::make_shared<SegmentCurve>(p, Vec(p + (delta / 2) * vdir));
  CurvePtr blend = spline_from_formula_clamped(mu, delta / 2, delta, 512, 128);
  CurvePtr rest = endpoint_at_start ? std::make_shared<SubCurve>(comp, delta, L)
                                    : std::make_shared<SubCurve>(comp, 0.0, L - delta);
  std::vector<CurvePtr> parts;
  if (endpoint_at_start) {
    // new component runs p -> blend -> rest, matching the original orientation
    parts = {seg, blend, rest};
  } else {
    // reverse the bent half so the chain keeps the original orientation
    auto mu_rev = [&](double t) { return mu(delta - t); };
    CurvePtr blend_rev = spline_from_formula_clamped(mu_rev, 0.0, delta / 2, 512, 128);
    CurvePtr seg_rev = std::make_shared<SegmentCurve>(Vec(p + (delta / 2) * vdir), p);
    parts = {rest, blend_rev, seg_rev};
  }
  CurvePtr bent = std::make_shared<ChainCurve>(parts);

  // Certificates: displacement, re-entry, curvature at the relaxed control.
  double dh = 0;
  for (int i = 0; i <= 512; ++i) {
    double t = delta * i / 512.0;
    Vec q = mu(t);
    double best = 1e300;
    for (int j = 0; j <= 512; ++j) best = std::min(best, (q - gamma(delta * j / 512.0)).norm());
    dh = std::max(dh, best);
  }
  if (!(dh < delta / 100.0))
    throw construction_error("bend moved the curve by more than delta/100", dh);
  out.hausdorff = dh;

  for (int i = 0; i <= 256; ++i) {
    double t = delta / 2 + (delta / 2) * i / 256.0;
    if ((mu(t) - p).norm() < delta / 2 * (1 - 1e-9))
      throw construction_error("bent curve re-enters B_{delta/2} (delta too large)", t);
  }

  double kmax = 0;
  for (int i = 0; i <= 400; ++i) {
    double s = bent->length() * i / 400.0;
    kmax = std::max(kmax, bent->curvature(s));
  }
  if (!(kmax <= 1e6 / c.b))
    throw construction_error("bent curve exceeds the 10^6/b curvature bound", kmax);
  out.max_curvature = kmax;

  out.curve = c;
  out.curve.components[idx] = bent;
  out.curve.b = 1e-6 * c.b;
  return out;
}

}  // namespace tc
