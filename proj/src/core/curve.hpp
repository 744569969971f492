#pragma once

#include <memory>
#include <string>
#include <vector>
#include <functional>

#include "core/common.hpp"

namespace tc {

// Rigid motion x -> Q x + t with Q orthogonal.
struct RigidMotion {
  Mat Q;
  Vec t;
  static RigidMotion identity(int dim);
  Vec apply(const Vec& x) const { return Q * x + t; }
  Vec apply_dir(const Vec& v) const { return Q * v; }
};

// Arc-length-parametrized curve piece in R^{n+1}.
class CurveComponent {
public:
  virtual ~CurveComponent() = default;
  virtual double length() const = 0;
  virtual Vec position(double s) const = 0;
  virtual Vec tangent(double s) const = 0;           // unit for regular params
  virtual Vec curvature_vector(double s) const = 0;  // reparametrization-correct
  virtual int ambient_dim() const = 0;
  virtual std::shared_ptr<CurveComponent> transformed(const RigidMotion& m) const = 0;
  virtual std::string kind() const = 0;

  double curvature(double s) const { return curvature_vector(s).norm(); }
  Vec start() const { return position(0.0); }
  Vec end() const { return position(length()); }
};

using CurvePtr = std::shared_ptr<const CurveComponent>;

class SegmentCurve : public CurveComponent {
public:
  SegmentCurve(Vec a, Vec b);
  double length() const override { return len_; }
  Vec position(double s) const override { return a_ + s * dir_; }
  Vec tangent(double) const override { return dir_; }
  Vec curvature_vector(double) const override { return Vec::Zero(a_.size()); }
  int ambient_dim() const override { return static_cast<int>(a_.size()); }
  std::shared_ptr<CurveComponent> transformed(const RigidMotion& m) const override;
  std::string kind() const override { return "segment"; }

private:
  Vec a_, dir_;
  double len_;
};

// Circular arc: center c, radius R, orthonormal plane (e1,e2), angles
// [0, sweep]; position = c + R(cos(s/R) e1 + sin(s/R) e2).
class ArcCurve : public CurveComponent {
public:
  ArcCurve(Vec center, double radius, Vec e1, Vec e2, double sweep_angle);
  double length() const override { return radius_ * sweep_; }
  Vec position(double s) const override;
  Vec tangent(double s) const override;
  Vec curvature_vector(double s) const override;
  int ambient_dim() const override { return static_cast<int>(center_.size()); }
  std::shared_ptr<CurveComponent> transformed(const RigidMotion& m) const override;
  std::string kind() const override { return "arc"; }

private:
  Vec center_, e1_, e2_;
  double radius_, sweep_;
};

// Cubic spline through samples at uniform parameter spacing, optionally
// clamped to prescribed end tangents. The parameter approximates arc length
// (curves are resampled on construction).
class SplineCurve : public CurveComponent {
public:
  // points sampled uniformly along the (approximate) arc length
  explicit SplineCurve(std::vector<Vec> points);
  SplineCurve(std::vector<Vec> points, Vec start_tangent, Vec end_tangent);

  double length() const override { return len_; }
  Vec position(double s) const override;
  Vec tangent(double s) const override;
  Vec curvature_vector(double s) const override;
  int ambient_dim() const override { return dim_; }
  std::shared_ptr<CurveComponent> transformed(const RigidMotion& m) const override;
  std::string kind() const override { return "spline"; }

  const std::vector<Vec>& knots() const { return pts_; }

private:
  void build(const Vec* t0, const Vec* t1);
  void eval(double s, Vec* p, Vec* d1, Vec* d2) const;

  std::vector<Vec> pts_;
  std::vector<Vec> m_;  // second derivatives at knots
  double h_ = 0, len_ = 0;
  int dim_ = 0;
};

// View of a sub-range [s0, s1] of a shared base component.
class SubCurve : public CurveComponent {
public:
  SubCurve(CurvePtr base, double s0, double s1);
  double length() const override { return s1_ - s0_; }
  Vec position(double s) const override { return base_->position(s0_ + s); }
  Vec tangent(double s) const override { return base_->tangent(s0_ + s); }
  Vec curvature_vector(double s) const override { return base_->curvature_vector(s0_ + s); }
  int ambient_dim() const override { return base_->ambient_dim(); }
  std::shared_ptr<CurveComponent> transformed(const RigidMotion& m) const override;
  std::string kind() const override { return "sub"; }

private:
  CurvePtr base_;
  double s0_, s1_;
};

// Orientation-reversed view of a component.
class ReversedCurve : public CurveComponent {
public:
  explicit ReversedCurve(CurvePtr base) : base_(std::move(base)) {}
  double length() const override { return base_->length(); }
  Vec position(double s) const override { return base_->position(base_->length() - s); }
  Vec tangent(double s) const override { return -base_->tangent(base_->length() - s); }
  Vec curvature_vector(double s) const override {
    return base_->curvature_vector(base_->length() - s);
  }
  int ambient_dim() const override { return base_->ambient_dim(); }
  std::shared_ptr<CurveComponent> transformed(const RigidMotion& m) const override {
    return std::make_shared<ReversedCurve>(base_->transformed(m));
  }
  std::string kind() const override { return "reversed"; }

private:
  CurvePtr base_;
};

// Concatenation of C^1-compatible pieces.
class ChainCurve : public CurveComponent {
public:
  explicit ChainCurve(std::vector<CurvePtr> parts);
  double length() const override { return len_; }
  Vec position(double s) const override;
  Vec tangent(double s) const override;
  Vec curvature_vector(double s) const override;
  int ambient_dim() const override { return parts_.front()->ambient_dim(); }
  std::shared_ptr<CurveComponent> transformed(const RigidMotion& m) const override;
  std::string kind() const override { return "chain"; }
  const std::vector<CurvePtr>& parts() const { return parts_; }

private:
  std::pair<std::size_t, double> locate(double s) const;
  std::vector<CurvePtr> parts_;
  std::vector<double> offsets_;
  double len_ = 0;
};

// Resample a parametric formula into an arc-length spline.
CurvePtr spline_from_formula(const std::function<Vec(double)>& f, double t0, double t1,
                             std::size_t dense = 1024, std::size_t knots = 256);
CurvePtr spline_from_formula_clamped(const std::function<Vec(double)>& f, double t0, double t1,
                                     std::size_t dense, std::size_t knots);

// Deterministic orthonormal pair perpendicular to a unit axis.
void perp_frame(const Vec& axis, Vec& e1, Vec& e2);

// Closest point of a component to x within [s_lo, s_hi]: (arc s, distance).
std::pair<double, double> project_to_curve(const CurveComponent& c, const Vec& x, double s_lo,
                                           double s_hi);

// Oriented curve with control scale b.
struct ControlledCurve {
  std::vector<CurvePtr> components;
  double b = 1.0;
};

struct CurveVerdict {
  bool pass = true;
  std::string clause;   // violated clause when !pass
  double witness_s = 0;
  double witness_s2 = 0;
  double value = 0;
};

// Checks |kappa| <= 1/b, |d_s kappa| <= 1/b^2, the sampled chord/arc
// injectivity proxy at scale b/10, and >= 10b separation between components.
CurveVerdict validate_curve(const ControlledCurve& c, std::size_t samples_per_component = 400);

struct BendResult {
  ControlledCurve curve;   // control parameter 1e-6 * b
  bool unchanged = false;  // already straight near the endpoint
  double hausdorff = 0;
  double max_curvature = 0;
};

// Straighten a component near one endpoint: output is straight inside
// B_{delta/2}(p), equals the input outside B_delta(p), moves by < delta/100.
// endpoint_at_start selects which end of component `idx` holds p.
BendResult bend_curve(const ControlledCurve& c, std::size_t idx, bool endpoint_at_start,
                      double delta);

}  // namespace tc
