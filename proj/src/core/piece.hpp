#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/stepfn.hpp"

namespace tc {

struct Jet2 {
  double v = 0, d1 = 0, d2 = 0;
};

class ProfileFunction;

// One analytic piece of a profile. Pieces are evaluated in the profile's
// own coordinate; the owning ProfileFunction knows the piece's x-range.
class ProfilePiece {
public:
  virtual ~ProfilePiece() = default;
  virtual Jet2 jet(double x) const = 0;
  // Serialization kind, restricted to the document schema:
  // sphere | parabola | cylinder | blend | spline.
  virtual std::string kind() const = 0;
  virtual std::vector<double> coeffs() const { return {}; }
  // Taylor coefficients f^(k)(x)/k! for k=0..order, or nullopt if the piece
  // cannot produce high-order data.
  virtual std::optional<std::vector<double>> taylor(double x, int order) const {
    (void)x;
    (void)order;
    return std::nullopt;
  }
  virtual std::unique_ptr<ProfilePiece> clone() const = 0;
  // Children for nested serialization (blend-type pieces).
  virtual std::vector<const ProfilePiece*> children() const { return {}; }
  virtual std::string subkind() const { return {}; }
};

using PiecePtr = std::unique_ptr<ProfilePiece>;

class ConstantPiece : public ProfilePiece {
public:
  explicit ConstantPiece(double c) : c_(c) {}
  Jet2 jet(double) const override { return {c_, 0.0, 0.0}; }
  std::string kind() const override { return "cylinder"; }
  std::vector<double> coeffs() const override { return {c_}; }
  std::optional<std::vector<double>> taylor(double, int order) const override {
    std::vector<double> a(static_cast<std::size_t>(order) + 1, 0.0);
    a[0] = c_;
    return a;
  }
  PiecePtr clone() const override { return std::make_unique<ConstantPiece>(c_); }
  double value() const { return c_; }

private:
  double c_;
};

// Polynomial about a center: sum coeffs[k]*(x-center)^k.
class PolyPiece : public ProfilePiece {
public:
  PolyPiece(double center, std::vector<double> coeffs)
      : center_(center), c_(std::move(coeffs)) {}
  Jet2 jet(double x) const override;
  std::string kind() const override { return c_.size() <= 3 ? "parabola" : "spline"; }
  std::string subkind() const override { return c_.size() <= 3 ? "" : "poly"; }
  std::vector<double> coeffs() const override {
    std::vector<double> out{center_};
    out.insert(out.end(), c_.begin(), c_.end());
    return out;
  }
  std::optional<std::vector<double>> taylor(double x, int order) const override;
  PiecePtr clone() const override { return std::make_unique<PolyPiece>(center_, c_); }

private:
  double center_;
  std::vector<double> c_;
};

// Upper circle arc u(x) = sqrt(R^2 - (x-c)^2).
class CirclePiece : public ProfilePiece {
public:
  CirclePiece(double center, double radius) : c_(center), r_(radius) {}
  Jet2 jet(double x) const override;
  std::string kind() const override { return "sphere"; }
  std::vector<double> coeffs() const override { return {c_, r_}; }
  std::optional<std::vector<double>> taylor(double x, int order) const override;
  PiecePtr clone() const override { return std::make_unique<CirclePiece>(c_, r_); }
  double center() const { return c_; }
  double radius() const { return r_; }

private:
  double c_, r_;
};

// phi_tilde(t) = 1/4 - (3/2) d/t + (3/4) d^2/t^2 (t > 0).
class PhiTildePiece : public ProfilePiece {
public:
  explicit PhiTildePiece(double delta) : d_(delta) {}
  Jet2 jet(double t) const override;
  std::string kind() const override { return "spline"; }
  std::string subkind() const override { return "phi_tilde"; }
  std::vector<double> coeffs() const override { return {d_}; }
  std::optional<std::vector<double>> taylor(double t, int order) const override;
  PiecePtr clone() const override { return std::make_unique<PhiTildePiece>(d_); }

private:
  double d_;
};

// Wraps an entire ProfileFunction as a piece (used by blends that span
// several pieces of their inputs).
class ProfileRefPiece : public ProfilePiece {
public:
  explicit ProfileRefPiece(std::shared_ptr<const ProfileFunction> f) : f_(std::move(f)) {}
  Jet2 jet(double x) const override;
  std::string kind() const override { return "spline"; }
  std::string subkind() const override { return "profile_ref"; }
  PiecePtr clone() const override { return std::make_unique<ProfileRefPiece>(f_); }
  const ProfileFunction& profile() const { return *f_; }
  std::shared_ptr<const ProfileFunction> shared() const { return f_; }

private:
  std::shared_ptr<const ProfileFunction> f_;
};

// w(t) = (1-chi((t-a)/eps)) f(t) + chi((t-a)/eps) g(t).
class ChiBlendPiece : public ProfilePiece {
public:
  ChiBlendPiece(PiecePtr f, PiecePtr g, double a, double eps)
      : f_(std::move(f)), g_(std::move(g)), a_(a), eps_(eps) {}
  Jet2 jet(double t) const override;
  std::string kind() const override { return "blend"; }
  std::vector<double> coeffs() const override { return {a_, eps_}; }
  std::vector<const ProfilePiece*> children() const override { return {f_.get(), g_.get()}; }
  PiecePtr clone() const override {
    return std::make_unique<ChiBlendPiece>(f_->clone(), g_->clone(), a_, eps_);
  }

private:
  PiecePtr f_, g_;
  double a_, eps_;
};

// alpha f + beta g.
class LinCombPiece : public ProfilePiece {
public:
  LinCombPiece(double alpha, PiecePtr f, double beta, PiecePtr g)
      : alpha_(alpha), beta_(beta), f_(std::move(f)), g_(std::move(g)) {}
  Jet2 jet(double t) const override;
  std::string kind() const override { return "blend"; }
  std::string subkind() const override { return "lincomb"; }
  std::vector<double> coeffs() const override { return {alpha_, beta_}; }
  std::vector<const ProfilePiece*> children() const override { return {f_.get(), g_.get()}; }
  PiecePtr clone() const override {
    return std::make_unique<LinCombPiece>(alpha_, f_->clone(), beta_, g_->clone());
  }

private:
  double alpha_, beta_;
  PiecePtr f_, g_;
};

// y = sy * f(sx * x + ox) + oy.
class AffinePiece : public ProfilePiece {
public:
  AffinePiece(PiecePtr f, double sx, double ox, double sy, double oy)
      : f_(std::move(f)), sx_(sx), ox_(ox), sy_(sy), oy_(oy) {}
  Jet2 jet(double x) const override {
    Jet2 j = f_->jet(sx_ * x + ox_);
    return {sy_ * j.v + oy_, sy_ * j.d1 * sx_, sy_ * j.d2 * sx_ * sx_};
  }
  std::string kind() const override { return "spline"; }
  std::string subkind() const override { return "affine"; }
  std::vector<double> coeffs() const override { return {sx_, ox_, sy_, oy_}; }
  std::vector<const ProfilePiece*> children() const override { return {f_.get()}; }
  PiecePtr clone() const override {
    return std::make_unique<AffinePiece>(f_->clone(), sx_, ox_, sy_, oy_);
  }

private:
  PiecePtr f_;
  double sx_, ox_, sy_, oy_;
};

// Sum of monomials with real exponents in the normalized coordinate
// s = (x - a)/w: u(x) = sum c_i * s^{p_i} (s >= 0 required).
class MonomialSumPiece : public ProfilePiece {
public:
  MonomialSumPiece(double anchor, std::vector<double> coeff, std::vector<double> expo,
                   double width)
      : a_(anchor), w_(width), c_(std::move(coeff)), p_(std::move(expo)) {}
  Jet2 jet(double x) const override;
  std::string kind() const override { return "spline"; }
  std::string subkind() const override { return "monomials"; }
  std::vector<double> coeffs() const override {
    std::vector<double> out{a_, w_};
    for (std::size_t i = 0; i < c_.size(); ++i) {
      out.push_back(c_[i]);
      out.push_back(p_[i]);
    }
    return out;
  }
  PiecePtr clone() const override { return std::make_unique<MonomialSumPiece>(a_, c_, p_, w_); }

private:
  double a_, w_;
  std::vector<double> c_, p_;
};

// The dyadic transition of the second transition function:
// psi = 1 for t <= 2^-N, (k-1)/N + chi(2 - 2^k t)/N on [2^-k, 2^{1-k}], 0 for t >= 1.
class PsiPiece : public ProfilePiece {
public:
  explicit PsiPiece(long long n_levels) : n_(n_levels) {}
  Jet2 jet(double t) const override;
  std::string kind() const override { return "spline"; }
  std::string subkind() const override { return "psi_dyadic"; }
  std::vector<double> coeffs() const override { return {static_cast<double>(n_)}; }
  PiecePtr clone() const override { return std::make_unique<PsiPiece>(n_); }

  long long levels() const { return n_; }
  // psi(2^e) exactly, usable far below the double underflow threshold.
  double value_at_exp2(long long e) const;
  // t*psi'(t) and t^2*psi''(t); safe against 2^k overflow at denormal t.
  double d1_times_t(double t) const;
  double d2_times_t2(double t) const;

private:
  long long n_;
};

// v(t) = u(t) + chi((t - (tstar-eps))/eps) * S(t - tstar) where
// S(tau) = -sum_{k>=3} a_k tau^k is the (negated) Taylor tail of u at tstar.
// Used by the trimming construction; S is evaluated by series so the zone
// stays numerically exact at widths far below cancellation scale.
class TrimSeriesPiece : public ProfilePiece {
public:
  TrimSeriesPiece(PiecePtr u, double tstar, double eps, std::vector<double> tail)
      : u_(std::move(u)), tstar_(tstar), eps_(eps), tail_(std::move(tail)) {}
  Jet2 jet(double t) const override;
  std::string kind() const override { return "blend"; }
  std::string subkind() const override { return "trim_series"; }
  std::vector<double> coeffs() const override {
    std::vector<double> out{tstar_, eps_};
    out.insert(out.end(), tail_.begin(), tail_.end());
    return out;
  }
  std::vector<const ProfilePiece*> children() const override { return {u_.get()}; }
  PiecePtr clone() const override {
    return std::make_unique<TrimSeriesPiece>(u_->clone(), tstar_, eps_, tail_);
  }

private:
  PiecePtr u_;
  double tstar_, eps_;
  std::vector<double> tail_;  // a_3, a_4, ..., Taylor coefficients of u at tstar
};

// f(tau-coordinates about an anchor): A + B*tau + tau^2 * s * g(tau/w).
// This is the quadratic-coefficient deformation used by the gluing profile.
class QuadGaugePiece : public ProfilePiece {
public:
  QuadGaugePiece(double anchor, double A, double B, double s, double w,
                 std::shared_ptr<const ProfileFunction> gauge)
      : anchor_(anchor), A_(A), B_(B), s_(s), w_(w), gauge_(std::move(gauge)) {}
  Jet2 jet(double t) const override;
  std::string kind() const override { return "blend"; }
  std::string subkind() const override { return "quad_gauge"; }
  std::vector<double> coeffs() const override { return {anchor_, A_, B_, s_, w_}; }
  PiecePtr clone() const override {
    return std::make_unique<QuadGaugePiece>(anchor_, A_, B_, s_, w_, gauge_);
  }
  const ProfileFunction& gauge() const { return *gauge_; }

private:
  double anchor_, A_, B_, s_, w_;
  std::shared_ptr<const ProfileFunction> gauge_;
};

}  // namespace tc
