#include "core/piece.hpp"

#include <algorithm>
#include <cmath>

#include "core/profile.hpp"

namespace tc {

Jet2 PolyPiece::jet(double x) const {
  double tau = x - center_;
  double v = 0, d1 = 0, d2 = 0;
  for (std::size_t i = c_.size(); i-- > 0;) {
    d2 = d2 * tau + 2.0 * d1;
    d1 = d1 * tau + v;
    v = v * tau + c_[i];
  }
  return {v, d1, d2};
}

std::optional<std::vector<double>> PolyPiece::taylor(double x, int order) const {
  const std::vector<double>& a = c_;
  double shift = x - center_;
  std::size_t n = a.size();
  std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double dk = 0.0;
    double pw = 1.0;
    for (std::size_t i = k; i < n; ++i) {
      double term = a[i];
      for (std::size_t j = 0; j < k; ++j) term *= static_cast<double>(i - j);
      dk += term * pw;
      pw *= shift;
    }
    double fact = 1.0;
    for (std::size_t j = 2; j <= k; ++j) fact *= static_cast<double>(j);
    out[k] = dk / fact;
  }
  return out;
}

Jet2 CirclePiece::jet(double x) const {
  double d = x - c_;
  double rad = r_ * r_ - d * d;
  if (rad <= 0.0) return {0.0, -std::numeric_limits<double>::infinity(),
                          -std::numeric_limits<double>::infinity()};
  double u = std::sqrt(rad);
  double up = -d / u;
  double upp = -(r_ * r_) / (rad * u);
  return {u, up, upp};
}

std::optional<std::vector<double>> CirclePiece::taylor(double x, int order) const {
  double d = x - c_;
  double A = r_ * r_ - d * d;
  if (A <= 0.0) return std::nullopt;
  // f^2 = A - 2Bt - t^2 with B = d; match series coefficients.
  double B = d;
  std::vector<double> a(static_cast<std::size_t>(order) + 1, 0.0);
  a[0] = std::sqrt(A);
  for (std::size_t k = 1; k < a.size(); ++k) {
    double ck = (k == 1) ? -2.0 * B : (k == 2 ? -1.0 : 0.0);
    double acc = 0.0;
    for (std::size_t j = 1; j < k; ++j) acc += a[j] * a[k - j];
    a[k] = (ck - acc) / (2.0 * a[0]);
  }
  return a;
}

Jet2 PhiTildePiece::jet(double t) const {
  if (!(t > 0.0)) throw validation_error("t>0", "phi_tilde has a pole at t=0");
  double q = d_ / t;
  double v = 0.25 - 1.5 * q + 0.75 * q * q;
  double d1 = 1.5 * d_ / (t * t) - 1.5 * d_ * d_ / (t * t * t);
  double d2 = -3.0 * d_ / (t * t * t) + 4.5 * d_ * d_ / (t * t * t * t);
  return {v, d1, d2};
}

std::optional<std::vector<double>> PhiTildePiece::taylor(double t, int order) const {
  if (!(t > 0.0)) return std::nullopt;
  std::vector<double> a(static_cast<std::size_t>(order) + 1, 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    double inv1 = sgn / std::pow(t, static_cast<double>(k + 1));
    double inv2 = sgn * static_cast<double>(k + 1) / std::pow(t, static_cast<double>(k + 2));
    a[k] = -1.5 * d_ * inv1 + 0.75 * d_ * d_ * inv2;
  }
  a[0] += 0.25;
  return a;
}

Jet2 ProfileRefPiece::jet(double x) const { return f_->jet(x); }

Jet2 ChiBlendPiece::jet(double t) const {
  StepJet c = chi_eps_jet(t - a_, eps_);
  Jet2 f = f_->jet(t);
  Jet2 g = g_->jet(t);
  double dv = g.v - f.v, dd1 = g.d1 - f.d1, dd2 = g.d2 - f.d2;
  return {f.v + c.v * dv, f.d1 + c.d1 * dv + c.v * dd1,
          f.d2 + c.d2 * dv + 2.0 * c.d1 * dd1 + c.v * dd2};
}

Jet2 LinCombPiece::jet(double t) const {
  Jet2 f = f_->jet(t);
  Jet2 g = g_->jet(t);
  return {alpha_ * f.v + beta_ * g.v, alpha_ * f.d1 + beta_ * g.d1,
          alpha_ * f.d2 + beta_ * g.d2};
}

Jet2 MonomialSumPiece::jet(double x) const {
  double s = (x - a_) / w_;
  if (s < 0.0) s = 0.0;
  double v = 0, d1 = 0, d2 = 0;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    double p = p_[i];
    v += c_[i] * std::pow(s, p);
    if (p >= 1.0) d1 += c_[i] * p * std::pow(s, p - 1.0) / w_;
    if (p >= 2.0) d2 += c_[i] * p * (p - 1.0) * std::pow(s, p - 2.0) / (w_ * w_);
  }
  return {v, d1, d2};
}

Jet2 PsiPiece::jet(double t) const {
  if (t >= 1.0) return {0.0, 0.0, 0.0};
  if (t <= 0.0) return {1.0, 0.0, 0.0};
  int e = 0;
  double m = std::frexp(t, &e);  // t = m * 2^e, m in [0.5,1)
  long long k = 1 - static_cast<long long>(e);
  if (k > n_) return {1.0, 0.0, 0.0};
  double xi = 2.0 - 2.0 * m;  // = 2 - 2^k t, in (0,1]
  StepJet c = chi_jet(xi);
  double invN = 1.0 / static_cast<double>(n_);
  double scale = 2.0 * m / t;  // = 2^k, formed without overflow for normal t
  double v = (static_cast<double>(k) - 1.0) * invN + c.v * invN;
  double d1 = -c.d1 * scale * invN;
  double d2 = c.d2 * scale * scale * invN;
  return {v, d1, d2};
}

double PsiPiece::value_at_exp2(long long e) const {
  if (e >= 0) return 0.0;
  long long k = 1 - e;
  if (k > n_) return 1.0;
  return static_cast<double>(-e) / static_cast<double>(n_);
}

double PsiPiece::d1_times_t(double t) const {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  int e = 0;
  double m = std::frexp(t, &e);
  long long k = 1 - static_cast<long long>(e);
  if (k > n_) return 0.0;
  double xi = 2.0 - 2.0 * m;
  return -chi_d1(xi) * 2.0 * m / static_cast<double>(n_);
}

double PsiPiece::d2_times_t2(double t) const {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  int e = 0;
  double m = std::frexp(t, &e);
  long long k = 1 - static_cast<long long>(e);
  if (k > n_) return 0.0;
  double xi = 2.0 - 2.0 * m;
  return chi_d2(xi) * 4.0 * m * m / static_cast<double>(n_);
}

Jet2 TrimSeriesPiece::jet(double t) const {
  StepJet c = chi_eps_jet(t - (tstar_ - eps_), eps_);
  double tau = t - tstar_;
  // S(tau) = -sum_{k>=3} a_k tau^k.
  double S = 0, S1 = 0, S2 = 0;
  double tk2 = tau;  // tau^{k-2} starting at k=3
  for (std::size_t i = 0; i < tail_.size(); ++i) {
    double a = -tail_[i];
    double k = static_cast<double>(i + 3);
    S += a * tk2 * tau * tau;
    S1 += a * k * tk2 * tau;
    S2 += a * k * (k - 1.0) * tk2;
    tk2 *= tau;
  }
  Jet2 u = u_->jet(t);
  return {u.v + c.v * S, u.d1 + c.d1 * S + c.v * S1,
          u.d2 + c.d2 * S + 2.0 * c.d1 * S1 + c.v * S2};
}

Jet2 QuadGaugePiece::jet(double t) const {
  double tau = t - anchor_;
  double xi = tau / w_;
  Jet2 g = gauge_->jet(xi);
  double v = A_ + B_ * tau + tau * tau * s_ * g.v;
  double d1 = B_ + s_ * (2.0 * tau * g.v + tau * tau * g.d1 / w_);
  double d2 = s_ * (2.0 * g.v + 4.0 * xi * g.d1 + xi * xi * g.d2);
  return {v, d1, d2};
}

}  // namespace tc
