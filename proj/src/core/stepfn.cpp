#include "core/stepfn.hpp"

#include <algorithm>

namespace tc {

namespace {
// g(t) = 1/t - 1/(1-t), g' = -1/t^2 - 1/(1-t)^2, g'' = 2/t^3 - 2/(1-t)^3.
// chi = 1/(1+e^g); exponent overflow regions collapse to the exact tails.
constexpr double kGaugeCut = 690.0;
}  // namespace

StepJet chi_jet(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  double omt = 1.0 - t;
  double g = 1.0 / t - 1.0 / omt;
  if (g > kGaugeCut) return {0.0, 0.0, 0.0};
  if (g < -kGaugeCut) return {1.0, 0.0, 0.0};
  double s = 1.0 / (1.0 + std::exp(g));
  double gp = -1.0 / (t * t) - 1.0 / (omt * omt);
  double gpp = 2.0 / (t * t * t) - 2.0 / (omt * omt * omt);
  double w = s * (1.0 - s);
  double d1 = -w * gp;
  double d2 = w * ((1.0 - 2.0 * s) * gp * gp - gpp);
  return {s, d1, d2};
}

double chi(double t) { return chi_jet(t).v; }
double chi_d1(double t) { return chi_jet(t).d1; }
double chi_d2(double t) { return chi_jet(t).d2; }

double chi_eps(double t, double eps) {
  if (!(eps > 0.0)) throw validation_error("eps>0", "chi_eps needs a positive width");
  return chi(t / eps);
}

StepJet chi_eps_jet(double t, double eps) {
  if (!(eps > 0.0)) throw validation_error("eps>0", "chi_eps needs a positive width");
  StepJet j = chi_jet(t / eps);
  return {j.v, j.d1 / eps, j.d2 / (eps * eps)};
}

const StepBounds& chi_certified_bounds() {
  static StepBounds bounds = [] {
    StepBounds b{0.0, 0.0};
    const std::size_t n = 400001;
    for (std::size_t i = 0; i <= n; ++i) {
      double t = static_cast<double>(i) / static_cast<double>(n);
      StepJet j = chi_jet(t);
      b.max_abs_d1 = std::max(b.max_abs_d1, std::abs(j.d1));
      b.max_abs_d2 = std::max(b.max_abs_d2, std::abs(j.d2));
    }
    if (b.max_abs_d1 > 10.0 || b.max_abs_d2 > 100.0)
      throw construction_error("smooth step violates |chi'|<=10 or |chi''|<=100", b.max_abs_d1);
    return b;
  }();
  return bounds;
}

}  // namespace tc
