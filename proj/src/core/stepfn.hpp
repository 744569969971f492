#pragma once

#include "core/common.hpp"

namespace tc {

// The fixed smooth step chi: 0 for t<=0, 1 for t>=1, spt(chi') in (0,1),
// with |chi'| <= 10 and |chi''| <= 100. Implemented as the logistic of the
// rational gauge g(t) = 1/t - 1/(1-t); all derivatives are closed-form.
struct StepJet {
  double v = 0, d1 = 0, d2 = 0;
};

StepJet chi_jet(double t);
double chi(double t);
double chi_d1(double t);
double chi_d2(double t);

// chi_eps(t) = chi(t/eps). Throws validation_error for eps <= 0.
double chi_eps(double t, double eps);
StepJet chi_eps_jet(double t, double eps);

// Certified global bounds of the chosen step, measured once on a fine grid.
struct StepBounds {
  double max_abs_d1;
  double max_abs_d2;
};
const StepBounds& chi_certified_bounds();

}  // namespace tc
