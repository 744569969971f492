#pragma once

#include "core/profile.hpp"

namespace tc {

inline constexpr double kDefaultResolution = 1e-4;
inline constexpr double kQBound = 0.95;

// chi_eps evaluation (eps <= 0 rejects).
double eval_chi(double t, double eps);

// phi_tilde(t; delta) = 1/4 - (3/2) delta/t + (3/4) delta^2/t^2; Q == 1/2.
double eval_phi_tilde(double t, double delta);

struct TransitionPhi {
  ProfileFunction phi;   // -1/2 on (-inf,0], 1/4 on [1,inf)
  DefectReport q_report; // Q over [-1,2] at default resolution
};

// The transition function: Q <= 0.95 everywhere, exact boundary values.
TransitionPhi build_transition_phi();

// Cached shared copy of the transition function (it is used by every
// gluing-profile construction).
const ProfileFunction& transition_phi();
std::shared_ptr<const ProfileFunction> transition_phi_shared();

// Q-preserving blend: result == phi0 left of t_star, == phi1 right of
// t_star+eps, Q <= 0.95 certified. Preconditions follow the transition
// lemma; violations reject with the named condition.
ProfileFunction blend_preserving_Q(const ProfileFunction& phi0, const ProfileFunction& phi1,
                                   double t_star, double eps);

// Replace u above t_star by its second-order Taylor polynomial, blending on
// [t_star-eps, t_star]; P > 0 is certified on [u.domain_lo, t_star].
// extend_to > t_star extends the Taylor piece to the right.
ProfileFunction trim_to_taylor(const ProfileFunction& u, double t_star, double eps,
                               double extend_to);

struct PsiResult {
  ProfileFunction psi;  // 1 for t<=c, 0 for t>=1
  long long N = 0;      // dyadic level count
  long long c_exp2 = 0; // c = 2^c_exp2
  double c = 0;         // 0 when 2^c_exp2 underflows
  double defect_max = 0;  // grid max of |t^2 psi''| + |t psi'|
};

// Second transition function: |t^2 psi''| + |t psi'| < eps.
PsiResult build_psi(double eps);

struct CdeltaResult {
  ProfileFunction u_delta;  // on [-1, x_cyl + margin], constant right tail
  double rho = 0;           // cylinder radius, == delta1^3 exactly
  double delta = 0;
  double delta1 = 0;  // u at the trim point
  double t_star = 0;  // trim location
  double t_min = 0;   // parabola vertex offset from t_star
  double delta2 = 0;  // width of the quadratic-coefficient flip
  double delta3 = 0;  // width of the parabola->cylinder flip
  double x_sphere_end = 0;  // profile equals the unit sphere left of this
  double x_cyl = 0;         // profile is the constant rho right of this
  DefectReport p_report;
};

// The ball-to-cylinder gluing profile C_delta, built sphere -> trim ->
// quadratic-coefficient flip -> parabola -> flip -> cylinder.
CdeltaResult build_Cdelta_profile(double delta);

// rho(delta) in closed form and its inverse.
double rho_of_delta(double delta);
double delta_of_rho(double rho);

struct StandardCapResult {
  ProfileFunction u_st;  // on [x_left, 1], constant 1 left tail
  double beta = 0;       // certified uniform 2-convexity ratio (n<=3)
  double max_d2 = 0;     // grid max of u'' (concavity certificate)
};

// Standard cap profile: sphere on [0.01, 1], 1 on (-inf,-0.01], concave.
StandardCapResult build_standard_cap_profile();
const ProfileFunction& standard_cap_profile();

}  // namespace tc
