#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/profile_build.hpp"

namespace tc {

// Control constants of a controlled domain: noncollapsing alpha, uniform
// 2-convexity ratio beta, mean-curvature floor c_H, |A| ceiling C_A and
// |grad A| ceiling D_A, for hypersurface dimension n.
struct ControlParams {
  double alpha = 0.5;
  double beta = 0.3;
  double c_H = 1.0;
  double C_A = 2.2;
  double D_A = 10.0;
  int n = 2;

  void validate() const;
};

struct PrincipalCurvatures {
  std::vector<double> lambdas;  // ascending
  double H = 0;                 // sum
  double S = 0;                 // two smallest

  static PrincipalCurvatures from_values(std::vector<double> ls);
};

struct CurvatureSample {
  Vec point;
  PrincipalCurvatures pc;
  int patch_id = -1;
  double u = 0, v = 0;  // local patch coordinates
};

struct CurvatureVerdict {
  enum Kind { kTwoConvex, kBetaUniform, kFailed } kind = kFailed;
  double beta = 0;
  CurvatureSample witness;
};

struct CurvatureReport {
  std::vector<CurvatureSample> samples;  // decimated; extrema always kept
  std::size_t sample_count = 0;
  double min_S_over_H = 0;
  double min_H = 0;
  double max_lambda_n = 0;
  double min_S = 0;
  CurvatureVerdict verdict;
};

// Principal curvatures of the revolution of u about the x-axis, oriented
// inward-positive for the solid body: meridional -u''/(1+u'^2)^{3/2} once,
// circumferential 1/(u sqrt(1+u'^2)) with multiplicity n-1.
PrincipalCurvatures revolution_curvatures(double u, double du, double ddu, int n);

// Symmetric representative of the Weingarten map of graph(u):
// G^{-1/2} (Hess/sqrt(1+|Du|^2)) G^{-1/2} with G = I + Du Du^T; same spectrum
// as the index-contracted form, symmetric by congruence.
Mat graph_shape_operator(const Vec& grad, const Mat& hess);

// Eigenvalues of the shape operator of graph(u) at x, ascending.
Vec graph_principal_curvatures(const Vec& grad, const Mat& hess);

double sum_two_smallest(const Mat& M);

// u^lambda(x) = mean^{-1} (1 - sqrt(1 - mean * sum lambda_i x_i^2)).
double u_lambda(const Vec& x, const Vec& lambda);
Vec u_lambda_grad(const Vec& x, const Vec& lambda);
Mat u_lambda_hess(const Vec& x, const Vec& lambda);

// Principal curvatures of the constant-radius tube around a curve with
// curvature kappa; theta measured from the curvature vector.
PrincipalCurvatures tube_curvatures(double r, double kappa, double theta, int n);

// Graph over R^n with analytic derivatives.
class GraphFunction {
public:
  virtual ~GraphFunction() = default;
  virtual double value(const Vec& x) const = 0;
  virtual Vec grad(const Vec& x) const = 0;
  virtual Mat hess(const Vec& x) const = 0;
  virtual int dim() const = 0;
};

class ULambdaGraph : public GraphFunction {
public:
  explicit ULambdaGraph(Vec lambda);
  double value(const Vec& x) const override { return u_lambda(x, lambda_); }
  Vec grad(const Vec& x) const override { return u_lambda_grad(x, lambda_); }
  Mat hess(const Vec& x) const override { return u_lambda_hess(x, lambda_); }
  int dim() const override { return static_cast<int>(lambda_.size()); }
  const Vec& lambda() const { return lambda_; }

private:
  Vec lambda_;
};

// The mixed-curvature deformation: graph of
//   mean^{-1}(1 - sqrt(1 - mean * q)),  q = T + eta(r)(mean r^2 - T),
// with eta(r) = psi(r/delta); equals u^lambda for r >= delta and the round
// graph at r <= c*delta.
class MixedCurvatureGraph : public GraphFunction {
public:
  MixedCurvatureGraph(Vec lambda, double delta, std::shared_ptr<const PsiPiece> psi);
  double value(const Vec& x) const override;
  Vec grad(const Vec& x) const override;
  Mat hess(const Vec& x) const override;
  int dim() const override { return static_cast<int>(lambda_.size()); }
  double delta() const { return delta_; }
  double mean() const { return mean_; }

private:
  double eta(double r) const;
  double eta1_times_r(double r) const;
  double eta2_times_r2(double r) const;

  Vec lambda_;
  double delta_;
  double mean_;
  std::shared_ptr<const PsiPiece> psi_;
};

struct MixedDeformResult {
  std::shared_ptr<MixedCurvatureGraph> graph;
  double min_S = 0;       // over the certification grid, r <= sqrt(2 delta)
  Vec worst_x;
  long long psi_levels = 0;
  double c1_estimate = 0;  // remainder constant used to pick psi's eps
};

// Prop-style deformation of mixed curvatures; throws construction_error with
// the violating sample when the S-certificate fails (delta too large).
MixedDeformResult deform_mixed_curvatures(const Vec& lambda, double delta,
                                          const ControlParams& params,
                                          std::size_t grid = 200);

// Largest certifiable delta for the mixed deformation, by bisection.
double mixed_delta_bar(const Vec& lambda, const ControlParams& params);

// v = u^lambda + eta E with eta = chi_{delta/2}(r - delta/2), E = u - u^lambda.
class SecondOrderApproxGraph : public GraphFunction {
public:
  SecondOrderApproxGraph(std::shared_ptr<const GraphFunction> u, Vec lambda, double delta);
  double value(const Vec& x) const override;
  Vec grad(const Vec& x) const override;
  Mat hess(const Vec& x) const override;
  int dim() const override { return u_->dim(); }

private:
  std::shared_ptr<const GraphFunction> u_;
  ULambdaGraph ulam_;
  double delta_;
};

struct SecondOrderApproxResult {
  std::shared_ptr<SecondOrderApproxGraph> graph;
  Vec lambda;
  double min_S = 0;  // certified against beta*c_H/4
};

// Replace an A-controlled graph by its second-order model inside radius
// delta/2, keeping it intact outside radius delta. Rejects inputs whose
// remainder violates |D^i E| <= C delta^{3-i}.
SecondOrderApproxResult second_order_approx(std::shared_ptr<const GraphFunction> u, double delta,
                                            const ControlParams& params);

// Largest zeta such that tubes of radius r <= zeta*b around b-controlled
// curves (and their caps) stay beta-uniformly 2-convex; found by bisection.
double zeta_threshold(const ControlParams& params);

// omega(kappa): admissible symmetric perturbation keeping S(A+E) >= kappa/2.
inline double omega_modulus(double kappa) { return kappa / 4.0; }

}  // namespace tc
