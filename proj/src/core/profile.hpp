#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/piece.hpp"

namespace tc {

// Sampled extrema of a defect functional (P or Q) over a grid.
struct DefectReport {
  std::string functional;  // "P" or "Q"
  double resolution = 0;
  double min_value = 0, max_value = 0;
  double argmin = 0, argmax = 0;
  std::size_t grid_size = 0;
  // Local variation estimate: max adjacent |delta f| / 2 over the grid;
  // grid extrema plus/minus this bracket the true extrema between samples.
  double padding = 0;
};

// Piecewise-analytic 1-D profile with evaluable first/second derivatives.
// Pieces cover [breakpoints.front(), breakpoints.back()]; beyond the ends
// the profile either extends by its constant tail value or rejects.
class ProfileFunction {
public:
  enum class Tail { kError, kConstant };

  ProfileFunction() = default;
  ProfileFunction(const ProfileFunction& other);
  ProfileFunction& operator=(const ProfileFunction& other);
  ProfileFunction(ProfileFunction&&) = default;
  ProfileFunction& operator=(ProfileFunction&&) = default;

  static ProfileFunction single(std::string label, double x0, double x1, PiecePtr piece);

  void set_label(std::string label) { label_ = std::move(label); }
  const std::string& label() const { return label_; }

  // Appends a piece on [back(), x1] (first call fixes the left end).
  void append(double x0, double x1, PiecePtr piece);
  void set_tails(Tail left, Tail right);

  double domain_lo() const { return bp_.front(); }
  double domain_hi() const { return bp_.back(); }
  const std::vector<double>& breakpoints() const { return bp_; }
  std::size_t piece_count() const { return pieces_.size(); }
  const ProfilePiece& piece(std::size_t i) const { return *pieces_[i]; }

  Jet2 jet(double x) const;
  double eval(double x) const { return jet(x).v; }
  double eval_d1(double x) const { return jet(x).d1; }
  double eval_d2(double x) const { return jet(x).d2; }

  // Defect functionals. P[u] = 1 + u'^2 - u u'' ; Q[f] = t^2 f'' + 4 t f' + 2 f.
  double P(double x) const;
  double Q(double x) const;

  // Grid with spacing <= resolution on [lo,hi], including breakpoints and a
  // per-piece refinement so narrow transition zones are always sampled.
  std::vector<double> certification_grid(double lo, double hi, double resolution,
                                         std::size_t per_piece = 129) const;

  DefectReport defect_report(const std::string& functional, double lo, double hi,
                             double resolution) const;

  // Max over sampled interior points of the mismatch between analytic
  // derivatives and finite differences (d1 against differences of eval, d2
  // against differences of eval_d1; a second difference of eval at h=1e-5 sits
  // below double roundoff). Points within 2h of a breakpoint are skipped.
  double derivative_consistency_error(double lo, double hi, std::size_t samples = 2000,
                                      double h = 1e-5) const;

  // Geometric scaling: the profile of the body scaled by s, i.e. s*u(x/s).
  ProfileFunction scaled(double s) const;

  // y(x) = sy*f(sx*x + ox) + oy. Negative sx reverses the piece order.
  ProfileFunction affine_transformed(double sx, double ox, double sy, double oy) const;

  // Restriction to [lo,hi] (pieces clipped; tails become errors).
  ProfileFunction restricted(double lo, double hi) const;

  // Profile whose value is a*f + b*g pointwise (domains intersected,
  // breakpoints merged).
  static ProfileFunction lin_comb(double a, const ProfileFunction& f, double b,
                                  const ProfileFunction& g, std::string label);

  std::shared_ptr<const ProfileFunction> shared_clone() const {
    return std::make_shared<const ProfileFunction>(*this);
  }

private:
  std::size_t piece_index(double x) const;

  std::string label_;
  std::vector<double> bp_;           // size = pieces+1 once nonempty
  std::vector<PiecePtr> pieces_;
  Tail left_ = Tail::kError, right_ = Tail::kError;
};

}  // namespace tc
