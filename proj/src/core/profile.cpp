#include "core/profile.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>

namespace tc {

ProfileFunction::ProfileFunction(const ProfileFunction& other)
    : label_(other.label_), bp_(other.bp_), left_(other.left_), right_(other.right_) {
  pieces_.reserve(other.pieces_.size());
  for (const auto& p : other.pieces_) pieces_.push_back(p->clone());
}

ProfileFunction& ProfileFunction::operator=(const ProfileFunction& other) {
  if (this == &other) return *this;
  ProfileFunction tmp(other);
  *this = std::move(tmp);
  return *this;
}

ProfileFunction ProfileFunction::single(std::string label, double x0, double x1, PiecePtr piece) {
  ProfileFunction f;
  f.set_label(std::move(label));
  f.append(x0, x1, std::move(piece));
  return f;
}

void ProfileFunction::append(double x0, double x1, PiecePtr piece) {
  if (!(x1 > x0)) throw validation_error("x1>x0", "profile pieces need positive width");
  if (bp_.empty()) {
    bp_.push_back(x0);
  } else if (std::abs(bp_.back() - x0) > 0.0) {
    throw validation_error("contiguous", "piece must start at the current right end");
  }
  bp_.push_back(x1);
  pieces_.push_back(std::move(piece));
}

void ProfileFunction::set_tails(Tail left, Tail right) {
  left_ = left;
  right_ = right;
}

std::size_t ProfileFunction::piece_index(double x) const {
  auto it = std::upper_bound(bp_.begin(), bp_.end(), x);
  if (it == bp_.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - bp_.begin()) - 1;
  return std::min(i, pieces_.size() - 1);
}

Jet2 ProfileFunction::jet(double x) const {
  if (pieces_.empty()) throw validation_error("nonempty", "profile has no pieces");
  if (x < bp_.front()) {
    if (left_ == Tail::kConstant) return {pieces_.front()->jet(bp_.front()).v, 0.0, 0.0};
    double slack = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(bp_.front()));
    if (x >= bp_.front() - slack) return pieces_.front()->jet(bp_.front());
    throw validation_error("domain", "evaluation left of the profile domain");
  }
  if (x > bp_.back()) {
    if (right_ == Tail::kConstant) return {pieces_.back()->jet(bp_.back()).v, 0.0, 0.0};
    double slack = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(bp_.back()));
    if (x <= bp_.back() + slack) return pieces_.back()->jet(bp_.back());
    throw validation_error("domain", "evaluation right of the profile domain");
  }
  return pieces_[piece_index(x)]->jet(x);
}

double ProfileFunction::P(double x) const {
  Jet2 j = jet(x);
  return 1.0 + j.d1 * j.d1 - j.v * j.d2;
}

double ProfileFunction::Q(double x) const {
  Jet2 j = jet(x);
  return x * x * j.d2 + 4.0 * x * j.d1 + 2.0 * j.v;
}

std::vector<double> ProfileFunction::certification_grid(double lo, double hi, double resolution,
                                                        std::size_t per_piece) const {
  if (!(hi > lo)) throw validation_error("hi>lo", "empty certification interval");
  if (!(resolution > 0)) throw validation_error("resolution>0", "grid needs resolution > 0");
  std::vector<double> g;
  std::size_t n_uniform = static_cast<std::size_t>(std::ceil((hi - lo) / resolution));
  n_uniform = std::min<std::size_t>(n_uniform, 4000000);
  g.reserve(n_uniform + 2 + pieces_.size() * (per_piece + 2));
  for (std::size_t i = 0; i <= n_uniform; ++i)
    g.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_uniform));
  for (double b : bp_)
    if (b >= lo && b <= hi) g.push_back(b);
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    double a = std::max(lo, bp_[p]);
    double b = std::min(hi, bp_[p + 1]);
    if (!(b > a)) continue;
    for (std::size_t i = 0; i <= per_piece; ++i)
      g.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(per_piece));
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

DefectReport ProfileFunction::defect_report(const std::string& functional, double lo, double hi,
                                            double resolution) const {
  bool isP = (functional == "P");
  if (!isP && functional != "Q")
    throw validation_error("functional", "expected P or Q, got " + functional);
  std::vector<double> g = certification_grid(lo, hi, resolution);
  std::vector<double> vals(g.size());
  parallel_for(g.size(), [&](std::size_t a, std::size_t b) {
    for (std::size_t i = a; i < b; ++i) vals[i] = isP ? P(g[i]) : Q(g[i]);
  });
  DefectReport r;
  r.functional = functional;
  r.resolution = resolution;
  r.grid_size = g.size();
  r.min_value = std::numeric_limits<double>::infinity();
  r.max_value = -std::numeric_limits<double>::infinity();
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < g.size(); ++i) {
    double v = vals[i];
    if (!std::isfinite(v)) {
      prev = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    if (v < r.min_value) {
      r.min_value = v;
      r.argmin = g[i];
    }
    if (v > r.max_value) {
      r.max_value = v;
      r.argmax = g[i];
    }
    if (std::isfinite(prev)) r.padding = std::max(r.padding, 0.5 * std::abs(v - prev));
    prev = v;
  }
  return r;
}

double ProfileFunction::derivative_consistency_error(double lo, double hi, std::size_t samples,
                                                     double h) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    double x = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(samples);
    std::size_t p = piece_index(x);
    double width = bp_[p + 1] - bp_[p];
    double h0 = std::min(h, 1e-4 * width);
    Jet2 j = jet(x);
    double e1 = std::numeric_limits<double>::infinity();
    double e2 = e1;
    // The step must sit between truncation (shrink h) and roundoff (grow h);
    // a few dyadic trials find the valley for any local derivative scale.
    for (double hh = h0; hh >= h0 / 4096.0; hh /= 8.0) {
      if (hh < 8.0 * std::abs(x) * std::numeric_limits<double>::epsilon()) break;
      if (x - 2.0 * hh < bp_[p] || x + 2.0 * hh > bp_[p + 1]) continue;
      double fd1 = (jet(x + hh).v - jet(x - hh).v) / (2.0 * hh);
      double fd2 = (jet(x + hh).d1 - jet(x - hh).d1) / (2.0 * hh);
      e1 = std::min(e1, std::abs(fd1 - j.d1) / std::max(1.0, std::abs(j.d1)));
      e2 = std::min(e2, std::abs(fd2 - j.d2) / std::max(1.0, std::abs(j.d2)));
    }
    if (std::isfinite(e1)) worst = std::max(worst, e1);
    if (std::isfinite(e2)) worst = std::max(worst, e2);
  }
  return worst;
}

ProfileFunction ProfileFunction::scaled(double s) const {
  if (!(s > 0)) throw validation_error("s>0", "geometric scale must be positive");
  ProfileFunction out;
  out.set_label(label_);
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    out.append(bp_[p] * s, bp_[p + 1] * s,
               std::make_unique<AffinePiece>(pieces_[p]->clone(), 1.0 / s, 0.0, s, 0.0));
  }
  out.set_tails(left_, right_);
  return out;
}

ProfileFunction ProfileFunction::affine_transformed(double sx, double ox, double sy,
                                                    double oy) const {
  if (sx == 0) throw validation_error("sx!=0", "degenerate reparametrization");
  ProfileFunction out;
  out.set_label(label_);
  auto map_back = [&](double t) { return (t - ox) / sx; };
  if (sx > 0) {
    for (std::size_t p = 0; p < pieces_.size(); ++p)
      out.append(map_back(bp_[p]), map_back(bp_[p + 1]),
                 std::make_unique<AffinePiece>(pieces_[p]->clone(), sx, ox, sy, oy));
    out.set_tails(left_, right_);
  } else {
    for (std::size_t p = pieces_.size(); p-- > 0;)
      out.append(map_back(bp_[p + 1]), map_back(bp_[p]),
                 std::make_unique<AffinePiece>(pieces_[p]->clone(), sx, ox, sy, oy));
    out.set_tails(right_, left_);
  }
  return out;
}

ProfileFunction ProfileFunction::restricted(double lo, double hi) const {
  if (!(hi > lo)) throw validation_error("hi>lo", "empty restriction");
  if (lo < bp_.front() - 0.0 || hi > bp_.back())
    throw validation_error("domain", "restriction exceeds profile domain");
  ProfileFunction out;
  out.set_label(label_);
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    double a = std::max(lo, bp_[p]);
    double b = std::min(hi, bp_[p + 1]);
    if (b > a) out.append(a, b, pieces_[p]->clone());
  }
  return out;
}

ProfileFunction ProfileFunction::lin_comb(double a, const ProfileFunction& f, double b,
                                          const ProfileFunction& g, std::string label) {
  double lo = std::max(f.domain_lo(), g.domain_lo());
  double hi = std::min(f.domain_hi(), g.domain_hi());
  if (!(hi > lo)) throw validation_error("domains", "profiles do not overlap");
  std::vector<double> bps;
  for (double x : f.breakpoints())
    if (x >= lo && x <= hi) bps.push_back(x);
  for (double x : g.breakpoints())
    if (x >= lo && x <= hi) bps.push_back(x);
  bps.push_back(lo);
  bps.push_back(hi);
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  auto fs = f.shared_clone();
  auto gs = g.shared_clone();
  ProfileFunction out;
  out.set_label(std::move(label));
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    out.append(bps[i], bps[i + 1],
               std::make_unique<LinCombPiece>(a, std::make_unique<ProfileRefPiece>(fs), b,
                                              std::make_unique<ProfileRefPiece>(gs)));
  }
  return out;
}

}  // namespace tc
