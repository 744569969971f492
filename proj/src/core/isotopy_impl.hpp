#pragma once

// Internal helpers shared by the isotopy translation units.

#include "core/isotopy.hpp"

namespace tc::detail {

// Cached gluing profiles keyed by delta.
const CdeltaResult& cdelta_cached(double delta);

// Cap profile scaled to radius r: radius(xi) = r * u_st(1 - xi/r) on
// [0, 1.21 r]; apex at xi = 0, constant r beyond 1.01 r.
std::shared_ptr<const ProfileFunction> cap_profile(double r);

// Profile over [-R, extend_to] describing a marble of radius R with a
// collar of parameter delta toward +x and its cylinder continued.
ProfileFunction marble_collar_profile(double R, double delta, double extend_to);

// Append src restricted to [lo, hi] onto dst (must continue contiguously).
void append_profile(ProfileFunction& dst, const ProfileFunction& src, double lo, double hi);

// Tree state used by the reduction engine (marble radii may differ from the
// nominal r_m during shrink phases; edges carry their own tube radius).
struct TreeState {
  std::vector<Marble> marbles;
  struct Edge {
    int from = -1, to = -1;
    CurvePtr curve;       // oriented from the 'from' contact to the 'to' contact
    double radius = 0;
  };
  std::vector<Edge> edges;
  double b = 1;
  ControlParams params;

  MarbleTree to_tree(double r_m_nominal, double r_s_nominal) const;
  static TreeState from_tree(const MarbleTree& t);
};

// Model-case glued domain of a tree state (round collars at every contact).
GluedDomain state_domain(const TreeState& s);

// Emit a certified frame; throws construction_error when the 2-convexity or
// embeddedness certificate fails.
void emit_frame(Timeline& tl, double t, GluedDomain body, const std::string& annotation,
                int marble_count, double res_frac = 2e-2);

// Minkowski combination nodes t*ball + (1-t)*nodes.
std::vector<MeridianPatch::Node> minkowski_nodes(const std::vector<MeridianPatch::Node>& base,
                                                 double ball_radius, double t);

}  // namespace tc::detail
