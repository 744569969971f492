#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/scene.hpp"

namespace tc {

struct Frame {
  double t = 0;
  GluedDomain body;
  std::string annotation;
  int marble_count = -1;
};

struct TimelineFlags {
  bool monotone = false;
  bool monotone_outside_X = false;
  bool trivial_outside_X = false;
};

struct Timeline {
  std::vector<Frame> frames;
  std::vector<Marble> X;  // exceptional balls
  TimelineFlags flags;

  Timeline reversed() const;
};

// Domain-level Hausdorff distance, sampled.
double domain_hausdorff(const GluedDomain& a, const GluedDomain& b, std::size_t samples = 1200);

// Concatenate timelines; consecutive junctions must match within match_tol
// (sampled Hausdorff). Flags are recomputed by sampling.
Timeline compose(const std::vector<Timeline>& parts, double match_tol = 1e-8);

struct FrameRow {
  double t = 0;
  double min_S = 0;
  double min_S_over_H = 0;
  double min_H = 0;
  bool embedded = false;
  bool contained_in_previous_outside_X = true;
  double hausdorff_to_previous = 0;
  std::string annotation;
};

struct TimelineReport {
  std::vector<FrameRow> rows;
  bool all_two_convex = true;
  bool all_embedded = true;
  bool monotone = true;
  bool monotone_outside_X = true;
  bool trivial_outside_X = true;
  double beta = 0;
  double resolution = 0;
};

TimelineReport verify_timeline(const Timeline& tl, double beta, double res_frac = 1e-2);

// ---------------------------------------------------------------------------
// Marble-tree reduction

struct RearrangeResult {
  Timeline timeline;     // shrink + hemisphere moves
  MarbleTree tree;       // state after the rearrangement
  bool moved = false;    // false when the leaf was already clear
};

// Clear the hemisphere of the chosen leaf string at its parent marble,
// shrinking all marbles by a factor 100 first when moves are needed.
RearrangeResult rearrange_leaf(const MarbleTree& tree, int leaf_marble);

struct ReduceResult {
  Timeline timeline;
  MarbleTree tree;  // one marble fewer
};

// One leaf reduction: neck growth, cap interpolation, tentacle contraction,
// concave majorant, Minkowski shrink.
ReduceResult reduce_leaf(const MarbleTree& tree, int leaf_marble);

// Full reduction to a round ball.
Timeline marble_tree_to_ball(const MarbleTree& tree);

// ---------------------------------------------------------------------------
// Necks

struct NeckSpec {
  Vec center;
  double radius = 1.0;
  Vec axis;
  double Gamma = 10.0;   // cap separation
  double delta = 0.0;    // neck quality (0 = exact model)
};

// Model-case isotopy between glued caps-plus-string and the round cylinder
// across B_{5 Gamma r}; trivial outside B_{6 Gamma r}.
Timeline neck_to_string(const NeckSpec& neck, double r_s, const ControlParams& params);

// Curve meeting two opposing cap patches orthogonally; exact model gives the
// axis segment between the tips.
ControlledCurve almost_straight_line(const RevolutionPatch& capA, const RevolutionPatch& capB,
                                     double b);

// ---------------------------------------------------------------------------
// Discarded components

// Meridian description of a convex revolution body.
std::vector<MeridianPatch::Node> meridian_nodes_from_profile(const ProfileFunction& profile,
                                                             double x0, double x1,
                                                             std::size_t samples = 512);

// Monotone convex isotopy t*ball + (1-t)*body; trivial outside the body.
Timeline convex_shrink(const GluedDomain& body, const Marble& inner_ball, std::size_t steps = 24);

struct TubeReduceResult {
  Timeline timeline;
  MarbleTree tree;
  std::vector<double> neck_arcs;  // arc positions of the surgered necks
  double separation = 0;          // the pairwise separation rule used
};

// Reduce a model capped tube (straight spine, constant radius, standard
// caps) to a path marble tree; monotone outside the neck balls.
TubeReduceResult capped_tube_reduction(const CurvePtr& spine, double radius, double eps,
                                       double Gamma, const ControlParams& params, double r_s);

// ---------------------------------------------------------------------------
// Shrinking-neck bookkeeping

struct NeckSlideSample {
  double t = 0;
  double r_t = 0;          // sqrt(r^2 - 2(n-1)t)
  double endpoint_axial = 0;  // |gamma^1|, keeping the endpoint on dB_{8 Gamma r}
  CurvePtr ray;            // outward radial ray at the tracked endpoint
};

struct NeckSlideTrack {
  std::vector<NeckSlideSample> samples;
  double control_b = 0;  // min(b, r) / (1000 Gamma)
};

NeckSlideTrack slide_curve_along_neck(double r, double Gamma, int n, double t0, double b,
                                      std::size_t samples = 64);

}  // namespace tc
