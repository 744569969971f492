#include <algorithm>
#include <cmath>
#include <set>

#include "core/isotopy_impl.hpp"

namespace tc {

using detail::TreeState;

namespace {

constexpr int kShrinkFrames = 10;
constexpr int kMoveFrames = 14;
constexpr int kStep1Frames = 24;
constexpr int kStep2Frames = 14;
constexpr int kStep3Frames = 24;
constexpr int kStep4Frames = 12;
constexpr int kStep5Frames = 16;
constexpr double kShrinkFactor = 100.0;
constexpr double kClearAngle = 100.0 * kPi / 180.0;   // obstructor threshold
constexpr double kTargetAngle = 120.0 * kPi / 180.0;  // placement after a move

int edge_between(const TreeState& s, int a, int b) {
  for (std::size_t i = 0; i < s.edges.size(); ++i)
    if ((s.edges[i].from == a && s.edges[i].to == b) ||
        (s.edges[i].from == b && s.edges[i].to == a))
      return static_cast<int>(i);
  return -1;
}

std::vector<int> neighbors(const TreeState& s, int m) {
  std::vector<int> out;
  for (const auto& e : s.edges) {
    if (e.from == m) out.push_back(e.to);
    if (e.to == m) out.push_back(e.from);
  }
  return out;
}

// Orient every edge so 'from' is the given marble when it touches it;
// keeps curve orientation in sync.
void orient_edge_from(TreeState& s, int ei, int marble) {
  auto& e = s.edges[static_cast<std::size_t>(ei)];
  if (e.from == marble) return;
  std::swap(e.from, e.to);
  e.curve = std::make_shared<ReversedCurve>(e.curve);
}

Vec contact_dir(const TreeState& s, const TreeState::Edge& e, int marble) {
  const Marble& m = s.marbles[static_cast<std::size_t>(marble)];
  Vec c = (e.from == marble) ? e.curve->start() : e.curve->end();
  return (c - m.center) / (c - m.center).norm();
}

// Uniformly rescale marble radii to R_new, extending or trimming the
// radial straight ends of every string.
TreeState with_marble_radius(const TreeState& s0, const TreeState& base, double R_new) {
  TreeState s = s0;
  double R0 = base.marbles[0].radius;
  for (auto& m : s.marbles) m.radius = R_new;
  for (std::size_t i = 0; i < s.edges.size(); ++i) {
    const auto& be = base.edges[i];
    auto& e = s.edges[i];
    Vec cf = s.marbles[static_cast<std::size_t>(be.from)].center;
    Vec ct = s.marbles[static_cast<std::size_t>(be.to)].center;
    Vec df = (be.curve->start() - cf) / R0;
    Vec dt = (be.curve->end() - ct) / R0;
    std::vector<CurvePtr> parts;
    if (R_new < R0 * (1 - 1e-12))
      parts.push_back(std::make_shared<SegmentCurve>(Vec(cf + R_new * df), Vec(cf + R0 * df)));
    parts.push_back(be.curve);
    if (R_new < R0 * (1 - 1e-12))
      parts.push_back(std::make_shared<SegmentCurve>(Vec(ct + R0 * dt), Vec(ct + R_new * dt)));
    e.curve = parts.size() == 1 ? parts[0] : std::make_shared<ChainCurve>(parts);
  }
  return s;
}

// Spherical linear interpolation between unit vectors.
Vec slerp(const Vec& a, const Vec& b, double u) {
  double c = std::clamp(a.dot(b), -1.0, 1.0);
  double ang = std::acos(c);
  if (ang < 1e-12) return a;
  Vec out = (std::sin((1 - u) * ang) * a + std::sin(u * ang) * b) / std::sin(ang);
  return out / out.norm();
}

// Direction path from mu0 to mu1 steered around blocked directions.
struct SpherePath {
  std::vector<Vec> waypoints;  // mu0 ... mu1
  Vec eval(double t) const {
    double scaled = t * static_cast<double>(waypoints.size() - 1);
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(scaled),
                                          waypoints.size() - 2);
    return slerp(waypoints[i], waypoints[i + 1], scaled - static_cast<double>(i));
  }
};

bool path_clear(const SpherePath& path, const std::vector<Vec>& obstacles, double min_angle) {
  for (int i = 1; i < 64; ++i) {
    Vec d = path.eval(i / 64.0);
    for (const Vec& o : obstacles)
      if (std::acos(std::clamp(d.dot(o), -1.0, 1.0)) < min_angle) return false;
  }
  return true;
}

SpherePath find_path(const Vec& mu0, const Vec& mu1, const std::vector<Vec>& obstacles,
                     double min_angle) {
  SpherePath direct{{mu0, mu1}};
  if (path_clear(direct, obstacles, min_angle)) return direct;
  Vec mid = slerp(mu0, mu1, 0.5);
  Vec e1, e2;
  perp_frame(mid, e1, e2);
  for (double amp : {0.7, 1.1, 1.5}) {
    for (const Vec& side : {e1, Vec(-e1), e2, Vec(-e2)}) {
      Vec w = mid + amp * side;
      w /= w.norm();
      SpherePath detour{{mu0, w, mu1}};
      if (path_clear(detour, obstacles, min_angle)) return detour;
    }
  }
  throw construction_error("no clear avoidance path on the sphere (pathological crowding)",
                           static_cast<double>(obstacles.size()));
}

// Curve of the hemisphere move: r -> r * mu(eta(r) t) with eta = chi((20-r/rh)/10).
CurvePtr moved_string(const Vec& center, double rh, const SpherePath& path, double t,
                      const CurvePtr& rest_beyond_20rh) {
  Vec mu_t = path.eval(t);
  auto formula = [&](double r) { return Vec(center + r * path.eval(chi((20.0 - r / rh) / 10.0) * t)); };
  std::vector<CurvePtr> parts;
  parts.push_back(std::make_shared<SegmentCurve>(Vec(center + rh * mu_t), Vec(center + 10.0 * rh * mu_t)));
  parts.push_back(spline_from_formula_clamped(formula, 10.0 * rh, 20.0 * rh, 512, 160));
  parts.push_back(rest_beyond_20rh);
  return std::make_shared<ChainCurve>(parts);
}

GluedDomain drop_and_build(const TreeState& s, int drop_marble, int drop_edge) {
  TreeState t = s;
  if (drop_edge >= 0) t.edges.erase(t.edges.begin() + drop_edge);
  if (drop_marble >= 0) {
    t.marbles.erase(t.marbles.begin() + drop_marble);
    for (auto& e : t.edges) {
      if (e.from > drop_marble) e.from--;
      if (e.to > drop_marble) e.to--;
    }
  }
  return state_domain(t);
}

// ---------------------------------------------------------------- reduction

struct LeafGeometry {
  int leaf, parent, edge;
  Vec p1, p2;     // leaf and parent centers
  Vec d1;         // axis from the leaf toward its string
  Vec d2;         // axis from the parent toward the same string
  double R;       // marble radius in the working state
  double L;       // string length (contact to contact)
};

LeafGeometry leaf_geometry(const TreeState& s, int leaf) {
  auto nb = neighbors(s, leaf);
  if (nb.size() != 1) throw validation_error("leaf", "selected marble is not a leaf");
  LeafGeometry g;
  g.leaf = leaf;
  g.parent = nb[0];
  g.edge = edge_between(s, leaf, g.parent);
  g.p1 = s.marbles[static_cast<std::size_t>(leaf)].center;
  g.p2 = s.marbles[static_cast<std::size_t>(g.parent)].center;
  g.R = s.marbles[static_cast<std::size_t>(leaf)].radius;
  const auto& e = s.edges[static_cast<std::size_t>(g.edge)];
  g.d1 = contact_dir(s, e, leaf);
  g.d2 = contact_dir(s, e, g.parent);
  g.L = e.curve->length();
  return g;
}

// sqrt(2)-clearance of the leaf string from everything else.
void check_sqrt2_clearance(const TreeState& s, const LeafGeometry& g) {
  const auto& e = s.edges[static_cast<std::size_t>(g.edge)];
  double need = std::sqrt(2.0) * g.R * 0.999;
  for (int k = 0; k <= 64; ++k) {
    Vec q = e.curve->position(e.curve->length() * k / 64.0);
    for (std::size_t mi = 0; mi < s.marbles.size(); ++mi) {
      if (static_cast<int>(mi) == g.leaf || static_cast<int>(mi) == g.parent) continue;
      if ((q - s.marbles[mi].center).norm() - s.marbles[mi].radius < need)
        throw validation_error("sqrt2 clearance", "another marble meets the leaf string zone");
    }
    for (std::size_t ei = 0; ei < s.edges.size(); ++ei) {
      if (static_cast<int>(ei) == g.edge) continue;
      auto [ss, dist] = project_to_curve(*s.edges[ei].curve, q, 0, s.edges[ei].curve->length());
      (void)ss;
      if (dist < need)
        throw validation_error("sqrt2 clearance", "another string meets the leaf string zone");
    }
  }
}

// Profile of the step-2 start: marble + collar(0.99) + cylinder out to 2R.
ProfileFunction step2_profile_A(double R) {
  return detail::marble_collar_profile(R, 0.99, 2.0 * R);
}

// Cap profile with apex at x = apex opening toward +x (radius r1), constant
// r1 continued to extend_to.
ProfileFunction cap_profile_from_left(double apex, double r1, double extend_to) {
  ProfileFunction cap =
      standard_cap_profile().affine_transformed(-1.0 / r1, 1.0 + apex / r1, r1, 0.0);
  ProfileFunction out;
  out.set_label("cap_left");
  double hi = apex + 1.21 * r1;
  detail::append_profile(out, cap, apex, std::min(hi, extend_to));
  if (extend_to > hi) out.append(hi, extend_to, std::make_unique<ConstantPiece>(r1));
  out.set_tails(ProfileFunction::Tail::kError, ProfileFunction::Tail::kConstant);
  return out;
}

// Cap profile with apex at x = apex opening toward -x, constant r1 continued
// down to extend_from.
ProfileFunction cap_profile_from_right(double apex, double r1, double extend_from) {
  ProfileFunction cap =
      standard_cap_profile().affine_transformed(1.0 / r1, 1.0 - apex / r1, r1, 0.0);
  ProfileFunction out;
  out.set_label("cap_right");
  double lo = apex - 1.21 * r1;
  if (extend_from < lo) {
    out.append(extend_from, lo, std::make_unique<ConstantPiece>(r1));
    detail::append_profile(out, cap, lo, apex);
  } else {
    detail::append_profile(out, cap, extend_from, apex);
  }
  out.set_tails(ProfileFunction::Tail::kConstant, ProfileFunction::Tail::kError);
  return out;
}

// Static patches of everything except the leaf marble and its string;
// the parent marble gets its gamma_1 hole at the given delta.
void add_static_rest(GluedDomain& d, const TreeState& s, const LeafGeometry& g,
                     double parent_gamma_delta, bool include_parent_sphere,
                     bool include_parent_gamma_collar) {
  std::vector<std::vector<SphereHole>> holes(s.marbles.size());
  struct Pending {
    int collar_id;
    std::size_t marble;
    PatchAdjacency adj;
  };
  std::vector<Pending> pend;
  for (std::size_t ei = 0; ei < s.edges.size(); ++ei) {
    if (static_cast<int>(ei) == g.edge) continue;
    const auto& e = s.edges[ei];
    const CurvePtr& comp = e.curve;
    double L = comp->length();
    double lo = 0, hi = L;
    for (int endi = 0; endi < 2; ++endi) {
      bool at_start = endi == 0;
      int mi = at_start ? e.from : e.to;
      const Marble& m = s.marbles[static_cast<std::size_t>(mi)];
      double R = m.radius;
      double delta = delta_of_rho(e.radius / R);
      const CdeltaResult& cd = detail::cdelta_cached(delta);
      Vec contact = at_start ? comp->start() : comp->end();
      Vec axis = (contact - m.center) / (contact - m.center).norm();
      auto prof = std::make_shared<const ProfileFunction>(cd.u_delta.scaled(R));
      int collar_id = d.add_patch(std::make_unique<RevolutionPatch>(
          m.center, axis, prof, cd.x_sphere_end * R, cd.x_cyl * R));
      holes[static_cast<std::size_t>(mi)].push_back(
          SphereHole{axis, cd.x_sphere_end, cd.x_sphere_end * R});
      Pending p;
      p.collar_id = collar_id;
      p.marble = static_cast<std::size_t>(mi);
      p.adj.circle_center = m.center + cd.x_sphere_end * R * axis;
      p.adj.circle_axis = axis;
      p.adj.circle_radius = R * std::sqrt(std::max(0.0, 1.0 - sq(cd.x_sphere_end)));
      pend.push_back(std::move(p));
      double cyl_arc = (cd.x_cyl - 1.0) * R;
      if (at_start)
        lo = cyl_arc;
      else
        hi = L - cyl_arc;
    }
    d.add_patch(std::make_unique<TubePatch>(comp, lo, hi, e.radius));
  }
  // the parent's gamma_1 hole
  if (parent_gamma_delta > 0) {
    const CdeltaResult& cd = detail::cdelta_cached(parent_gamma_delta);
    double R = s.marbles[static_cast<std::size_t>(g.parent)].radius;
    holes[static_cast<std::size_t>(g.parent)].push_back(
        SphereHole{g.d2, cd.x_sphere_end, cd.x_sphere_end * R});
    if (include_parent_gamma_collar) {
      auto prof = std::make_shared<const ProfileFunction>(cd.u_delta.scaled(R));
      d.add_patch(std::make_unique<RevolutionPatch>(g.p2, g.d2, prof, cd.x_sphere_end * R,
                                                    cd.x_cyl * R));
    }
  }
  std::vector<int> sphere_ids(s.marbles.size(), -1);
  for (std::size_t mi = 0; mi < s.marbles.size(); ++mi) {
    if (static_cast<int>(mi) == g.leaf) continue;
    if (static_cast<int>(mi) == g.parent && !include_parent_sphere) continue;
    sphere_ids[mi] = d.add_patch(
        std::make_unique<SpherePatch>(s.marbles[mi].center, s.marbles[mi].radius, holes[mi]));
  }
  for (auto& p : pend) {
    if (sphere_ids[p.marble] < 0) continue;
    p.adj.a = p.collar_id;
    p.adj.b = sphere_ids[p.marble];
    d.add_adjacency(p.adj);
  }
}

}  // namespace

// -------------------------------------------------------------- rearrangement

namespace {

struct RearrangePlan {
  std::vector<TreeState> states;  // S_0 ... S_k (S_0 = input, possibly radius-shrunk)
  bool moved = false;
};

RearrangePlan plan_rearrangement(const TreeState& input, int leaf) {
  RearrangePlan plan;
  TreeState s = input;
  plan.states.push_back(s);

  LeafGeometry g = leaf_geometry(s, leaf);
  // obstructors: other strings meeting the parent within the leaf hemisphere
  std::vector<int> obstructors;
  for (std::size_t ei = 0; ei < s.edges.size(); ++ei) {
    if (static_cast<int>(ei) == g.edge) continue;
    const auto& e = s.edges[ei];
    if (e.from != g.parent && e.to != g.parent) continue;
    Vec dir = contact_dir(s, e, g.parent);
    if (std::acos(std::clamp(dir.dot(g.d2), -1.0, 1.0)) < kClearAngle)
      obstructors.push_back(static_cast<int>(ei));
  }
  if (obstructors.empty()) return plan;
  plan.moved = true;

  // shrink all marbles by the factor 100
  TreeState base = s;
  double R0 = s.marbles[0].radius;
  for (int k = 1; k <= kShrinkFrames; ++k) {
    double R = R0 * std::pow(1.0 / kShrinkFactor, static_cast<double>(k) / kShrinkFrames);
    plan.states.push_back(with_marble_radius(s, base, R));
  }
  s = plan.states.back();
  double rh = s.marbles[0].radius;

  // hemisphere moves, one obstructor at a time
  for (int ei : obstructors) {
    orient_edge_from(s, ei, g.parent);
    const auto& e = s.edges[static_cast<std::size_t>(ei)];
    Vec mu0 = contact_dir(s, e, g.parent);
    // obstacle directions: every other contact at the parent
    std::vector<Vec> obstacles;
    for (std::size_t ej = 0; ej < s.edges.size(); ++ej) {
      if (static_cast<int>(ej) == ei) continue;
      const auto& o = s.edges[ej];
      if (o.from == g.parent || o.to == g.parent)
        obstacles.push_back(contact_dir(s, o, g.parent));
    }
    // target: behind the leaf direction, azimuthally clear
    Vec e1, e2;
    perp_frame(g.d2, e1, e2);
    Vec target;
    bool found = false;
    for (int az = 0; az < 12 && !found; ++az) {
      double a = 2 * kPi * az / 12.0;
      Vec cand = -std::cos(kPi - kTargetAngle) * g.d2 +
                 std::sin(kPi - kTargetAngle) * (std::cos(a) * e1 + std::sin(a) * e2);
      cand = -cand if (false); // placeholder removed below
      found = true;
      target = cand;
    }
    (void)found;
    // direction at angle kTargetAngle from d2:
    // cos(angle to d2) = cos(kTargetAngle)
    for (int az = 0; az < 12; ++az) {
      double a = 2 * kPi * az / 12.0 + 0.37;
      Vec cand = std::cos(kTargetAngle) * g.d2 +
                 std::sin(kTargetAngle) * (std::cos(a) * e1 + std::sin(a) * e2);
      cand /= cand.norm();
      bool ok = true;
      for (const Vec& o : obstacles)
        if (std::acos(std::clamp(cand.dot(o), -1.0, 1.0)) < 25.0 * kPi / 180.0) ok = false;
      if (ok) {
        target = cand;
        break;
      }
    }
    SpherePath path = find_path(mu0, target, obstacles, 20.0 * kPi / 180.0);

    // the part of the string beyond 20 rh stays fixed
    CurvePtr rest = std::make_shared<SubCurve>(e.curve, 19.0 * rh, e.curve->length());
    for (int k = 1; k <= kMoveFrames; ++k) {
      double t = static_cast<double>(k) / kMoveFrames;
      TreeState st = s;
      st.edges[static_cast<std::size_t>(ei)].curve = moved_string(g.p2, rh, path, t, rest);
      plan.states.push_back(st);
      if (k == kMoveFrames) s = st;
    }
  }
  return plan;
}

}  // namespace

RearrangeResult rearrange_leaf(const MarbleTree& tree, int leaf_marble) {
  TreeVerdict tv = validate_marble_tree(tree);
  if (!tv.pass) throw validation_error("tree " + tv.clause, tv.detail);
  TreeState s = TreeState::from_tree(tree);
  RearrangePlan plan = plan_rearrangement(s, leaf_marble);
  RearrangeResult out;
  out.moved = plan.moved;
  if (!plan.moved) {
    out.tree = tree;
    return out;  // already clear: empty timeline
  }
  for (std::size_t i = 0; i < plan.states.size(); ++i) {
    detail::emit_frame(out.timeline, static_cast<double>(i) / (plan.states.size() - 1),
                       state_domain(plan.states[i]), "rearrange",
                       static_cast<int>(plan.states[i].marbles.size()));
  }
  for (const auto& m : tree.marbles) out.timeline.X.push_back({m.center, tree.r_m});
  const TreeState& fin = plan.states.back();
  out.tree = fin.to_tree(fin.marbles[0].radius, fin.edges.empty() ? tree.r_s : fin.edges[0].radius);
  return out;
}

// ------------------------------------------------------------------ reduce

namespace {

struct ReducePlanResult {
  Timeline timeline;
  TreeState final_state;
};

ReducePlanResult reduce_frames(const TreeState& s_in, int leaf) {
  TreeState s = s_in;
  LeafGeometry g = leaf_geometry(s, leaf);
  orient_edge_from(s, g.edge, leaf);
  g = leaf_geometry(s, leaf);
  check_sqrt2_clearance(s, g);

  double R = g.R;
  double r_s = s.edges[static_cast<std::size_t>(g.edge)].radius;
  double rho99 = rho_of_delta(0.99);
  double r1 = rho99 * R;
  Timeline tl;
  int mc = static_cast<int>(s.marbles.size());

  // Step 1: grow the string radius to rho(0.99) R.
  for (int k = 0; k <= kStep1Frames; ++k) {
    double t = static_cast<double>(k) / kStep1Frames;
    double r = r_s * std::pow(r1 / r_s, t);
    if (k == kStep1Frames) r = r1;
    TreeState st = s;
    st.edges[static_cast<std::size_t>(g.edge)].radius = r;
    detail::emit_frame(tl, 0.0 + 0.2 * t, state_domain(st), "step1_grow_neck", mc);
  }

  // Step 2: interpolate the leaf side onto a standard cap tangent at -q1.
  ProfileFunction uA = step2_profile_A(R);
  ProfileFunction uK = cap_profile_from_left(-R, r1, 2.0 * R);
  // cap stays inside: uK <= uA sampled
  for (int i = 0; i <= 400; ++i) {
    double x = -R + 3.0 * R * i / 400.0;
    if (uK.eval(x) > uA.eval(x) + 1e-9 * R)
      throw construction_error("standard cap is not inside C_0.99", x);
  }
  const auto& e = s.edges[static_cast<std::size_t>(g.edge)];
  const CdeltaResult& cd99 = detail::cdelta_cached(0.99);
  double parent_cyl_arc = (cd99.x_cyl - 1.0) * R;
  for (int k = 0; k <= kStep2Frames; ++k) {
    double t = static_cast<double>(k) / kStep2Frames;
    GluedDomain d;
    d.n = s.params.n;
    d.params = s.params;
    ProfileFunction blend = ProfileFunction::lin_comb(1 - t, uA, t, uK, "step2_blend");
    d.add_patch(std::make_unique<RevolutionPatch>(
        g.p1, g.d1, std::make_shared<const ProfileFunction>(std::move(blend)), -R, 2.0 * R));
    d.add_patch(std::make_unique<TubePatch>(e.curve, R, g.L - parent_cyl_arc, r1));
    add_static_rest(d, s, g, 0.99, true, true);
    detail::emit_frame(tl, 0.2 + 0.2 * t, std::move(d), "step2_cap", mc);
  }

  // Step 3: contract the tentacle; the cap slides along ell + gamma_1.
  CurvePtr diameter = std::make_shared<SegmentCurve>(Vec(g.p1 - R * g.d1), Vec(g.p1 + R * g.d1));
  CurvePtr gamma_tilde = std::make_shared<ChainCurve>(std::vector<CurvePtr>{diameter, e.curve});
  double Lt = gamma_tilde->length();
  auto capP = detail::cap_profile(r1);
  for (int k = 0; k <= kStep3Frames; ++k) {
    double t = static_cast<double>(k) / kStep3Frames * (Lt - 2.0 * R);
    GluedDomain d;
    d.n = s.params.n;
    d.params = s.params;
    Vec tip = gamma_tilde->position(t);
    Vec dir = gamma_tilde->tangent(t);
    d.add_patch(std::make_unique<RevolutionPatch>(tip, dir, capP, 0.0, 1.01 * r1));
    d.add_patch(std::make_unique<TubePatch>(gamma_tilde, t + 1.01 * r1, Lt - parent_cyl_arc, r1));
    add_static_rest(d, s, g, 0.99, true, true);
    detail::emit_frame(tl, 0.4 + 0.2 * t / std::max(Lt - 2.0 * R, 1e-300), std::move(d),
                       "step3_contract", mc);
  }

  // Step 4: concave majorant of the leftover stub around the parent.
  // Profile over parent-local x in [0, 3R]: collar(0.99), cylinder, cap at 3R.
  ProfileFunction stub;
  stub.set_label("step4_u");
  {
    ProfileFunction collar = detail::marble_collar_profile(R, 0.99, 3.0 * R);
    ProfileFunction cap = cap_profile_from_right(3.0 * R, r1, cd99.x_cyl * R);
    detail::append_profile(stub, collar, 0.0, 3.0 * R - 1.15 * r1);
    detail::append_profile(stub, cap, 3.0 * R - 1.15 * r1, 3.0 * R);
    stub.set_tails(ProfileFunction::Tail::kError, ProfileFunction::Tail::kError);
  }
  // bitangent concave majorant: sphere tangency x_t, cap tangency x_b
  double m_lo = -4.0, m_hi = -1e-9;
  auto cap_jet = [&](double x) { return stub.jet(x); };
  auto gof = [&](double m) {
    // x_b(m): slope m on the cap's concave part (g' decreasing from 0)
    double lo = 3.0 * R - 1.15 * r1, hi = 3.0 * R * (1 - 1e-9);
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (lo + hi);
      if (cap_jet(mid).d1 > m)
        lo = mid;
      else
        hi = mid;
    }
    double xb = 0.5 * (lo + hi);
    Jet2 j = cap_jet(xb);
    return std::pair<double, double>(xb, j.v - (m * xb + R * std::sqrt(1 + m * m)));
  };
  for (int it = 0; it < 200; ++it) {
    double m = 0.5 * (m_lo + m_hi);
    if (gof(m).second > 0)
      m_hi = m;
    else
      m_lo = m;
  }
  double m_star = 0.5 * (m_lo + m_hi);
  double x_b = gof(m_star).first;
  double x_t = -m_star * R / std::sqrt(1 + m_star * m_star);
  if (!(x_t > 0 && x_t < x_b && x_b < 3.0 * R))
    throw construction_error("step 4 bitangent construction failed", x_t);
  ProfileFunction vmaj;
  vmaj.set_label("step4_v");
  vmaj.append(0.0, x_t, std::make_unique<CirclePiece>(0.0, R));
  vmaj.append(x_t, x_b,
              std::make_unique<PolyPiece>(0.0, std::vector<double>{R * std::sqrt(1 + m_star * m_star),
                                                                   m_star}));
  detail::append_profile(vmaj, stub, x_b, 3.0 * R);
  vmaj.set_tails(ProfileFunction::Tail::kError, ProfileFunction::Tail::kError);
  for (int i = 0; i <= 600; ++i) {
    double x = 3.0 * R * i / 600.0;
    if (vmaj.eval(x) < stub.eval(x) - 1e-9 * R)
      throw construction_error("step 4 majorant fails v >= u", x);
  }
  for (int k = 0; k <= kStep4Frames; ++k) {
    double t = static_cast<double>(k) / kStep4Frames;
    GluedDomain d;
    d.n = s.params.n;
    d.params = s.params;
    ProfileFunction blend = ProfileFunction::lin_comb(1 - t, stub, t, vmaj, "step4_blend");
    d.add_patch(std::make_unique<RevolutionPatch>(
        g.p2, g.d2, std::make_shared<const ProfileFunction>(std::move(blend)), 0.0, 3.0 * R));
    add_static_rest(d, s, g, -1.0, false, false);
    // parent sphere with the +axis hemisphere replaced by the revolution patch
    std::vector<SphereHole> ph{SphereHole{g.d2, 0.0, 0.0}};
    for (std::size_t ei = 0; ei < s.edges.size(); ++ei) {
      if (static_cast<int>(ei) == g.edge) continue;
      const auto& oe = s.edges[ei];
      if (oe.from != g.parent && oe.to != g.parent) continue;
      double delta = delta_of_rho(oe.radius / R);
      const CdeltaResult& cdo = detail::cdelta_cached(delta);
      ph.push_back(SphereHole{contact_dir(s, oe, g.parent), cdo.x_sphere_end,
                              cdo.x_sphere_end * R});
    }
    d.add_patch(std::make_unique<SpherePatch>(g.p2, R, ph));
    detail::emit_frame(tl, 0.6 + 0.2 * t, std::move(d), "step4_majorant", mc);
  }

  // Step 5: Minkowski shrink of the convex majorant body onto the marble.
  std::vector<MeridianPatch::Node> nodes = meridian_nodes_from_profile(
      [&] {
        ProfileFunction full;
        full.set_label("step5_body");
        full.append(-R, 0.0, std::make_unique<CirclePiece>(0.0, R));
        detail::append_profile(full, vmaj, 0.0, 3.0 * R);
        full.set_tails(ProfileFunction::Tail::kError, ProfileFunction::Tail::kError);
        return full;
      }(),
      -R, 3.0 * R, 700);
  std::vector<SphereHole> far_holes;
  for (std::size_t ei = 0; ei < s.edges.size(); ++ei) {
    if (static_cast<int>(ei) == g.edge) continue;
    const auto& oe = s.edges[ei];
    if (oe.from != g.parent && oe.to != g.parent) continue;
    double delta = delta_of_rho(oe.radius / R);
    const CdeltaResult& cdo = detail::cdelta_cached(delta);
    far_holes.push_back(
        SphereHole{contact_dir(s, oe, g.parent), cdo.x_sphere_end, cdo.x_sphere_end * R});
  }
  for (int k = 0; k <= kStep5Frames; ++k) {
    double t = static_cast<double>(k) / kStep5Frames;
    GluedDomain d;
    d.n = s.params.n;
    d.params = s.params;
    auto nds = detail::minkowski_nodes(nodes, R, t);
    // world placement: nodes are in parent-local axis coordinates
    d.add_patch(std::make_unique<MeridianPatch>(g.p2, g.d2, std::move(nds), far_holes));
    add_static_rest(d, s, g, -1.0, false, false);
    detail::emit_frame(tl, 0.8 + 0.2 * t, std::move(d), "step5_round", mc);
  }

  // final state: leaf and its string removed
  TreeState fin = s;
  fin.edges.erase(fin.edges.begin() + g.edge);
  fin.marbles.erase(fin.marbles.begin() + g.leaf);
  for (auto& ed : fin.edges) {
    if (ed.from > g.leaf) ed.from--;
    if (ed.to > g.leaf) ed.to--;
  }
  // closing frame: the clean tree state (coincides with the Minkowski ball)
  detail::emit_frame(tl, 1.0, state_domain(fin), "step5_done",
                     static_cast<int>(fin.marbles.size()));

  // exceptional set: the reduction zone plus both marbles
  Vec mid = 0.5 * (g.p1 + g.p2);
  tl.X.push_back({mid, 0.5 * (g.p2 - g.p1).norm() + 4.0 * R});
  ReducePlanResult out;
  out.timeline = std::move(tl);
  out.final_state = std::move(fin);
  return out;
}

}  // namespace

ReduceResult reduce_leaf(const MarbleTree& tree, int leaf_marble) {
  TreeVerdict tv = validate_marble_tree(tree);
  if (!tv.pass) throw validation_error("tree " + tv.clause, tv.detail);
  if (tree.marbles.size() < 2) throw validation_error("tree size", "need at least two marbles");
  TreeState s = TreeState::from_tree(tree);
  ReducePlanResult plan = reduce_frames(s, leaf_marble);
  ReduceResult out;
  out.timeline = std::move(plan.timeline);
  out.tree = plan.final_state.to_tree(plan.final_state.marbles[0].radius,
                                      plan.final_state.edges.empty()
                                          ? tree.r_s
                                          : plan.final_state.edges[0].radius);
  return out;
}

Timeline marble_tree_to_ball(const MarbleTree& tree) {
  TreeVerdict tv = validate_marble_tree(tree);
  if (!tv.pass) throw validation_error("tree " + tv.clause, tv.detail);
  TreeState state = TreeState::from_tree(tree);
  std::vector<Timeline> parts;

  if (state.marbles.size() == 1) {
    Timeline tl;
    detail::emit_frame(tl, 0.0, state_domain(state), "round_ball", 1);
    return tl;
  }

  int guard = 0;
  while (state.marbles.size() > 1 && guard++ < 64) {
    // deepest leaf from marble 0 (ties by index)
    std::vector<int> depth(state.marbles.size(), -1);
    std::vector<int> queue{0};
    depth[0] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      int cur = queue[qi];
      for (int nb : neighbors(state, cur))
        if (depth[static_cast<std::size_t>(nb)] < 0) {
          depth[static_cast<std::size_t>(nb)] = depth[static_cast<std::size_t>(cur)] + 1;
          queue.push_back(nb);
        }
    }
    int leaf = -1, best = -1;
    for (std::size_t i = 0; i < state.marbles.size(); ++i)
      if (neighbors(state, static_cast<int>(i)).size() == 1 && depth[i] > best &&
          state.marbles.size() > 1) {
        best = depth[i];
        leaf = static_cast<int>(i);
      }
    if (leaf == 0 && state.marbles.size() > 1) {
      // keep the root unless it is the only leaf pair member
      for (std::size_t i = 1; i < state.marbles.size(); ++i)
        if (neighbors(state, static_cast<int>(i)).size() == 1) leaf = static_cast<int>(i);
    }

    // keep the working string radius small enough for bent strings
    double R = state.marbles[0].radius;
    double r_work = 1e-5 * R;
    if (!state.edges.empty() && state.edges[0].radius > r_work * (1 + 1e-9)) {
      Timeline shrink_r;
      double r0 = state.edges[0].radius;
      for (int k = 0; k <= 8; ++k) {
        double t = static_cast<double>(k) / 8.0;
        TreeState st = state;
        for (auto& e : st.edges) e.radius = r0 * std::pow(r_work / r0, t);
        detail::emit_frame(shrink_r, t, state_domain(st), "shrink_strings",
                           static_cast<int>(st.marbles.size()));
        if (k == 8) state = st;
      }
      parts.push_back(std::move(shrink_r));
    }

    RearrangePlan plan = plan_rearrangement(state, leaf);
    if (plan.moved) {
      Timeline tl;
      for (std::size_t i = 0; i < plan.states.size(); ++i)
        detail::emit_frame(tl, static_cast<double>(i) / (plan.states.size() - 1),
                           state_domain(plan.states[i]), "rearrange",
                           static_cast<int>(plan.states[i].marbles.size()));
      for (const auto& m : state.marbles) tl.X.push_back({m.center, tree.r_m});
      parts.push_back(std::move(tl));
      state = plan.states.back();
    }

    LeafGeometry g = leaf_geometry(state, leaf);
    ReducePlanResult red = reduce_frames(state, leaf);
    parts.push_back(std::move(red.timeline));
    TreeState reduced = red.final_state;

    if (plan.moved) {
      // reverse the rearrangement for the surviving tree
      Timeline rev;
      for (std::size_t i = plan.states.size(); i-- > 0;) {
        TreeState st = plan.states[i];
        // drop the reduced leaf and its edge
        TreeState dropped = st;
        dropped.edges.erase(dropped.edges.begin() +
                            edge_between(dropped, g.leaf, g.parent));
        dropped.marbles.erase(dropped.marbles.begin() + g.leaf);
        for (auto& ed : dropped.edges) {
          if (ed.from > g.leaf) ed.from--;
          if (ed.to > g.leaf) ed.to--;
        }
        detail::emit_frame(rev, 1.0 - static_cast<double>(i) / (plan.states.size() - 1),
                           state_domain(dropped), "rearrange_reverse",
                           static_cast<int>(dropped.marbles.size()));
        if (i == 0) reduced = dropped;
      }
      for (const auto& m : state.marbles) rev.X.push_back({m.center, tree.r_m});
      parts.push_back(std::move(rev));
    }
    state = reduced;
  }
  return compose(parts, 1e-6);
}

}  // namespace tc
