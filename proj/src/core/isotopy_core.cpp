#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "core/isotopy_impl.hpp"

namespace tc {

namespace detail {

const CdeltaResult& cdelta_cached(double delta) {
  static std::map<double, std::unique_ptr<CdeltaResult>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(delta);
  if (it == cache.end())
    it = cache.emplace(delta, std::make_unique<CdeltaResult>(build_Cdelta_profile(delta))).first;
  return *it->second;
}

std::shared_ptr<const ProfileFunction> cap_profile(double r) {
  ProfileFunction f = standard_cap_profile().affine_transformed(-1.0 / r, 1.0, r, 0.0);
  f.set_label("cap_r");
  return std::make_shared<const ProfileFunction>(std::move(f));
}

void append_profile(ProfileFunction& dst, const ProfileFunction& src, double lo, double hi) {
  ProfileFunction clipped = src.restricted(lo, hi);
  for (std::size_t i = 0; i < clipped.piece_count(); ++i)
    dst.append(clipped.breakpoints()[i], clipped.breakpoints()[i + 1], clipped.piece(i).clone());
}

ProfileFunction marble_collar_profile(double R, double delta, double extend_to) {
  const CdeltaResult& cd = cdelta_cached(delta);
  ProfileFunction scaled = cd.u_delta.scaled(R);
  ProfileFunction out;
  out.set_label("marble_collar");
  append_profile(out, scaled, -R, cd.x_cyl * R);
  if (extend_to > cd.x_cyl * R)
    out.append(cd.x_cyl * R, extend_to, std::make_unique<ConstantPiece>(cd.rho * R));
  out.set_tails(ProfileFunction::Tail::kError, ProfileFunction::Tail::kConstant);
  return out;
}

MarbleTree TreeState::to_tree(double r_m_nominal, double r_s_nominal) const {
  MarbleTree t;
  t.marbles = marbles;
  t.r_m = r_m_nominal;
  t.r_s = r_s_nominal;
  t.b = b;
  t.params = params;
  for (const auto& e : edges) t.strings.push_back({e.from, e.to, e.curve});
  return t;
}

TreeState TreeState::from_tree(const MarbleTree& t) {
  TreeState s;
  s.marbles = t.marbles;
  s.b = t.b;
  s.params = t.params;
  for (const auto& e : t.strings) s.edges.push_back({e.from, e.to, e.curve, t.r_s});
  return s;
}

namespace {

struct ContactSpec {
  Vec axis;
  double delta;
  double R;
};

}  // namespace

GluedDomain state_domain(const TreeState& s) {
  GluedDomain d;
  d.n = s.params.n;
  d.params = s.params;
  std::vector<std::vector<SphereHole>> holes(s.marbles.size());
  struct Pending {
    int collar_id;
    std::size_t marble;
    PatchAdjacency adj;
  };
  std::vector<Pending> pend;

  for (const auto& e : s.edges) {
    const CurvePtr& comp = e.curve;
    double L = comp->length();
    double lo = 0, hi = L;
    for (int endi = 0; endi < 2; ++endi) {
      bool at_start = endi == 0;
      int mi = at_start ? e.from : e.to;
      const Marble& m = s.marbles[static_cast<std::size_t>(mi)];
      double R = m.radius;
      double delta = delta_of_rho(e.radius / R);
      const CdeltaResult& cd = cdelta_cached(delta);
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
    if (!(hi > lo))
      throw construction_error("tree state: collars overlap along a string", hi - lo);
    d.add_patch(std::make_unique<TubePatch>(comp, lo, hi, e.radius));
  }
  std::vector<int> sphere_ids(s.marbles.size(), -1);
  for (std::size_t mi = 0; mi < s.marbles.size(); ++mi)
    sphere_ids[mi] = d.add_patch(
        std::make_unique<SpherePatch>(s.marbles[mi].center, s.marbles[mi].radius, holes[mi]));
  for (auto& p : pend) {
    p.adj.a = p.collar_id;
    p.adj.b = sphere_ids[p.marble];
    d.add_adjacency(p.adj);
  }
  return d;
}

void emit_frame(Timeline& tl, double t, GluedDomain body, const std::string& annotation,
                int marble_count, double res_frac) {
  CurvatureReport rep = body.certify(res_frac);
  if (rep.verdict.kind == CurvatureVerdict::kFailed)
    throw construction_error("frame failed the 2-convexity certificate at step " + annotation,
                             rep.min_S);
  EmbedVerdict ev = body.check_embedded();
  if (!ev.pass)
    throw construction_error("frame failed the embeddedness certificate at step " + annotation,
                             ev.distance);
  Frame f;
  f.t = t;
  f.body = std::move(body);
  f.annotation = annotation;
  f.marble_count = marble_count;
  tl.frames.push_back(std::move(f));
}

std::vector<MeridianPatch::Node> minkowski_nodes(const std::vector<MeridianPatch::Node>& base,
                                                 double ball_radius, double t) {
  std::vector<MeridianPatch::Node> out;
  out.reserve(base.size());
  for (const auto& nd : base) {
    MeridianPatch::Node m;
    m.phi = nd.phi;
    m.x = t * (-ball_radius * std::cos(nd.phi)) + (1 - t) * nd.x;
    m.y = t * (ball_radius * std::sin(nd.phi)) + (1 - t) * nd.y;
    m.r_merid = std::isfinite(nd.r_merid) ? t * ball_radius + (1 - t) * nd.r_merid
                                          : (t > 0 ? std::numeric_limits<double>::infinity()
                                                   : nd.r_merid);
    // A flat stretch stays flat under Minkowski combination with a ball only
    // in the tangential sense; its radius becomes finite: t*R_ball + (1-t)*inf
    // is infinite for t < 1, so keep it infinite except at t == 1.
    if (!std::isfinite(nd.r_merid)) m.r_merid = std::numeric_limits<double>::infinity();
    if (t >= 1.0) m.r_merid = ball_radius;
    out.push_back(m);
  }
  return out;
}

}  // namespace detail

// --------------------------------------------------------------------- basics

Timeline Timeline::reversed() const {
  Timeline out;
  out.X = X;
  out.frames.reserve(frames.size());
  for (std::size_t i = frames.size(); i-- > 0;) {
    Frame f = frames[i];
    f.t = 1.0 - f.t;
    out.frames.push_back(std::move(f));
  }
  return out;
}

double domain_hausdorff(const GluedDomain& a, const GluedDomain& b, std::size_t samples) {
  auto one_side = [&](const GluedDomain& from, const GluedDomain& to) {
    std::vector<Vec> pts;
    for (const auto& p : from.patches()) {
      Vec c;
      double r;
      p->bounding_sphere(c, r);
      std::vector<Vec> mine;
      p->surface_points(std::max(r / 10.0, 1e-12), mine);
      std::size_t stride = std::max<std::size_t>(1, mine.size() * from.patches().size() / samples);
      for (std::size_t i = 0; i < mine.size(); i += stride) pts.push_back(mine[i]);
    }
    double worst = 0;
    for (const Vec& x : pts) {
      if (to.contains(x, 1e-12)) continue;
      worst = std::max(worst, to.boundary_distance(x));
    }
    return worst;
  };
  return std::max(one_side(a, b), one_side(b, a));
}

namespace {

bool contained_outside_X(const GluedDomain& inner, const GluedDomain& outer,
                         const std::vector<Marble>& X, double tol) {
  for (const auto& p : inner.patches()) {
    Vec c;
    double r;
    p->bounding_sphere(c, r);
    std::vector<Vec> pts;
    p->surface_points(std::max(r / 8.0, 1e-12), pts);
    std::size_t stride = std::max<std::size_t>(1, pts.size() / 160);
    for (std::size_t i = 0; i < pts.size(); i += stride) {
      const Vec& x = pts[i];
      bool in_X = false;
      for (const Marble& ball : X)
        if ((x - ball.center).norm() < ball.radius) in_X = true;
      if (in_X) continue;
      if (!outer.contains(x, tol)) return false;
    }
  }
  return true;
}

bool trivial_pair_outside_X(const GluedDomain& a, const GluedDomain& b,
                            const std::vector<Marble>& X, double tol) {
  auto check = [&](const GluedDomain& from, const GluedDomain& to) {
    for (const auto& p : from.patches()) {
      Vec c;
      double r;
      p->bounding_sphere(c, r);
      std::vector<Vec> pts;
      p->surface_points(std::max(r / 8.0, 1e-12), pts);
      std::size_t stride = std::max<std::size_t>(1, pts.size() / 160);
      for (std::size_t i = 0; i < pts.size(); i += stride) {
        const Vec& x = pts[i];
        bool in_X = false;
        for (const Marble& ball : X)
          if ((x - ball.center).norm() < ball.radius) in_X = true;
        if (in_X) continue;
        if (to.boundary_distance(x) > tol) return false;
      }
    }
    return true;
  };
  return check(a, b) && check(b, a);
}

double domain_scale(const GluedDomain& d) {
  double s = 0;
  for (const auto& p : d.patches()) {
    Vec c;
    double r;
    p->bounding_sphere(c, r);
    s = std::max(s, r);
  }
  return s;
}

}  // namespace

Timeline compose(const std::vector<Timeline>& parts, double match_tol) {
  Timeline out;
  double total = 0;
  for (const auto& p : parts) total += std::max<std::size_t>(1, p.frames.size()) - 0;
  if (total == 0) return out;
  double offset = 0;
  const Frame* prev_end = nullptr;
  for (const auto& part : parts) {
    if (part.frames.empty()) continue;
    if (prev_end) {
      double scale = std::max(domain_scale(prev_end->body), 1e-12);
      double gap = domain_hausdorff(prev_end->body, part.frames.front().body);
      if (gap > match_tol * std::max(1.0, scale))
        throw validation_error("compose junction",
                               "consecutive timelines deviate by " + std::to_string(gap));
    }
    for (std::size_t i = 0; i < part.frames.size(); ++i) {
      if (prev_end && i == 0 && !out.frames.empty()) continue;  // drop duplicate junction frame
      Frame f = part.frames[i];
      f.t = offset + f.t;
      out.frames.push_back(std::move(f));
    }
    offset += 1.0;
    prev_end = &part.frames.back();
    for (const Marble& m : part.X) out.X.push_back(m);
  }
  // retime to [0, 1]
  if (!out.frames.empty()) {
    double t0 = out.frames.front().t, t1 = out.frames.back().t;
    double span = std::max(t1 - t0, 1e-300);
    for (auto& f : out.frames) f.t = (f.t - t0) / span;
  }
  // recompute flags cheaply on a subsample of frame pairs
  TimelineReport rep = verify_timeline(out, 0.0, 5e-2);
  out.flags.monotone = rep.monotone;
  out.flags.monotone_outside_X = rep.monotone_outside_X;
  out.flags.trivial_outside_X = rep.trivial_outside_X;
  return out;
}

TimelineReport verify_timeline(const Timeline& tl, double beta, double res_frac) {
  TimelineReport rep;
  rep.beta = beta;
  rep.resolution = res_frac;
  const GluedDomain* prev = nullptr;
  for (const auto& f : tl.frames) {
    FrameRow row;
    row.t = f.t;
    row.annotation = f.annotation;
    CurvatureReport cr = f.body.certify(res_frac);
    row.min_S = cr.min_S;
    row.min_S_over_H = cr.min_S_over_H;
    row.min_H = cr.min_H;
    if (!(cr.min_S > 0) || (beta > 0 && cr.min_S_over_H < beta)) rep.all_two_convex = false;
    row.embedded = f.body.check_embedded().pass;
    if (!row.embedded) rep.all_embedded = false;
    if (prev) {
      double scale = std::max(domain_scale(*prev), 1e-12);
      row.hausdorff_to_previous = domain_hausdorff(*prev, f.body);
      bool mono_all = contained_outside_X(f.body, *prev, {}, 1e-7 * scale);
      bool mono_X = contained_outside_X(f.body, *prev, tl.X, 1e-7 * scale);
      bool triv_X = trivial_pair_outside_X(f.body, *prev, tl.X, 1e-6 * scale);
      row.contained_in_previous_outside_X = mono_X;
      if (!mono_all) rep.monotone = false;
      if (!mono_X) rep.monotone_outside_X = false;
      if (!triv_X) rep.trivial_outside_X = false;
    }
    rep.rows.push_back(std::move(row));
    prev = &f.body;
  }
  return rep;
}

// --------------------------------------------------------- convex machinery

std::vector<MeridianPatch::Node> meridian_nodes_from_profile(const ProfileFunction& profile,
                                                             double x0, double x1,
                                                             std::size_t samples) {
  std::vector<double> xs;
  double span = x1 - x0;
  for (std::size_t i = 1; i < samples; ++i)
    xs.push_back(x0 + span * static_cast<double>(i) / static_cast<double>(samples));
  for (double b : profile.breakpoints())
    if (b > x0 + 1e-12 * span && b < x1 - 1e-12 * span) xs.push_back(b);
  for (int k = 3; k < 40; ++k) {
    xs.push_back(x0 + span * std::ldexp(1.0, -k));
    xs.push_back(x1 - span * std::ldexp(1.0, -k));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::vector<MeridianPatch::Node> nodes;
  // exact left pole
  {
    MeridianPatch::Node nd;
    nd.phi = 0;
    nd.x = x0;
    nd.y = 0;
    Jet2 j = profile.jet(x0 + span * 1e-9);
    double om = 1 + j.d1 * j.d1;
    nd.r_merid = std::abs(j.d2) > 1e-300 ? std::pow(om, 1.5) / std::abs(j.d2)
                                         : std::numeric_limits<double>::infinity();
    nodes.push_back(nd);
  }
  for (double x : xs) {
    Jet2 j = profile.jet(x);
    if (!(j.v > 0) || !std::isfinite(j.d1)) continue;
    double w = std::sqrt(1 + j.d1 * j.d1);
    MeridianPatch::Node nd;
    nd.phi = std::acos(std::clamp(j.d1 / w, -1.0, 1.0));
    nd.x = x;
    nd.y = j.v;
    nd.r_merid = (j.d2 < -1e-300) ? std::pow(w, 3.0) / (-j.d2)
                                  : std::numeric_limits<double>::infinity();
    if (!nodes.empty() && nd.phi < nodes.back().phi - 1e-10) continue;  // needs concavity
    if (!nodes.empty() && nd.phi <= nodes.back().phi) nd.phi = nodes.back().phi;
    nodes.push_back(nd);
  }
  {
    MeridianPatch::Node nd;
    nd.phi = kPi;
    nd.x = x1;
    nd.y = 0;
    Jet2 j = profile.jet(x1 - span * 1e-9);
    double om = 1 + j.d1 * j.d1;
    nd.r_merid = std::abs(j.d2) > 1e-300 ? std::pow(om, 1.5) / std::abs(j.d2)
                                         : std::numeric_limits<double>::infinity();
    if (nd.phi < nodes.back().phi) nd.phi = nodes.back().phi;
    nodes.push_back(nd);
  }
  return nodes;
}

Timeline convex_shrink(const GluedDomain& body, const Marble& inner_ball, std::size_t steps) {
  // locate the single meridian or sphere patch carrying the body
  const MeridianPatch* mp = nullptr;
  const SpherePatch* sp = nullptr;
  for (const auto& p : body.patches()) {
    if (auto* m = dynamic_cast<const MeridianPatch*>(p.get())) mp = m;
    if (auto* s = dynamic_cast<const SpherePatch*>(p.get())) sp = s;
  }
  Timeline tl;
  if (sp && !mp) {
    if ((sp->center() - inner_ball.center).norm() + inner_ball.radius >
        sp->radius() * (1 + 1e-9))
      throw validation_error("inner ball", "ball not contained in the body");
    // sphere shrink: radii interpolate, center moves linearly
    for (std::size_t k = 0; k <= steps; ++k) {
      double t = static_cast<double>(k) / static_cast<double>(steps);
      GluedDomain d;
      d.n = body.n;
      d.params = body.params;
      Vec c = t * inner_ball.center + (1 - t) * sp->center();
      double r = t * inner_ball.radius + (1 - t) * sp->radius();
      d.add_patch(std::make_unique<SpherePatch>(c, r));
      detail::emit_frame(tl, t, std::move(d), "convex_shrink", 1);
    }
    tl.flags.monotone = true;
    return tl;
  }
  if (!mp) throw validation_error("convex body", "convex_shrink needs a revolution body");

  // convexity: meridional radii nonnegative and support function consistent
  for (const auto& nd : mp->nodes())
    if (std::isfinite(nd.r_merid) && nd.r_merid < -1e-12)
      throw validation_error("convex", "meridional curvature changes sign");
  // inner ball containment via support functions (ball centered on the axis)
  Vec rel = inner_ball.center - mp->origin();
  double on_axis = rel.dot(mp->axis());
  if ((rel - on_axis * mp->axis()).norm() > 1e-9 * (1 + std::abs(on_axis)))
    throw validation_error("inner ball", "ball center must lie on the symmetry axis");
  for (int k = 0; k <= 64; ++k) {
    double phi = kPi * k / 64.0;
    double d_ax = -std::cos(phi), d_perp = std::sin(phi);
    double hK = -1e300;
    for (const auto& nd : mp->nodes()) hK = std::max(hK, nd.x * d_ax + nd.y * d_perp);
    double hB = on_axis * d_ax + inner_ball.radius;
    if (hB > hK + 1e-9 * (1 + std::abs(hK)))
      throw validation_error("inner ball", "ball support exceeds the body support");
  }

  // shift nodes so the ball center is the origin of the combination
  std::vector<MeridianPatch::Node> base = mp->nodes();
  for (auto& nd : base) nd.x -= on_axis;
  for (std::size_t k = 0; k <= steps; ++k) {
    double t = static_cast<double>(k) / static_cast<double>(steps);
    GluedDomain d;
    d.n = body.n;
    d.params = body.params;
    auto nodes = detail::minkowski_nodes(base, inner_ball.radius, t);
    for (auto& nd : nodes) nd.x += on_axis;
    d.add_patch(std::make_unique<MeridianPatch>(mp->origin(), mp->axis(), std::move(nodes)));
    detail::emit_frame(tl, t, std::move(d), "convex_shrink", 1);
  }
  tl.flags.monotone = true;
  return tl;
}

NeckSlideTrack slide_curve_along_neck(double r, double Gamma, int n, double t0, double b,
                                      std::size_t samples) {
  if (!(r > 0 && Gamma >= 1 && n >= 2)) throw validation_error("params", "bad neck parameters");
  double tmax = sq(8 * Gamma * r) / (2.0 * (n - 1));
  if (!(std::abs(t0) <= tmax))
    throw validation_error("|t0| <= (8 Gamma r)^2 / 2(n-1)", "slide time out of range");
  NeckSlideTrack out;
  out.control_b = std::min(b, r) / (1000.0 * Gamma);
  for (std::size_t i = 0; i <= samples; ++i) {
    double t = t0 * static_cast<double>(i) / static_cast<double>(samples);
    NeckSlideSample s;
    s.t = t;
    s.r_t = std::sqrt(sq(r) - 2.0 * (n - 1) * t);
    double a2 = sq(8 * Gamma * r) - sq(s.r_t);
    s.endpoint_axial = std::sqrt(std::max(0.0, a2));
    Vec p(3), q(3);
    p << s.endpoint_axial, s.r_t, 0;
    q << s.endpoint_axial, s.r_t + std::max(Gamma * r, 4.0 * out.control_b * 10.0), 0;
    s.ray = std::make_shared<SegmentCurve>(p, q);
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace tc
