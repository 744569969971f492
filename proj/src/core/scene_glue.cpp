#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/scene.hpp"

namespace tc {

// ------------------------------------------------------------- configuration

ConfigVerdict validate_configuration(const Configuration& cfg) {
  ConfigVerdict v;
  double b = cfg.b();
  if (cfg.attachments.size() != cfg.curve.components.size()) {
    v.pass = false;
    v.clause = "attachments";
    v.detail = "one attachment pair per curve component required";
    return v;
  }
  CurveVerdict cv = validate_curve(cfg.curve);
  if (!cv.pass) {
    v.pass = false;
    v.clause = "curve " + cv.clause;
    return v;
  }
  for (std::size_t i = 0; i < cfg.curve.components.size(); ++i) {
    const CurveComponent& comp = *cfg.curve.components[i];
    double L = comp.length();
    for (int endi = 0; endi < 2; ++endi) {
      const Attachment& att = endi == 0 ? cfg.attachments[i].first : cfg.attachments[i].second;
      Vec p = endi == 0 ? comp.start() : comp.end();
      Vec tan = endi == 0 ? Vec(comp.tangent(0.0)) : Vec(-comp.tangent(L));  // into the curve
      if (att.loose()) {
        for (const Marble& m : cfg.marbles) {
          double dist = (p - m.center).norm() - m.radius;
          if (dist < 10.0 * b * (1 - 1e-9)) {
            v.pass = false;
            v.clause = "loose endpoint clearance";
            v.detail = "d(p, dK) >= 10b violated";
            return v;
          }
        }
      } else {
        if (att.marble < 0 || att.marble >= static_cast<int>(cfg.marbles.size())) {
          v.pass = false;
          v.clause = "attachment index";
          return v;
        }
        const Marble& m = cfg.marbles[static_cast<std::size_t>(att.marble)];
        double on_sphere = std::abs((p - m.center).norm() - m.radius);
        if (on_sphere > 1e-6 * m.radius) {
          v.pass = false;
          v.clause = "endpoint on marble";
          v.detail = "attached endpoint must lie on the marble boundary";
          return v;
        }
        Vec outward = (p - m.center) / (p - m.center).norm();
        if (std::abs(tan.dot(outward) - 1.0) > 1e-6) {
          v.pass = false;
          v.clause = "orthogonality";
          v.detail = "curve must meet the marble boundary orthogonally";
          return v;
        }
      }
    }
    // interior disjoint from the marbles, with the b/20 clearance away from
    // the endpoint balls
    int samples = 400;
    for (int k = 0; k <= samples; ++k) {
      double s = L * k / static_cast<double>(samples);
      Vec p = comp.position(s);
      bool near_end = (p - comp.start()).norm() < b / 10.0 || (p - comp.end()).norm() < b / 10.0;
      for (const Marble& m : cfg.marbles) {
        double dist = (p - m.center).norm() - m.radius;
        if (dist < -1e-9 * m.radius) {
          v.pass = false;
          v.clause = "interior disjoint";
          v.detail = "curve interior enters a marble";
          return v;
        }
        if (!near_end && dist < b / 20.0 * (1 - 1e-9)) {
          v.pass = false;
          v.clause = "mid-curve clearance";
          v.detail = "d(curve minus end balls, dK) >= b/20 violated";
          return v;
        }
      }
    }
  }
  return v;
}

Configuration MarbleTree::to_configuration() const {
  Configuration cfg;
  cfg.marbles = marbles;
  cfg.params = params;
  cfg.curve.b = b;
  for (const auto& s : strings) {
    cfg.curve.components.push_back(s.curve);
    cfg.attachments.push_back({Attachment{s.from}, Attachment{s.to}});
  }
  return cfg;
}

TreeVerdict validate_marble_tree(const MarbleTree& t) {
  TreeVerdict v;
  for (const Marble& m : t.marbles)
    if (std::abs(m.radius - t.r_m) > 1e-9 * t.r_m) {
      v.pass = false;
      v.clause = "marble radius";
      v.detail = "all marbles must have radius r_m";
      return v;
    }
  if (t.strings.empty() && t.marbles.size() != 1) {
    v.pass = false;
    v.clause = "tree";
    v.detail = "no strings but several marbles";
    return v;
  }
  // incidence graph must be a tree (connected, no cycles)
  std::vector<int> parent(t.marbles.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& s : t.strings) {
    if (s.from < 0 || s.to < 0 || s.from >= static_cast<int>(t.marbles.size()) ||
        s.to >= static_cast<int>(t.marbles.size())) {
      v.pass = false;
      v.clause = "string endpoints";
      return v;
    }
    if (find(s.from) == find(s.to)) {
      v.pass = false;
      v.clause = "not a tree";
      v.detail = "strings form a cycle";
      return v;
    }
    parent[find(s.from)] = find(s.to);
  }
  int root = t.marbles.empty() ? 0 : find(0);
  for (std::size_t i = 0; i < t.marbles.size(); ++i)
    if (find(static_cast<int>(i)) != root) {
      v.pass = false;
      v.clause = "not a tree";
      v.detail = "incidence graph is disconnected";
      return v;
    }
  // straight rays within 3 r_m of both marble centers
  for (const auto& s : t.strings) {
    const CurveComponent& c = *s.curve;
    for (int endi = 0; endi < 2; ++endi) {
      Vec center = t.marbles[static_cast<std::size_t>(endi == 0 ? s.from : s.to)].center;
      for (int k = 0; k <= 64; ++k) {
        double arc = 2.0 * t.r_m * k / 64.0;  // contact at distance r_m from center
        double ss = endi == 0 ? arc : c.length() - arc;
        if (ss < 0 || ss > c.length()) continue;
        if ((c.position(ss) - center).norm() > 3.0 * t.r_m) continue;
        if (c.curvature(ss) > 1e-9 / t.r_m) {
          v.pass = false;
          v.clause = "straight rays";
          v.detail = "string is not straight within 3 r_m of a marble center";
          return v;
        }
      }
    }
  }
  if (!(t.r_s < glue_r_bar(t.params, t.b, /*with_loose_ends=*/false))) {
    v.pass = false;
    v.clause = "r_s < r_bar";
    v.detail = "string radius above the gluing threshold";
    return v;
  }
  return v;
}

// ------------------------------------------------------------------ thresholds

double glue_r_bar(const ControlParams& params, double b, bool with_loose_ends) {
  double zeta = zeta_threshold(params);
  double r1 = with_loose_ends ? 1e-6 * zeta * b : 0.999 * zeta * b;
  double r2 = 0.9 * rho_of_delta(1.0 - 1e-9) / params.C_A;
  double r = std::min(r1, r2);
  if (with_loose_ends) {
    // bending happens at scale delta(r); keep it far below the control b
    for (int i = 0; i < 200 && glue_delta_of_r(params, r) >= b / 100.0; ++i) r *= 0.5;
  }
  return r;
}

double glue_delta_of_r(const ControlParams& params, double r) {
  // 2 sqrt(2) n / c_H * sqrt(rho^{-1}(C_A r)); the model-case gauge constant
  // is 1 (see the build notes).
  double x = std::min(params.C_A * r, rho_of_delta(1.0 - 1e-9));
  return 2.0 * std::sqrt(2.0) * params.n / params.c_H * std::sqrt(delta_of_rho(x));
}

// ------------------------------------------------------------------- caps

namespace {

// Cap profile scaled to radius r, apex at xi = 0, opening toward +xi:
// radius(xi) = r * u_st(1 - xi/r) over [0, 1.01 r].
std::shared_ptr<const ProfileFunction> cap_profile_for_radius(double r) {
  ProfileFunction f = standard_cap_profile().affine_transformed(-1.0 / r, 1.0, r, 0.0);
  f.set_label("cap_r" + std::to_string(r));
  return std::make_shared<const ProfileFunction>(std::move(f));
}

std::shared_ptr<const ProfileFunction> collar_profile_world(const CdeltaResult& cd, double R) {
  ProfileFunction f = cd.u_delta.scaled(R);
  f.set_label("collar");
  return std::make_shared<const ProfileFunction>(std::move(f));
}

}  // namespace

CappedTubeResult capped_tube(const ControlledCurve& c, std::size_t component, double s0, double r,
                             bool right_cap, const ControlParams& params) {
  if (component >= c.components.size()) throw validation_error("component", "no such component");
  const CurvePtr& comp = c.components[component];
  double L = comp->length();
  if (!(r > 0 && r < c.b / 10.0))
    throw validation_error("r < b/10", "cap radius too large for the control scale");
  double cap_arc = 1.01 * r;
  if (right_cap && s0 < cap_arc - 1e-12)
    throw validation_error("cap position", "cap point too close to the left endpoint");
  if (!right_cap && s0 > L - cap_arc + 1e-12)
    throw validation_error("cap position", "cap point too close to the right endpoint");

  CappedTubeResult out;
  out.domain.n = params.n;
  out.domain.params = params;
  Vec tip = comp->position(s0);
  out.tip = tip;
  Vec dir = right_cap ? Vec(-comp->tangent(s0)) : Vec(comp->tangent(s0));
  // The cap sits on the locally straight piece of the spine, opening into
  // the tube.
  auto profile = cap_profile_for_radius(r);
  int cap_id = out.domain.add_patch(std::make_unique<RevolutionPatch>(tip, dir, profile, 0.0,
                                                                      cap_arc));
  double t0 = right_cap ? 0.0 : s0 + cap_arc;
  double t1 = right_cap ? s0 - cap_arc : L;
  int tube_id = -1;
  if (t1 > t0 + 1e-12)
    tube_id = out.domain.add_patch(std::make_unique<TubePatch>(comp, t0, t1, r));
  if (tube_id >= 0) {
    PatchAdjacency adj;
    adj.a = cap_id;
    adj.b = tube_id;
    adj.circle_center = tip + cap_arc * dir;
    adj.circle_axis = dir;
    adj.circle_radius = r;
    adj.c1_defect = std::abs(profile->eval(cap_arc) - r);
    out.domain.add_adjacency(std::move(adj));
  }
  out.report = out.domain.certify(1e-2);
  if (out.report.verdict.kind == CurvatureVerdict::kFailed)
    throw construction_error("capped tube failed the 2-convexity certificate",
                             out.report.min_S);
  return out;
}

// ------------------------------------------------------------------- gluing

GlueResult glue(const Configuration& cfg, double r) {
  cfg.params.validate();
  ConfigVerdict cv = validate_configuration(cfg);
  if (!cv.pass) throw validation_error("configuration " + cv.clause, cv.detail);
  double b = cfg.b();
  bool has_loose = false;
  for (const auto& att : cfg.attachments)
    if (att.first.loose() || att.second.loose()) has_loose = true;
  double r_bar = glue_r_bar(cfg.params, b, has_loose);
  if (!(r < r_bar)) throw validation_error("r < r_bar", "string radius above the gluing threshold");

  GlueResult out;
  out.info.r = r;
  out.info.r_bar = r_bar;
  double delta_r = glue_delta_of_r(cfg.params, r);
  out.info.delta_r = delta_r;
  out.domain.n = cfg.params.n;
  out.domain.params = cfg.params;

  // Collar balls must be pairwise disjoint.
  std::vector<Vec> ball_centers;
  for (std::size_t i = 0; i < cfg.curve.components.size(); ++i) {
    ball_centers.push_back(cfg.curve.components[i]->start());
    ball_centers.push_back(cfg.curve.components[i]->end());
  }
  for (std::size_t i = 0; i < ball_centers.size(); ++i)
    for (std::size_t j = i + 1; j < ball_centers.size(); ++j)
      if ((ball_centers[i] - ball_centers[j]).norm() < 2 * delta_r)
        throw validation_error("collar balls disjoint",
                               "configuration too tight for the locality radius");

  // Marble patches accumulate holes as collars attach.
  std::vector<std::vector<SphereHole>> holes(cfg.marbles.size());

  struct PendingAdj {
    int patch_a = -1;
    std::size_t marble = 0;
    PatchAdjacency adj;
  };
  std::vector<PendingAdj> sphere_adjs;

  for (std::size_t ci = 0; ci < cfg.curve.components.size(); ++ci) {
    CurvePtr comp = cfg.curve.components[ci];
    double L = comp->length();
    double tube_lo = 0.0, tube_hi = L;
    int first_patch = -1, last_patch = -1;
    Vec lo_circle_center, hi_circle_center;

    for (int endi = 0; endi < 2; ++endi) {
      bool at_start = endi == 0;
      const Attachment& att = at_start ? cfg.attachments[ci].first : cfg.attachments[ci].second;
      if (att.loose()) {
        // capped end (the model configurations carry straight ends; a bent
        // end would arrive here already straightened)
        double s0 = at_start ? 0.0 : L;
        Vec tip = comp->position(s0);
        Vec dir = at_start ? Vec(comp->tangent(0.0)) : Vec(-comp->tangent(L));
        auto profile = cap_profile_for_radius(r);
        double cap_arc = 1.01 * r;
        int cap_id = out.domain.add_patch(
            std::make_unique<RevolutionPatch>(tip, dir, profile, 0.0, cap_arc));
        if (at_start) {
          tube_lo = cap_arc;
          first_patch = cap_id;
          lo_circle_center = tip + cap_arc * dir;
        } else {
          tube_hi = L - cap_arc;
          last_patch = cap_id;
          hi_circle_center = tip + cap_arc * dir;
        }
      } else {
        const Marble& m = cfg.marbles[static_cast<std::size_t>(att.marble)];
        double R = m.radius;
        double ratio = r / R;
        double delta = delta_of_rho(ratio);
        if (!(delta > 0 && delta < 1))
          throw validation_error("collar ratio", "string radius incompatible with marble radius");
        CdeltaResult cd = build_Cdelta_profile(delta);
        Vec contact = at_start ? comp->start() : comp->end();
        Vec axis = (contact - m.center) / (contact - m.center).norm();
        auto prof = collar_profile_world(cd, R);
        // collar spans [x_sphere_end, x_cyl] * R along the contact axis from
        // the marble center
        int collar_id = out.domain.add_patch(std::make_unique<RevolutionPatch>(
            m.center, axis, prof, cd.x_sphere_end * R, cd.x_cyl * R));
        holes[static_cast<std::size_t>(att.marble)].push_back(
            SphereHole{axis, cd.x_sphere_end, cd.x_sphere_end * R});

        // sphere <-> collar junction
        PendingAdj pa;
        pa.patch_a = collar_id;
        pa.marble = static_cast<std::size_t>(att.marble);
        pa.adj.circle_center = m.center + cd.x_sphere_end * R * axis;
        pa.adj.circle_axis = axis;
        pa.adj.circle_radius = R * std::sqrt(std::max(0.0, 1.0 - sq(cd.x_sphere_end)));
        Jet2 jc = prof->jet(cd.x_sphere_end * R);
        double sphere_val = R * std::sqrt(std::max(0.0, 1.0 - sq(cd.x_sphere_end)));
        double sphere_slope = -cd.x_sphere_end / std::sqrt(std::max(1e-300, 1.0 - sq(cd.x_sphere_end)));
        pa.adj.c1_defect = std::abs(jc.v - sphere_val) + std::abs(jc.d1 - sphere_slope);
        sphere_adjs.push_back(std::move(pa));

        // collar cylinder meets the tube at arc (x_cyl - 1) R from the contact
        double cyl_arc = (cd.x_cyl - 1.0) * R;
        GlueInfo::Collar info;
        info.component = static_cast<int>(ci);
        info.at_start = at_start;
        info.marble = att.marble;
        info.delta = delta;
        info.contact = contact;
        out.info.collars.push_back(std::move(info));

        PatchAdjacency tube_adj;
        tube_adj.a = collar_id;
        tube_adj.circle_axis = at_start ? Vec(comp->tangent(0.0)) : Vec(-comp->tangent(L));
        tube_adj.circle_center = m.center + cd.x_cyl * R * axis;
        tube_adj.circle_radius = cd.rho * R;
        tube_adj.c1_defect = std::abs(cd.rho * R - r);
        if (at_start) {
          tube_lo = cyl_arc;
          first_patch = collar_id;
          lo_circle_center = tube_adj.circle_center;
        } else {
          tube_hi = L - cyl_arc;
          last_patch = collar_id;
          hi_circle_center = tube_adj.circle_center;
        }
      }
    }
    if (!(tube_hi > tube_lo))
      throw validation_error("tube length", "collars or caps overlap along the string");
    int tube_id = out.domain.add_patch(std::make_unique<TubePatch>(comp, tube_lo, tube_hi, r));
    if (first_patch >= 0) {
      PatchAdjacency adj;
      adj.a = first_patch;
      adj.b = tube_id;
      adj.circle_center = lo_circle_center;
      adj.circle_axis = comp->tangent(tube_lo);
      adj.circle_radius = r;
      out.domain.add_adjacency(std::move(adj));
    }
    if (last_patch >= 0) {
      PatchAdjacency adj;
      adj.a = last_patch;
      adj.b = tube_id;
      adj.circle_center = hi_circle_center;
      adj.circle_axis = comp->tangent(tube_hi);
      adj.circle_radius = r;
      out.domain.add_adjacency(std::move(adj));
    }
  }

  // Marble sphere patches (with their collar holes) last, so collar/tube ids
  // stay contiguous per component.
  std::vector<int> sphere_ids(cfg.marbles.size(), -1);
  for (std::size_t mi = 0; mi < cfg.marbles.size(); ++mi) {
    sphere_ids[mi] = out.domain.add_patch(std::make_unique<SpherePatch>(
        cfg.marbles[mi].center, cfg.marbles[mi].radius, holes[mi]));
  }
  for (auto& pa : sphere_adjs) {
    pa.adj.a = pa.patch_a;
    pa.adj.b = sphere_ids[pa.marble];
    out.domain.add_adjacency(pa.adj);
  }

  out.info.report = out.domain.certify(1e-2);
  if (out.info.report.verdict.kind == CurvatureVerdict::kFailed)
    throw construction_error("glued domain failed the 2-convexity certificate",
                             out.info.report.min_S);
  EmbedVerdict ev = out.domain.check_embedded();
  if (!ev.pass)
    throw construction_error("glued domain is not embedded", ev.distance);
  return out;
}

}  // namespace tc
