#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>

#include "core/scene.hpp"

namespace tc {

GluedDomain::GluedDomain(const GluedDomain& other)
    : params(other.params), n(other.n), adjacency_(other.adjacency_) {
  patches_.reserve(other.patches_.size());
  for (const auto& p : other.patches_) patches_.push_back(p->clone());
}

GluedDomain& GluedDomain::operator=(const GluedDomain& other) {
  if (this == &other) return *this;
  GluedDomain tmp(other);
  *this = std::move(tmp);
  return *this;
}

int GluedDomain::add_patch(PatchPtr p) {
  p->id = static_cast<int>(patches_.size());
  patches_.push_back(std::move(p));
  return patches_.back()->id;
}

bool GluedDomain::contains(const Vec& x, double tol) const {
  for (const auto& p : patches_)
    if (p->solid_contains(x, tol)) return true;
  return false;
}

double GluedDomain::boundary_distance(const Vec& x) const {
  double best = 1e300;
  for (const auto& p : patches_) best = std::min(best, p->surface_distance(x));
  return best;
}

CurvatureReport GluedDomain::certify(double res_frac) const {
  std::vector<std::vector<CurvatureSample>> per(patches_.size());
  parallel_for(patches_.size(), [&](std::size_t a, std::size_t b) {
    for (std::size_t i = a; i < b; ++i) patches_[i]->certify_samples(n, res_frac, per[i]);
  });
  CurvatureReport r;
  r.min_S_over_H = 1e300;
  r.min_H = 1e300;
  r.min_S = 1e300;
  r.max_lambda_n = -1e300;
  CurvatureSample worst;
  for (auto& v : per) {
    for (auto& s : v) {
      r.sample_count++;
      double soh = s.pc.H != 0 ? s.pc.S / s.pc.H : 1e300;
      if (soh < r.min_S_over_H) {
        r.min_S_over_H = soh;
        worst = s;
      }
      r.min_H = std::min(r.min_H, s.pc.H);
      r.min_S = std::min(r.min_S, s.pc.S);
      r.max_lambda_n = std::max(r.max_lambda_n, s.pc.lambdas.back());
      if (r.samples.size() < 512) r.samples.push_back(s);
    }
  }
  if (r.sample_count == 0) {
    r.verdict.kind = CurvatureVerdict::kFailed;
    return r;
  }
  r.samples.push_back(worst);
  if (!(r.min_S > 0)) {
    r.verdict.kind = CurvatureVerdict::kFailed;
    r.verdict.witness = worst;
  } else if (r.min_S_over_H >= params.beta) {
    r.verdict.kind = CurvatureVerdict::kBetaUniform;
    r.verdict.beta = params.beta;
  } else {
    r.verdict.kind = CurvatureVerdict::kTwoConvex;
  }
  return r;
}

CurvatureReport GluedDomain::sample_boundary(double resolution) const {
  CurvatureReport r = certify(1e-2);
  std::size_t count = 0;
  std::vector<CurvatureSample> extra;
  for (const auto& p : patches_) {
    std::vector<Vec> pts;
    p->surface_points(resolution, pts);
    count += pts.size();
    std::size_t stride = std::max<std::size_t>(1, pts.size() / 64);
    for (std::size_t i = 0; i < pts.size(); i += stride) {
      CurvatureSample s;
      s.point = pts[i];
      s.pc = p->curvature_at(pts[i], n);
      s.patch_id = p->id;
      extra.push_back(std::move(s));
    }
  }
  for (auto& s : extra) {
    double soh = s.pc.H != 0 ? s.pc.S / s.pc.H : 1e300;
    r.min_S_over_H = std::min(r.min_S_over_H, soh);
    r.min_H = std::min(r.min_H, s.pc.H);
    r.min_S = std::min(r.min_S, s.pc.S);
    r.max_lambda_n = std::max(r.max_lambda_n, s.pc.lambdas.back());
    if (r.samples.size() < 1024) r.samples.push_back(s);
  }
  r.sample_count = count;
  return r;
}

EmbedVerdict GluedDomain::check_embedded() const {
  EmbedVerdict v;
  std::vector<std::vector<bool>> adjacent(patches_.size(),
                                          std::vector<bool>(patches_.size(), false));
  for (const auto& a : adjacency_) {
    if (a.a >= 0 && a.b >= 0) {
      adjacent[a.a][a.b] = adjacent[a.b][a.a] = true;
    }
  }
  // domain scale for tolerances
  double scale = 0;
  std::vector<Vec> centers(patches_.size());
  std::vector<double> radii(patches_.size());
  for (std::size_t i = 0; i < patches_.size(); ++i) {
    patches_[i]->bounding_sphere(centers[i], radii[i]);
    scale = std::max(scale, radii[i]);
  }
  double tol = 1e-7 * scale;

  std::vector<std::vector<Vec>> pts(patches_.size());
  for (std::size_t i = 0; i < patches_.size(); ++i) {
    double res = std::max(radii[i] / 12.0, 1e-9);
    patches_[i]->surface_points(res, pts[i]);
    if (pts[i].size() > 800) {
      std::vector<Vec> dec;
      std::size_t stride = pts[i].size() / 800 + 1;
      for (std::size_t k = 0; k < pts[i].size(); k += stride) dec.push_back(pts[i][k]);
      pts[i] = std::move(dec);
    }
  }
  for (std::size_t i = 0; i < patches_.size(); ++i) {
    for (std::size_t j = 0; j < patches_.size(); ++j) {
      if (i == j || adjacent[i][j]) continue;
      if ((centers[i] - centers[j]).norm() > radii[i] + radii[j] + tol) continue;
      for (const Vec& p : pts[i]) {
        if (patches_[j]->solid_contains(p, -tol)) {
          // strictly inside another patch solid: overlap witness
          v.pass = false;
          v.patch_a = static_cast<int>(i);
          v.patch_b = static_cast<int>(j);
          v.witness = p;
          v.distance = patches_[j]->surface_distance(p);
          return v;
        }
      }
    }
  }
  return v;
}

double GluedDomain::adjacency_defect() const {
  double worst = 0;
  for (const auto& a : adjacency_) {
    worst = std::max(worst, a.c1_defect);
    Vec e1, e2;
    perp_frame(a.circle_axis, e1, e2);
    for (int k = 0; k < 32; ++k) {
      double th = 2 * kPi * k / 32.0;
      Vec p = a.circle_center + a.circle_radius * (std::cos(th) * e1 + std::sin(th) * e2);
      if (a.a >= 0) worst = std::max(worst, patches_[a.a]->surface_distance(p));
      if (a.b >= 0) worst = std::max(worst, patches_[a.b]->surface_distance(p));
    }
  }
  return worst;
}

double GluedDomain::total_area() const {
  double a = 0;
  for (const auto& p : patches_) a += p->area();
  return a;
}

GluedDomain GluedDomain::transformed(const RigidMotion& m) const {
  GluedDomain out;
  out.params = params;
  out.n = n;
  for (const auto& p : patches_) out.patches_.push_back(p->transformed(m));
  for (auto adj : adjacency_) {
    adj.circle_center = m.apply(adj.circle_center);
    adj.circle_axis = m.apply_dir(adj.circle_axis);
    out.adjacency_.push_back(std::move(adj));
  }
  return out;
}

// --------------------------------------------------------------------- meshing

// Triangle orientation helper (3-D only).
static Vec cross3(const Vec& a, const Vec& b) {
  Vec c(3);
  c << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0];
  return c;
}

namespace {

int ring_count_for(double radius, double res) {
  return std::max(6, static_cast<int>(std::ceil(2 * kPi * radius / res)));
}

std::vector<Vec> make_ring(const Vec& center, const Vec& axis, double radius, int m) {
  Vec e1, e2;
  perp_frame(axis, e1, e2);
  std::vector<Vec> out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) {
    double th = 2 * kPi * i / m;
    out.push_back(center + radius * (std::cos(th) * e1 + std::sin(th) * e2));
  }
  return out;
}

}  // namespace

MeshStats export_mesh(const GluedDomain& d, const std::string& path, double resolution) {
  if (d.n != 2)
    throw validation_error("n==2", "mesh export is only supported for surfaces in R^3");
  // Build per-patch ring stacks.
  struct Band {
    std::vector<std::vector<Vec>> rings;
    bool cap_start = false, cap_end = false;
    Vec pole_start = Vec::Zero(3), pole_end = Vec::Zero(3);
    std::function<Vec(const Vec&)> outward;
    int patch_id = -1;
  };
  std::vector<Band> bands;

  for (const auto& p : d.patches()) {
    Band band;
    band.patch_id = p->id;
    if (auto* sp = dynamic_cast<const SpherePatch*>(p.get())) {
      const auto& holes = sp->holes();
      if (holes.size() > 2)
        throw validation_error("mesh holes", "sphere with more than two contacts is not meshable");
      Vec axis(3);
      if (holes.empty()) {
        axis << 0, 0, 1;
      } else {
        axis = holes[0].axis;
      }
      double th0 = holes.empty() ? 0.0 : std::acos(std::clamp(holes[0].cos_cap, -1.0, 1.0));
      double th1 = kPi;
      if (holes.size() == 2) {
        if (std::abs(holes[1].axis.dot(axis) + 1.0) > 1e-6)
          throw validation_error("mesh holes", "non-antipodal sphere holes are not meshable");
        th1 = kPi - std::acos(std::clamp(holes[1].cos_cap, -1.0, 1.0));
      }
      int rings = std::max(4, static_cast<int>(std::ceil((th1 - th0) * sp->radius() / resolution)));
      for (int i = 0; i <= rings; ++i) {
        double th = th0 + (th1 - th0) * i / rings;
        double rho = sp->radius() * std::sin(th);
        Vec c = sp->center() + sp->radius() * std::cos(th) * axis;
        band.rings.push_back(make_ring(c, axis, rho, ring_count_for(rho, resolution)));
      }
      band.cap_start = holes.empty() || th0 < 1e-12;
      band.cap_end = holes.size() < 2;
      band.pole_start = sp->center() + sp->radius() * axis;
      band.pole_end = sp->center() - sp->radius() * axis;
      Vec ctr = sp->center();
      band.outward = [ctr](const Vec& x) { return Vec(x - ctr); };
      // note: ring order runs from +axis (theta=0) toward -axis
    } else if (auto* tp = dynamic_cast<const TubePatch*>(p.get())) {
      int rings = std::max(2, static_cast<int>(std::ceil((tp->s1() - tp->s0()) / resolution)));
      int m = ring_count_for(tp->radius(), resolution);
      for (int i = 0; i <= rings; ++i) {
        double s = tp->s0() + (tp->s1() - tp->s0()) * i / rings;
        std::vector<Vec> ring;
        ring.reserve(m);
        for (int k = 0; k < m; ++k) ring.push_back(tp->ring_point(s, 2 * kPi * k / m));
        band.rings.push_back(std::move(ring));
      }
      CurvePtr spine = tp->spine();
      double s0 = tp->s0(), s1 = tp->s1();
      band.outward = [spine, s0, s1](const Vec& x) {
        auto [s, dist] = project_to_curve(*spine, x, s0, s1);
        (void)dist;
        return Vec(x - spine->position(s));
      };
    } else if (auto* rp = dynamic_cast<const RevolutionPatch*>(p.get())) {
      std::vector<double> xs;
      double x = rp->x0();
      int guard = 0;
      while (x < rp->x1() && guard++ < 1000000) {
        xs.push_back(x);
        Jet2 j = rp->profile()->jet(x);
        double slope = std::isfinite(j.d1) ? std::min(std::abs(j.d1), 1e6) : 1e6;
        x += resolution / std::sqrt(1 + slope * slope);
      }
      xs.push_back(rp->x1());
      for (double xx : xs) {
        double u = std::max(0.0, rp->profile()->eval(xx));
        Vec c = rp->origin() + xx * rp->axis();
        band.rings.push_back(make_ring(c, rp->axis(), u, ring_count_for(u, resolution)));
      }
      double u0 = rp->profile()->eval(rp->x0());
      double u1 = rp->profile()->eval(rp->x1());
      double uscale = std::max(std::abs(u0), std::abs(u1)) + rp->x1() - rp->x0();
      band.cap_start = std::abs(u0) < 1e-9 * uscale;
      band.cap_end = std::abs(u1) < 1e-9 * uscale;
      band.pole_start = rp->origin() + rp->x0() * rp->axis();
      band.pole_end = rp->origin() + rp->x1() * rp->axis();
      Vec o = rp->origin(), a = rp->axis();
      band.outward = [o, a](const Vec& xq) {
        Vec dd = xq - o;
        Vec radial = dd - dd.dot(a) * a;
        return radial.norm() > 1e-12 ? radial : Vec(a);
      };
    } else if (auto* mp = dynamic_cast<const MeridianPatch*>(p.get())) {
      if (!mp->holes().empty())
        throw validation_error("mesh holes", "meridian bodies with holes are not meshable");
      double prev_x = -1e300, prev_y = 0;
      for (const auto& nd : mp->nodes()) {
        if (std::hypot(nd.x - prev_x, nd.y - prev_y) < 0.2 * resolution &&
            &nd != &mp->nodes().back())
          continue;
        prev_x = nd.x;
        prev_y = nd.y;
        Vec c = mp->origin() + nd.x * mp->axis();
        band.rings.push_back(make_ring(c, mp->axis(), nd.y, ring_count_for(nd.y, resolution)));
      }
      band.cap_start = true;
      band.cap_end = true;
      band.pole_start = mp->origin() + mp->nodes().front().x * mp->axis();
      band.pole_end = mp->origin() + mp->nodes().back().x * mp->axis();
      Vec o = mp->origin(), a = mp->axis();
      band.outward = [o, a](const Vec& xq) {
        Vec dd = xq - o;
        Vec radial = dd - dd.dot(a) * a;
        return radial.norm() > 1e-12 ? radial : Vec(a);
      };
    } else {
      throw validation_error("mesh", "unsupported patch kind " + p->kind());
    }
    bands.push_back(std::move(band));
  }

  // Weld + triangulate.
  double scale = 0;
  for (const auto& p : d.patches()) {
    Vec c;
    double r;
    p->bounding_sphere(c, r);
    scale = std::max(scale, r + c.norm());
  }
  double weld = std::max(1e-12, 1e-7 * scale);

  std::vector<Vec> vertices;
  std::map<std::array<long long, 3>, std::vector<int>> grid;
  auto add_vertex = [&](const Vec& p) -> int {
    std::array<long long, 3> key{};
    for (int i = 0; i < 3; ++i) key[i] = static_cast<long long>(std::floor(p[i] / weld));
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        for (long long dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({key[0] + dx, key[1] + dy, key[2] + dz});
          if (it == grid.end()) continue;
          for (int idx : it->second)
            if ((vertices[idx] - p).norm() < weld) return idx;
        }
    vertices.push_back(p);
    grid[key].push_back(static_cast<int>(vertices.size()) - 1);
    return static_cast<int>(vertices.size()) - 1;
  };

  std::vector<std::array<int, 3>> tris;
  std::vector<int> tri_group;
  auto add_tri = [&](int a, int b, int c, const Vec& outward, int group) {
    if (a == b || b == c || a == c) return;
    Vec nrm = cross3(vertices[b] - vertices[a], vertices[c] - vertices[a]);
    if (nrm.dot(outward) < 0) std::swap(b, c);
    tris.push_back({a, b, c});
    tri_group.push_back(group);
  };

  for (const auto& band : bands) {
    std::vector<std::vector<int>> ring_idx;
    for (const auto& ring : band.rings) {
      std::vector<int> idx;
      idx.reserve(ring.size());
      for (const Vec& p : ring) idx.push_back(add_vertex(p));
      ring_idx.push_back(std::move(idx));
    }
    // stitch consecutive rings with a two-pointer walk over azimuth
    for (std::size_t i = 0; i + 1 < ring_idx.size(); ++i) {
      const auto& A = ring_idx[i];
      const auto& B = ring_idx[i + 1];
      if (A.size() < 2 && B.size() < 2) continue;
      std::size_t ia = 0, ib = 0;
      // align start of B to the nearest vertex of B from A[0]
      std::size_t b0 = 0;
      double best = 1e300;
      for (std::size_t k = 0; k < B.size(); ++k) {
        double dd = (vertices[A[0]] - vertices[B[k]]).norm();
        if (dd < best) {
          best = dd;
          b0 = k;
        }
      }
      std::size_t na = A.size(), nb = B.size();
      while (ia < na || ib < nb) {
        int a0 = A[ia % na], a1 = A[(ia + 1) % na];
        int bb0 = B[(b0 + ib) % nb], bb1 = B[(b0 + ib + 1) % nb];
        bool advance_a;
        if (ia >= na)
          advance_a = false;
        else if (ib >= nb)
          advance_a = true;
        else {
          double da = (vertices[a1] - vertices[bb0]).norm();
          double db = (vertices[bb1] - vertices[a0]).norm();
          advance_a = da * static_cast<double>(nb) <= db * static_cast<double>(na);
        }
        if (advance_a) {
          Vec mid = (vertices[a0] + vertices[a1] + vertices[bb0]) / 3.0;
          add_tri(a0, a1, bb0, band.outward(mid), band.patch_id);
          ++ia;
        } else {
          Vec mid = (vertices[a0] + vertices[bb0] + vertices[bb1]) / 3.0;
          add_tri(a0, bb0, bb1, band.outward(mid), band.patch_id);
          ++ib;
        }
      }
    }
    if (band.cap_start && !ring_idx.empty() && ring_idx.front().size() >= 3) {
      int pole = add_vertex(band.pole_start);
      const auto& R = ring_idx.front();
      for (std::size_t k = 0; k < R.size(); ++k) {
        Vec mid = (vertices[R[k]] + vertices[R[(k + 1) % R.size()]] + vertices[pole]) / 3.0;
        add_tri(R[k], R[(k + 1) % R.size()], pole, band.outward(mid), band.patch_id);
      }
    }
    if (band.cap_end && !ring_idx.empty() && ring_idx.back().size() >= 3) {
      int pole = add_vertex(band.pole_end);
      const auto& R = ring_idx.back();
      for (std::size_t k = 0; k < R.size(); ++k) {
        Vec mid = (vertices[R[k]] + vertices[R[(k + 1) % R.size()]] + vertices[pole]) / 3.0;
        add_tri(R[k], R[(k + 1) % R.size()], pole, band.outward(mid), band.patch_id);
      }
    }
  }

  // Global orientation: positive signed volume.
  double vol = 0;
  for (const auto& t : tris)
    vol += cross3(vertices[t[1]], vertices[t[2]]).dot(vertices[t[0]]) / 6.0;
  if (vol < 0) {
    for (auto& t : tris) std::swap(t[1], t[2]);
    vol = -vol;
  }

  MeshStats stats;
  stats.vertices = vertices.size();
  stats.triangles = tris.size();
  stats.signed_volume = vol;

  // watertightness: every undirected edge on exactly two triangles
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : tris)
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      edge_count[{std::min(a, b), std::max(a, b)}]++;
    }
  for (const auto& [e, c] : edge_count)
    if (c != 2) stats.boundary_edges++;

  // connected components over shared vertices
  std::vector<int> parent(vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& t : tris) {
    parent[find(t[0])] = find(t[1]);
    parent[find(t[1])] = find(t[2]);
  }
  std::map<int, int> roots;
  for (const auto& t : tris) roots[find(t[0])] = 1;
  stats.components = roots.size();

  std::ofstream out(path);
  if (!out) throw validation_error("io", "cannot write " + path);
  out << "# twoconvex mesh\n";
  out.precision(12);
  for (const Vec& v : vertices) out << "v " << v[0] << " " << v[1] << " " << v[2] << "\n";
  int cur_group = -2;
  for (std::size_t i = 0; i < tris.size(); ++i) {
    if (tri_group[i] != cur_group) {
      cur_group = tri_group[i];
      out << "g patch_" << cur_group << "\n";
    }
    out << "f " << tris[i][0] + 1 << " " << tris[i][1] + 1 << " " << tris[i][2] + 1 << "\n";
  }
  return stats;
}

}  // namespace tc
