#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/curve.hpp"
#include "core/geometry.hpp"
#include "core/profile_build.hpp"

namespace tc {

struct Marble {
  Vec center;
  double radius = 1.0;
};

// Endpoint attachment of a curve component: marble index or loose (-1).
struct Attachment {
  int marble = -1;
  bool loose() const { return marble < 0; }
};

struct Configuration {
  std::vector<Marble> marbles;
  ControlledCurve curve;
  std::vector<std::pair<Attachment, Attachment>> attachments;  // per component
  ControlParams params;

  double b() const { return curve.b; }
};

struct ConfigVerdict {
  bool pass = true;
  std::string clause;
  std::string detail;
};

// Clauses: interior disjoint from the marbles, orthogonal contact at attached
// endpoints, loose endpoints >= 10b away, mid-curve clearance >= b/20.
ConfigVerdict validate_configuration(const Configuration& cfg);

struct MarbleTree {
  std::vector<Marble> marbles;  // all of radius r_m
  struct StringEdge {
    int from = -1, to = -1;
    CurvePtr curve;  // oriented from 'from' contact to 'to' contact
  };
  std::vector<StringEdge> strings;
  double r_m = 1.0;
  double r_s = 1e-4;
  double b = 1.0;
  ControlParams params;

  Configuration to_configuration() const;
};

struct TreeVerdict {
  bool pass = true;
  std::string clause;
  std::string detail;
};

// Def-style checks: no loose ends, straight rays within 3 r_m of centers,
// incidence graph a tree, r_s below the gluing threshold.
TreeVerdict validate_marble_tree(const MarbleTree& t);

// ---------------------------------------------------------------------------
// Patches

class Patch {
public:
  virtual ~Patch() = default;
  int id = -1;
  virtual std::string kind() const = 0;
  virtual int ambient_dim() const = 0;
  // Curvature samples on the patch's reduced (symmetry-aware) grid;
  // res_frac controls the per-patch grid density.
  virtual void certify_samples(int n, double res_frac,
                               std::vector<CurvatureSample>& out) const = 0;
  // Points at world spacing <= res covering the patch.
  virtual void surface_points(double res, std::vector<Vec>& out) const = 0;
  virtual bool solid_contains(const Vec& x, double tol) const = 0;
  // Approximate distance from x to the patch surface.
  virtual double surface_distance(const Vec& x) const = 0;
  // Principal curvatures at a point assumed to lie on the patch surface.
  virtual PrincipalCurvatures curvature_at(const Vec& x, int n) const = 0;
  virtual void bounding_sphere(Vec& center, double& radius) const = 0;
  virtual double area() const = 0;
  virtual std::unique_ptr<Patch> transformed(const RigidMotion& m) const = 0;
  virtual std::unique_ptr<Patch> clone() const = 0;
};

using PatchPtr = std::unique_ptr<Patch>;

struct SphereHole {
  Vec axis;        // unit, outward
  double cos_cap;  // region {<(x-c)/R, axis> > cos_cap} removed
  // axial offset of the half-space cut bounding the solid; defaults to
  // R*cos_cap at construction
  double cut = std::numeric_limits<double>::quiet_NaN();
};

class SpherePatch : public Patch {
public:
  SpherePatch(Vec center, double radius, std::vector<SphereHole> holes = {});
  std::string kind() const override { return "sphere"; }
  int ambient_dim() const override { return static_cast<int>(center_.size()); }
  void certify_samples(int n, double res_frac, std::vector<CurvatureSample>& out) const override;
  void surface_points(double res, std::vector<Vec>& out) const override;
  bool solid_contains(const Vec& x, double tol) const override;
  double surface_distance(const Vec& x) const override;
  PrincipalCurvatures curvature_at(const Vec& x, int n) const override;
  void bounding_sphere(Vec& c, double& r) const override;
  double area() const override;
  std::unique_ptr<Patch> transformed(const RigidMotion& m) const override;
  std::unique_ptr<Patch> clone() const override { return std::make_unique<SpherePatch>(*this); }

  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<SphereHole>& holes() const { return holes_; }
  bool in_hole(const Vec& unit_dir, double slack = 0.0) const;

private:
  Vec center_;
  double radius_;
  std::vector<SphereHole> holes_;
};

class TubePatch : public Patch {
public:
  TubePatch(CurvePtr spine, double s0, double s1, double radius);
  std::string kind() const override { return "tube"; }
  int ambient_dim() const override { return spine_->ambient_dim(); }
  void certify_samples(int n, double res_frac, std::vector<CurvatureSample>& out) const override;
  void surface_points(double res, std::vector<Vec>& out) const override;
  bool solid_contains(const Vec& x, double tol) const override;
  double surface_distance(const Vec& x) const override;
  PrincipalCurvatures curvature_at(const Vec& x, int n) const override;
  void bounding_sphere(Vec& c, double& r) const override;
  double area() const override;
  std::unique_ptr<Patch> transformed(const RigidMotion& m) const override;
  std::unique_ptr<Patch> clone() const override { return std::make_unique<TubePatch>(*this); }

  const CurvePtr& spine() const { return spine_; }
  double s0() const { return s0_; }
  double s1() const { return s1_; }
  double radius() const { return r_; }
  // Rotation-minimizing frame at arc s (normals n1, n2 for the ring).
  void frame(double s, Vec& n1, Vec& n2) const;
  Vec ring_point(double s, double theta) const;

private:
  void build_frames();
  CurvePtr spine_;
  double s0_, s1_, r_;
  std::vector<Vec> fr_n1_, fr_n2_;  // cached frames on a uniform s grid
  std::size_t frame_count_ = 0;
};

// Surface of revolution of a world-scale profile about the ray
// {origin + x*axis}; profile(x) = ring radius at abscissa x in [x0, x1].
class RevolutionPatch : public Patch {
public:
  RevolutionPatch(Vec origin, Vec axis, std::shared_ptr<const ProfileFunction> profile, double x0,
                  double x1);
  std::string kind() const override { return "revolution"; }
  int ambient_dim() const override { return static_cast<int>(origin_.size()); }
  void certify_samples(int n, double res_frac, std::vector<CurvatureSample>& out) const override;
  void surface_points(double res, std::vector<Vec>& out) const override;
  bool solid_contains(const Vec& x, double tol) const override;
  double surface_distance(const Vec& x) const override;
  PrincipalCurvatures curvature_at(const Vec& x, int n) const override;
  void bounding_sphere(Vec& c, double& r) const override;
  double area() const override;
  std::unique_ptr<Patch> transformed(const RigidMotion& m) const override;
  std::unique_ptr<Patch> clone() const override { return std::make_unique<RevolutionPatch>(*this); }

  const Vec& origin() const { return origin_; }
  const Vec& axis() const { return axis_; }
  double x0() const { return x0_; }
  double x1() const { return x1_; }
  const std::shared_ptr<const ProfileFunction>& profile() const { return profile_; }
  Vec ring_point(double x, double theta) const;
  // Local coordinates: xi along the axis from origin, rho the ring distance.
  void local_coords(const Vec& p, double& xi, double& rho) const;

private:
  Vec origin_, axis_;
  std::shared_ptr<const ProfileFunction> profile_;
  double x0_, x1_;
};

// Convex revolution boundary in normal-angle parametrization; phi runs from 0
// (outward normal = -axis) to pi (outward normal = +axis). Meridional
// curvature radii are stored explicitly so Minkowski combinations stay exact.
class MeridianPatch : public Patch {
public:
  struct Node {
    double phi, x, y, r_merid;  // r_merid may be +inf on flat stretches
  };
  MeridianPatch(Vec origin, Vec axis, std::vector<Node> nodes,
                std::vector<SphereHole> holes = {});
  std::string kind() const override { return "meridian"; }
  int ambient_dim() const override { return static_cast<int>(origin_.size()); }
  void certify_samples(int n, double res_frac, std::vector<CurvatureSample>& out) const override;
  void surface_points(double res, std::vector<Vec>& out) const override;
  bool solid_contains(const Vec& x, double tol) const override;
  double surface_distance(const Vec& x) const override;
  PrincipalCurvatures curvature_at(const Vec& x, int n) const override;
  void bounding_sphere(Vec& c, double& r) const override;
  double area() const override;
  std::unique_ptr<Patch> transformed(const RigidMotion& m) const override;
  std::unique_ptr<Patch> clone() const override { return std::make_unique<MeridianPatch>(*this); }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Vec& origin() const { return origin_; }
  const Vec& axis() const { return axis_; }
  const std::vector<SphereHole>& holes() const { return holes_; }
  Vec ring_point(const Node& nd, double theta) const;
  // Support function in world direction d.
  double support(const Vec& d) const;

private:
  Vec origin_, axis_;
  std::vector<Node> nodes_;
  std::vector<SphereHole> holes_;
};

// ---------------------------------------------------------------------------
// Glued domains

struct PatchAdjacency {
  int a = -1, b = -1;
  Vec circle_center;
  Vec circle_axis;
  double circle_radius = 0;
  double c1_defect = 0;  // position+tangent mismatch measured at construction
};

struct EmbedVerdict {
  bool pass = true;
  int patch_a = -1, patch_b = -1;
  Vec witness;
  double distance = 0;
};

class GluedDomain {
public:
  GluedDomain() = default;
  GluedDomain(const GluedDomain& other);
  GluedDomain& operator=(const GluedDomain& other);
  GluedDomain(GluedDomain&&) = default;
  GluedDomain& operator=(GluedDomain&&) = default;

  int add_patch(PatchPtr p);
  void add_adjacency(PatchAdjacency adj) { adjacency_.push_back(std::move(adj)); }

  const std::vector<PatchPtr>& patches() const { return patches_; }
  const std::vector<PatchAdjacency>& adjacency() const { return adjacency_; }
  ControlParams params;
  int n = 2;

  bool contains(const Vec& x, double tol = 0.0) const;
  // Distance from x to the domain boundary (approximate, sampled patches).
  double boundary_distance(const Vec& x) const;

  // Reduced symmetry-aware certification of every patch.
  CurvatureReport certify(double res_frac = 1e-2) const;
  // World-density sampling; count >= area / resolution^2.
  CurvatureReport sample_boundary(double resolution) const;
  EmbedVerdict check_embedded() const;

  // C^1 matching of all recorded adjacencies: max position/tangent defect.
  double adjacency_defect() const;

  double total_area() const;
  GluedDomain transformed(const RigidMotion& m) const;

private:
  std::vector<PatchPtr> patches_;
  std::vector<PatchAdjacency> adjacency_;
};

// ---------------------------------------------------------------------------
// The gluing map and capped tubes

struct GlueInfo {
  double r = 0;
  double r_bar = 0;
  double delta_r = 0;  // collar locality radius
  struct Collar {
    int component = -1;
    bool at_start = true;
    int marble = -1;
    double delta = 0;  // C_delta parameter after rescaling to the marble
    Vec contact;
  };
  std::vector<Collar> collars;
  CurvatureReport report;
};

struct GlueResult {
  GluedDomain domain;
  GlueInfo info;
};

// Threshold radius r_bar(A, b) below which gluing is defined. The 1e-6
// safety factor protects the bent (1e-6 b)-controlled loose ends; purely
// attached configurations are limited by the tube bound zeta*b instead.
double glue_r_bar(const ControlParams& params, double b, bool with_loose_ends = true);
// Collar locality radius delta(r), increasing with delta(r) -> 0 as r -> 0.
double glue_delta_of_r(const ControlParams& params, double r);

// Attach strings of radius r around cfg.curve to the marbles of cfg.
GlueResult glue(const Configuration& cfg, double r);

// Capped-off tube of radius r around one curve component, capped at arc s0
// (right cap: covers [a0, s0]; left cap: covers [s0, a1]).
struct CappedTubeResult {
  GluedDomain domain;
  Vec tip;
  CurvatureReport report;
};
CappedTubeResult capped_tube(const ControlledCurve& c, std::size_t component, double s0, double r,
                             bool right_cap, const ControlParams& params);

// Mesh export (n = 2 only): watertight-up-to-tolerance OBJ with one group
// per patch.
struct MeshStats {
  std::size_t vertices = 0;
  std::size_t triangles = 0;
  std::size_t components = 0;
  double signed_volume = 0;
  std::size_t boundary_edges = 0;  // 0 for watertight
};
MeshStats export_mesh(const GluedDomain& d, const std::string& path, double resolution);

}  // namespace tc
