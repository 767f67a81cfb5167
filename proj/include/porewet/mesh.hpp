#pragma once

#include "porewet/volume.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace porewet {

using Vec3 = Eigen::Vector3d;

/// Indexed triangle mesh in voxel coordinates (voxel centres at integers).
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3> face_normals;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
  bool empty() const { return faces.empty(); }

  Vec3 centroid(std::size_t f) const;
  double area(std::size_t f) const;
  void recompute_normals();
};

/// Vertex/face adjacency derived from a mesh's connectivity.
struct MeshTopology {
  std::vector<std::vector<int>> vertex_neighbors; ///< sorted, unique
  std::vector<std::vector<int>> vertex_faces;
  /// true for vertices on an edge used by exactly one face
  std::vector<bool> boundary_vertex;
  std::size_t boundary_edge_count = 0;

  explicit MeshTopology(const TriangleMesh& mesh);
};

/// How marching cubes splits a face whose inside corners sit on a diagonal.
enum class Ambiguity {
  separate, ///< diagonal inside corners stay disconnected (6-connected phase)
  join,     ///< diagonal inside corners are bridged
};

/// Default rule per phase: fluids separate, solid joins. With these defaults
/// a cube holding only solid and fluid yields the same triangles in both
/// surfaces, so shared solid/fluid faces coincide exactly.
Ambiguity default_ambiguity(Phase label);

/// Level-0.5 isosurface of the indicator of `label`, normals pointing out of
/// the labelled phase. Vertices are deduplicated per grid edge, so each
/// connected component away from the grid border is closed.
TriangleMesh extract_isosurface(const LabeledVolume& vol, Phase label);
TriangleMesh extract_isosurface(const Grid8& vol, std::uint8_t label, Ambiguity rule);

enum class InterfaceKind : std::uint8_t { fluid_fluid = 0, solid_fluid = 1 };

/// A submesh that remembers the parent vertex each of its vertices came from.
struct SubMesh {
  TriangleMesh mesh;
  std::vector<int> parent_vertex;
  std::vector<int> parent_face;
};

/// Fluid-2 surface split into fluid-fluid and solid-fluid faces.
struct InterfacePair {
  TriangleMesh surface;                  ///< S_F2, shared vertex table
  std::vector<InterfaceKind> face_kind;  ///< per surface face
  std::vector<int> ff_faces;
  std::vector<int> sf_faces;

  SubMesh extract(InterfaceKind kind) const;
};

InterfacePair classify_interfaces(const TriangleMesh& s_f2, const TriangleMesh& s_s, double tolerance = 1e-6);

struct TaubinParams {
  double lambda = 0.5;
  double mu = -0.53;
  int iterations = 10;
  /// Hold vertices on open-boundary edges in place.
  bool pin_boundary = false;
};

/// Two-step lambda/mu smoothing with uniform neighbour weights. Throws
/// ParameterError unless 0 < lambda < 1, mu < -lambda and iterations >= 0.
/// mu = 0 is accepted as a plain Laplacian control.
TriangleMesh taubin_smooth(const TriangleMesh& mesh, const TaubinParams& params);

/// Per-vertex discrete mean curvature (cotangent Laplace-Beltrami, mixed
/// Voronoi areas). Positive on a sphere with outward normals. Vertices
/// without a closed triangle fan get NaN.
struct CurvatureField {
  std::vector<double> mean_curvature;
  std::vector<double> vertex_area;
  /// Area-weighted mean over defined vertices.
  double area_weighted_mean() const;
};

CurvatureField mean_curvature(const TriangleMesh& mesh);

struct VolumeResult {
  double volume = 0.0;
  /// false when the mesh has boundary edges and the value is approximate
  bool closed = true;
};

/// Signed divergence-theorem volume; positive for outward orientation.
VolumeResult enclosed_volume(const TriangleMesh& mesh);

/// ASCII PLY. `face_tags` (optional) becomes the uchar face property
/// `interface`; `vertex_curvature` (optional) becomes a float vertex property.
void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh,
               std::span<const InterfaceKind> face_tags = {},
               std::span<const double> vertex_curvature = {});

} // namespace porewet
