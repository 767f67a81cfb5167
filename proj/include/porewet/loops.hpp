#pragma once

#include "porewet/mesh.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace porewet {

enum class PathKind { loop, line };

/// Ordered three-phase contact path.
struct ContactPath {
  int id = 0;
  PathKind kind = PathKind::loop;
  std::vector<Vec3> nodes;
  /// Mesh vertex ids the path was traced through (empty after resampling
  /// only if the path was built synthetically).
  std::vector<int> source_vertex_ids;
  /// Three-phase vertices of the same component left off the traced trail
  /// (spurs, band thickening). Together with source_vertex_ids they
  /// partition the component.
  std::vector<int> absorbed_vertex_ids;
  /// A junction vertex was met while tracing this path.
  bool branched = false;
  /// Smoothing was skipped (too few nodes) or fell back to a moving average.
  bool smoothing_degraded = false;

  double length() const;
};

/// Vertices referenced by at least one fluid-fluid face and one solid-fluid face.
std::vector<int> find_three_phase_vertices(const InterfacePair& pair);

/// Traces one loop or line per connected component of three-phase vertices.
/// Adjacency is given by surface mesh edges joining two three-phase vertices.
std::vector<ContactPath> trace_contact_paths(std::span<const int> v_tp, const InterfacePair& pair);

struct SplineParams {
  /// Expected squared node jitter (voxel^2); the smoothing budget is n * jitter.
  double jitter = 0.0625;
  /// Target node spacing after resampling (voxels).
  double spacing = 1.0;
};

/// Cubic B-spline fit (periodic for loops, clamped for lines) with knots
/// added until the residual budget is met, then uniform arc-length
/// resampling. Paths with fewer than four nodes come back unchanged with
/// `smoothing_degraded` set.
ContactPath smooth_contact_path(const ContactPath& path, const SplineParams& params = {});

/// Sum of discrete turning angles (radians) along the path.
double total_turning(const ContactPath& path);

/// CSV: path_id,kind,node_index,x,y,z
void write_paths_csv(const std::filesystem::path& path, std::span<const ContactPath> paths);

const char* to_string(PathKind kind);

} // namespace porewet
