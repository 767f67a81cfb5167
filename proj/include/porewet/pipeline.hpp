#pragma once

#include "porewet/angles.hpp"
#include "porewet/loops.hpp"
#include "porewet/mesh.hpp"
#include "porewet/volume.hpp"

#include <string>
#include <vector>

namespace porewet {

struct MeasureParams {
  std::size_t v_min = 64;
  TaubinParams taubin_ff{0.5, -0.53, 10, false};
  TaubinParams taubin_sf{0.5, -0.53, 10, false};
  SplineParams spline{};
  ExtrapolationParams extrapolation{};
  OutlierParams outliers{};
  /// Smoothed paths with fewer nodes are not measured.
  int min_path_nodes = 8;
  bool smooth_meshes = true;
  bool smooth_paths = true;
  bool clean_outliers = true;

  void validate() const;
};

struct MeasureResult {
  InterfacePair interfaces;
  SubMesh ff;  ///< smoothed fluid-fluid submesh
  SubMesh sf;  ///< smoothed solid-fluid submesh
  std::vector<int> three_phase_vertices;
  std::vector<ContactPath> raw_paths;
  std::vector<ContactPath> paths; ///< smoothed, measured paths
  std::vector<AngleMeasurement> measurements;
  std::vector<PathSummary> summaries;
  std::vector<std::string> warnings;
};

/// Full angle workflow on a labelled volume: cluster filtering, interface
/// meshing and classification, contact tracing, smoothing, extrapolation,
/// outlier correction and per-path statistics.
MeasureResult measure_contact_angles(const LabeledVolume& vol, const MeasureParams& params);

/// Mean, sample standard deviation and count over all accepted measurements.
struct GlobalStatistics {
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
};
GlobalStatistics global_statistics(const std::vector<AngleMeasurement>& measurements);

} // namespace porewet
