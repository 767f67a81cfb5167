#pragma once

#include "porewet/angles.hpp"
#include "porewet/loops.hpp"
#include "porewet/mesh.hpp"
#include "porewet/volume.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace porewet {

enum class Provenance : std::uint8_t { solid = 0, uninvaded = 1, object = 2, transition = 3, unassigned = 255 };
const char* to_string(Provenance p);

/// Per-voxel contact angle in degrees. Unassigned voxels hold NaN.
struct WettabilityField {
  static constexpr float unassigned = std::numeric_limits<float>::quiet_NaN();

  Dims dims;
  std::vector<float> theta;
  std::vector<Provenance> provenance;

  WettabilityField() = default;
  /// Solid voxels get provenance solid; every other voxel starts unassigned.
  explicit WettabilityField(const LabeledVolume& vol);

  bool assigned(std::size_t i) const { return theta[i] == theta[i]; }
  std::size_t count(Provenance p) const;
};

struct MapParams {
  double uninvaded_angle = 30.0;
  int dilation_radius = 3;
  double idw_power = 2.0;
  double max_distance = 20.0;
  Connectivity connectivity = Connectivity::six;

  void validate() const;
};

/// One measured contact path as a field source: its mean angle, accepted
/// measurement count and node positions.
struct PathSource {
  int path_id = 0;
  double mean = 0.0;
  int count = 0;
  std::vector<Vec3> nodes;
};

/// Pairs each summary with the nodes of its path; paths without a summary
/// (every node rejected) are dropped. Output is sorted by path id.
std::vector<PathSource> path_sources(std::span<const PathSummary> summaries,
                                     std::span<const AngleMeasurement> measurements);

struct IdwTerm {
  double mean;
  int count;
  double distance;
};

/// Count-weighted inverse distance mean: sum(c/d^p * m) / sum(c/d^p) with d
/// floored at 1. Empty when there are no terms or all counts are zero.
std::optional<double> idw_mean(std::span<const IdwTerm> terms, double power);

/// Stage 1: pore components (labels 0 and 1, joined through non-solid voxels)
/// that hold only defending fluid get the uninvaded angle.
void assign_uninvaded(const LabeledVolume& vol, WettabilityField& field, const MapParams& params);

struct ObjectReport {
  int object_id = 0;       ///< 1-based component id of the invading object
  std::size_t voxels = 0;
  std::vector<int> path_ids;
  std::optional<double> angle;
  bool orphan = false;     ///< no path inside the dilation; handled voxel by voxel
};

/// Stage 2: each invading-fluid object takes the IDW mean of the paths with
/// a node inside its dilation, distances measured from the object's boundary
/// voxels. Orphan objects fall back to the stage-3 rule (provenance
/// transition).
std::vector<ObjectReport> assign_invading_objects(const LabeledVolume& vol, WettabilityField& field,
                                                  std::span<const PathSource> sources, const MapParams& params);

/// Stage 3: remaining defending-fluid voxels within max_distance of a node
/// take the IDW mean over every path with a node that close.
void assign_defending_transition(const LabeledVolume& vol, WettabilityField& field,
                                 std::span<const PathSource> sources, const MapParams& params);

/// Clamps assigned values to [1, 180].
void clip_field(WettabilityField& field);

struct FieldHistogram {
  double bin_width = 2.0;
  std::vector<std::size_t> counts; ///< bins over [0, 180]; 180 falls in the last bin
  std::size_t assigned = 0;
  double water_wet = 0.0;    ///< [1, 70)
  double intermediate = 0.0; ///< [70, 110]
  double oil_wet = 0.0;      ///< (110, 180]
};

/// Empty when no voxel is assigned.
std::optional<FieldHistogram> field_histogram(const WettabilityField& field, double bin_width = 2.0);

struct MapResult {
  WettabilityField field;
  std::vector<ObjectReport> objects;
};

/// All stages in order, then clipping.
MapResult build_wettability_field(const LabeledVolume& vol, std::span<const PathSource> sources,
                                  const MapParams& params);

/// Little-endian float32, x-fastest, NaN for unassigned, with a JSON sidecar.
void write_field(const std::filesystem::path& raw, const WettabilityField& field);
WettabilityField read_field(const std::filesystem::path& raw);
/// Unsigned 8-bit provenance codes.
void write_provenance(const std::filesystem::path& raw, const WettabilityField& field);
/// CSV: bin_lo,bin_hi,count
void write_histogram_csv(const std::filesystem::path& file, const FieldHistogram& hist);
/// CSV: regime,lo_deg,hi_deg,fraction
void write_regimes_csv(const std::filesystem::path& file, const FieldHistogram& hist);

} // namespace porewet
