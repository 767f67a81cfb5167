#pragma once

#include "porewet/loops.hpp"
#include "porewet/mesh.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace porewet {

/// Face-selection gates and regression settings for normal extrapolation.
struct ExtrapolationParams {
  double slab_half_width = 0.5;     ///< d: half-thickness of the cut slab
  double max_face_distance = 12.0;  ///< centroid-to-node distance cap
  int min_faces = 20;
  double poly_window = 4.0;         ///< polynomial fit uses faces this close
  int poly_degree = 2;
  double fallback_threshold = 30.0; ///< degrees
  int near_faces = 10;              ///< k nearest faces for the fallback check
  int lowess_robust_iterations = 2;
  /// Faces closer than this to the node sit in the three-phase band where
  /// the voxel surfaces are distorted; they are left out of the fits.
  double contact_exclusion = 1.5;

  void validate() const;
};

enum class NormalMethod : std::uint8_t { polynomial, lowess, rejected };
const char* to_string(NormalMethod m);

struct AngleMeasurement {
  int path_id = 0;
  int node_index = 0;
  Vec3 position = Vec3::Zero();
  Vec3 n_ff = Vec3::Zero();
  Vec3 n_fs = Vec3::Zero();
  std::optional<double> theta; ///< degrees; empty when rejected
  NormalMethod method_ff = NormalMethod::rejected;
  NormalMethod method_fs = NormalMethod::rejected;
  bool outlier_corrected = false;
  bool one_sided_secant = false;

  bool rejected() const { return !theta.has_value(); }
};

struct LocalFrame {
  Vec3 origin;
  Vec3 secant; ///< unit; also the normal of the cut plane
  bool one_sided = false;
};

/// Secant frame at node i. Empty when the neighbours coincide.
std::optional<LocalFrame> local_frame(const ContactPath& path, int i);

/// Uniform-grid bucket of face centroids for radius queries.
class FaceIndex {
public:
  FaceIndex(const TriangleMesh& mesh, double cell = 4.0);
  const TriangleMesh& mesh() const { return *mesh_; }
  const std::vector<Vec3>& centroids() const { return centroids_; }
  /// Face ids whose centroid lies within `radius` of p, ascending.
  std::vector<int> within(const Vec3& p, double radius) const;

private:
  const TriangleMesh* mesh_;
  double cell_;
  std::vector<Vec3> centroids_;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
  std::uint64_t key(long long i, long long j, long long k) const;
};

struct SelectedFace {
  int face;
  double distance;      ///< Euclidean centroid-to-node distance
  double plane_offset;  ///< signed distance to the cut plane
};

/// Faces whose centroid lies within the slab |offset| <= d and within
/// max_face_distance of the node, sorted by distance then face id. The
/// min_faces gate is applied by the caller.
std::vector<SelectedFace> select_faces(const Vec3& node, const Vec3& secant, const FaceIndex& index,
                                       const ExtrapolationParams& params);

struct NormalEstimate {
  Vec3 normal = Vec3::Zero();
  NormalMethod method = NormalMethod::rejected;
};

/// Regresses each normal component against distance-to-node and evaluates at
/// distance 0. Fluid-fluid faces use a polynomial with a LOWESS fallback;
/// solid-fluid faces use LOWESS.
NormalEstimate extrapolate_normal(std::span<const SelectedFace> faces, const TriangleMesh& mesh,
                                  const ExtrapolationParams& params, InterfaceKind kind);

/// Angle between the two normals in degrees; empty if either is a zero vector.
std::optional<double> contact_angle(const Vec3& n_fs, const Vec3& n_ff);

/// Measures every node of a path.
std::vector<AngleMeasurement> measure_path(const ContactPath& path, const FaceIndex& ff, const FaceIndex& sf,
                                           const ExtrapolationParams& params);

struct OutlierParams {
  int window = 15;
  double threshold = 3.5;
  int min_measurements = 5;
};

struct OutlierReport {
  bool passthrough = false; ///< too few accepted measurements
  int corrected = 0;
};

/// Replaces modified-z-score outliers along a path by their window median.
OutlierReport clean_outliers(std::span<AngleMeasurement> measurements, PathKind kind, const OutlierParams& params = {});

struct PathStatistics {
  double mean = 0.0;
  double mode = 0.0;
  double std = 0.0;
  int count = 0;
};

/// Statistics over accepted measurements; empty if there are none. The mode
/// is the centre of the most populated 2-degree window centred on a measured
/// value (ties go to the lower centre).
std::optional<PathStatistics> path_statistics(std::span<const AngleMeasurement> measurements,
                                              double mode_bin_width = 2.0);
std::optional<PathStatistics> path_statistics(std::span<const double> thetas, double mode_bin_width = 2.0);

/// CSV: path_id,node_index,x,y,z,theta_deg,method_ff,method_fs,outlier_corrected,rejected
void write_measurements_csv(const std::filesystem::path& file, std::span<const AngleMeasurement> measurements);

struct PathSummary {
  int path_id = 0;
  PathKind kind = PathKind::loop;
  PathStatistics stats;
};

/// CSV: path_id,kind,count,mean_deg,mode_deg,std_deg
void write_summary_csv(const std::filesystem::path& file, std::span<const PathSummary> summaries);
std::vector<PathSummary> read_summary_csv(const std::filesystem::path& file);
std::vector<AngleMeasurement> read_measurements_csv(const std::filesystem::path& file);

} // namespace porewet
