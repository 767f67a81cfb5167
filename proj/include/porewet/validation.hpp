#pragma once

#include "porewet/mesh.hpp"
#include "porewet/pipeline.hpp"

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace porewet {

/// Statistics of the best-populated loop of one phantom run.
struct PhantomRun {
  int loops = 0;              ///< paths with statistics
  int count = 0;
  std::optional<double> mean; ///< empty when every node was rejected
  std::optional<double> mode;
  double std = 0.0;
  /// Largest |mean - expected| over every measured path; empty without paths.
  std::optional<double> worst_error;
};

struct FlatCase {
  double radius = 0.0;
  double target = 0.0;
  PhantomRun run;
  std::optional<double> error() const;
};

struct GrainCase {
  double grain_radius = 40.0;
  double droplet_radius = 20.0;
  double separation = 0.0;
  double theta_analytical = 0.0;
  PhantomRun run;
  std::optional<double> error() const;
  std::optional<double> mode_error() const;
};

struct CurvatureCase {
  double radius = 0.0;
  std::size_t faces = 0;
  std::size_t vertices = 0;
  double kappa = 0.0;          ///< area-weighted mean curvature after smoothing
  double relative_error = 0.0; ///< (kappa - 1/r) * r
  double reference_kappa = 0.0;
  std::size_t reference_faces = 0;
  std::size_t reference_vertices = 0;
};

FlatCase run_flat_case(double radius, double target, const MeasureParams& params);
GrainCase run_grain_case(double grain_radius, double droplet_radius, double separation, const MeasureParams& params);
/// Sphere of the given radius, meshed, smoothed and measured. Reference
/// values are filled for radii 50, 28 and 6.
CurvatureCase run_curvature_case(double radius, const TaubinParams& taubin);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<FlatCase> flat;
  std::vector<GrainCase> grain;
  std::vector<CurvatureCase> curvature;
  std::vector<Check> checks;

  bool passed() const;
};

inline const std::vector<double> kFlatRadii{6, 10, 14, 28, 50};
inline const std::vector<double> kFlatAngles{30, 60, 90, 120, 150};
inline const std::vector<double> kGrainAngles{45.0, 79.05, 120.0};
inline const std::vector<double> kCurvatureRadii{50, 28, 6};

// Individual evaluations, shared with the acceptance tests.
Check check_flat(const std::vector<FlatCase>& cases);
Check check_grain_mean(const std::vector<GrainCase>& cases);
Check check_grain_mode(const std::vector<GrainCase>& cases);
Check check_curvature_magnitude(const std::vector<CurvatureCase>& cases);
Check check_curvature_sign(const std::vector<CurvatureCase>& cases);
Check check_curvature_counts(const std::vector<CurvatureCase>& cases);

/// Flat sweep, grain cases and curvature suite with every check evaluated.
ValidationReport run_validation(const MeasureParams& params, const TaubinParams& curvature_taubin = {});

/// One row per case (section,case parameters,measured,expected,error,...).
void write_validation_csv(std::ostream& os, const ValidationReport& report);

} // namespace porewet
