#include "porewet/pipeline.hpp"

#include "porewet/error.hpp"
#include "porewet/parallel.hpp"

#include <cmath>

namespace porewet {

void MeasureParams::validate() const {
  extrapolation.validate();
  if (min_path_nodes < 3) throw ParameterError("min_path_nodes must be >= 3");
  if (!(spline.spacing > 0.0)) throw ParameterError("spline spacing must be > 0");
  if (outliers.window < 3 || !(outliers.threshold > 0.0)) throw ParameterError("outlier window must be >= 3 and threshold > 0");
  // taubin_smooth validates its own parameters; check early for a clear error.
  for (const auto* t : {&taubin_ff, &taubin_sf})
    if (!(t->lambda > 0.0 && t->lambda < 1.0) || !(t->mu < -t->lambda || t->mu == 0.0) || t->iterations < 0)
      throw ParameterError("taubin parameters must satisfy 0 < lambda < 1, mu < -lambda, iterations >= 0");
}

MeasureResult measure_contact_angles(const LabeledVolume& vol, const MeasureParams& params) {
  params.validate();
  MeasureResult r;

  const LabeledVolume filtered = remove_small_clusters(vol, Phase::invading, params.v_min);
  const TriangleMesh s_f2 = extract_isosurface(filtered, Phase::invading);
  const TriangleMesh s_s = extract_isosurface(filtered, Phase::solid);
  r.interfaces = classify_interfaces(s_f2, s_s);

  r.ff = r.interfaces.extract(InterfaceKind::fluid_fluid);
  r.sf = r.interfaces.extract(InterfaceKind::solid_fluid);
  if (params.smooth_meshes) {
    r.ff.mesh = taubin_smooth(r.ff.mesh, params.taubin_ff);
    r.sf.mesh = taubin_smooth(r.sf.mesh, params.taubin_sf);
  }

  r.three_phase_vertices = find_three_phase_vertices(r.interfaces);
  r.raw_paths = trace_contact_paths(r.three_phase_vertices, r.interfaces);

  std::vector<ContactPath> smoothed(r.raw_paths.size());
  parallel_for(r.raw_paths.size(), [&](std::size_t i) {
    smoothed[i] = params.smooth_paths ? smooth_contact_path(r.raw_paths[i], params.spline) : r.raw_paths[i];
  });
  for (auto& p : smoothed)
    if (static_cast<int>(p.nodes.size()) >= params.min_path_nodes) r.paths.push_back(std::move(p));

  if (r.paths.empty()) {
    r.warnings.emplace_back("no contact loops found");
    return r;
  }

  const FaceIndex ff_index(r.ff.mesh), sf_index(r.sf.mesh);
  std::vector<std::vector<AngleMeasurement>> per_path(r.paths.size());
  parallel_for(r.paths.size(), [&](std::size_t i) {
    per_path[i] = measure_path(r.paths[i], ff_index, sf_index, params.extrapolation);
    if (params.clean_outliers) clean_outliers(per_path[i], r.paths[i].kind, params.outliers);
  });

  for (std::size_t i = 0; i < r.paths.size(); ++i) {
    if (const auto stats = path_statistics(per_path[i]))
      r.summaries.push_back({r.paths[i].id, r.paths[i].kind, *stats});
    r.measurements.insert(r.measurements.end(), per_path[i].begin(), per_path[i].end());
  }
  if (r.summaries.empty()) r.warnings.emplace_back("every contact node was rejected");
  return r;
}

GlobalStatistics global_statistics(const std::vector<AngleMeasurement>& measurements) {
  GlobalStatistics g;
  double sum = 0.0;
  for (const auto& m : measurements)
    if (!m.rejected()) {
      sum += *m.theta;
      ++g.count;
    }
  if (g.count == 0) return g;
  g.mean = sum / g.count;
  double ss = 0.0;
  for (const auto& m : measurements)
    if (!m.rejected()) ss += (*m.theta - g.mean) * (*m.theta - g.mean);
  g.std = g.count > 1 ? std::sqrt(ss / (g.count - 1)) : 0.0;
  return g;
}

} // namespace porewet
