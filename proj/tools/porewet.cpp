// porewet: contact-angle measurement and wettability mapping on segmented
// three-phase volumes.

#include "porewet/config.hpp"
#include "porewet/error.hpp"
#include "porewet/parallel.hpp"
#include "porewet/pipeline.hpp"
#include "porewet/validation.hpp"
#include "porewet/volume.hpp"
#include "porewet/wetmap.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace porewet;

namespace {

enum Exit { kOk = 0, kValidationFailed = 1, kUsage = 2, kIo = 3 };

// JSON numbers rounded to 6 significant digits so reports are stable.
double sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

void write_json(const fs::path& file, const nlohmann::json& j) {
  std::ofstream os(file);
  if (!os) throw IoError("cannot open " + file.string() + " for writing");
  os << j.dump(2) << '\n';
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream os(file);
  if (!os) throw IoError("cannot open " + file.string() + " for writing");
  os << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

struct ConfigOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  int threads = -1;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_file, "Config file ([section] / key = value)");
    app->add_option("--set", overrides, "Override one config key: section.key=value")->take_all();
    app->add_option("-j,--threads", threads, "Worker threads (0 = automatic)");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_file.empty()) cfg = load_config(config_file, cfg);
    for (const auto& o : overrides) apply_override(cfg, o);
    if (threads >= 0) cfg.threads = threads;
    cfg.validate();
    set_thread_count(cfg.threads);
    return cfg;
  }
};

// ---------------------------------------------------------------------------

struct PhantomArgs {
  double radius = 28.0, theta = 90.0;
  double rg = 40.0, rd = 20.0, sep = 48.0;
  int margin = 4;
  std::string out = "phantom.raw", report; ///< empty: <out stem>_report.json beside the volume

  std::string report_path() const {
    if (!report.empty()) return report;
    fs::path p(out);
    return (p.parent_path() / (p.stem().string() + "_report.json")).string();
  }
};

int cmd_phantom_flat(const PhantomArgs& a) {
  PhantomSpec spec;
  spec.kind = PhantomKind::flat;
  spec.droplet_radius = a.radius;
  spec.target_angle = a.theta;
  spec.margin = a.margin;
  const auto ph = gen_flat_droplet(spec);
  if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) ensure_dir(parent);
  write_labeled_volume(a.out, ph.volume);
  const auto& g = ph.geometry;
  const auto& d = ph.volume.dims();
  write_json(a.report_path(), {{"kind", "flat"},
                        {"theta_analytical", sig6(a.theta)},
                        {"droplet_radius", sig6(a.radius)},
                        {"plane_z", sig6(g.plane_z)},
                        {"center", {sig6(g.center[0]), sig6(g.center[1]), sig6(g.center[2])}},
                        {"contact_radius", sig6(g.contact_radius)},
                        {"dims", {d.nx, d.ny, d.nz}}});
  std::printf("wrote %s (%d x %d x %d), theta_analytical %.6g\n", a.out.c_str(), d.nx, d.ny, d.nz, a.theta);
  return kOk;
}

int cmd_phantom_grain(const PhantomArgs& a) {
  PhantomSpec spec;
  spec.kind = PhantomKind::grain;
  spec.grain_radius = a.rg;
  spec.droplet_radius = a.rd;
  spec.center_separation = a.sep;
  spec.margin = a.margin;
  const auto ph = gen_grain_droplet(spec);
  if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) ensure_dir(parent);
  write_labeled_volume(a.out, ph.volume);
  const auto& g = ph.geometry;
  const auto& d = ph.volume.dims();
  write_json(a.report_path(), {{"kind", "grain"},
                        {"theta_analytical", sig6(ph.theta_analytical)},
                        {"grain_radius", sig6(a.rg)},
                        {"droplet_radius", sig6(a.rd)},
                        {"center_separation", sig6(a.sep)},
                        {"grain_center", {sig6(g.grain_center[0]), sig6(g.grain_center[1]), sig6(g.grain_center[2])}},
                        {"droplet_center", {sig6(g.droplet_center[0]), sig6(g.droplet_center[1]), sig6(g.droplet_center[2])}},
                        {"dims", {d.nx, d.ny, d.nz}}});
  std::printf("wrote %s (%d x %d x %d), theta_analytical %.6g\n", a.out.c_str(), d.nx, d.ny, d.nz,
              ph.theta_analytical);
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_measure(const ConfigOptions& opts, const std::string& input, const std::string& out) {
  PipelineConfig cfg = opts.resolve();
  if (!input.empty()) cfg.input = input;
  if (!out.empty()) cfg.output_dir = out;
  if (cfg.input.empty()) throw ConfigError("measure needs an input volume (--input or io.input)");
  if (!fs::exists(cfg.input)) throw IoError("input volume " + cfg.input.string() + " not found");

  const auto vol = read_labeled_volume(cfg.input);
  const auto r = measure_contact_angles(vol, cfg.measure);
  const fs::path dir = cfg.output_dir;
  ensure_dir(dir);

  write_measurements_csv(dir / "measurements.csv", r.measurements);
  write_summary_csv(dir / "summary.csv", r.summaries);
  write_paths_csv(dir / "paths.csv", r.paths);
  if (cfg.write_meshes) {
    write_ply(dir / "surface.ply", r.interfaces.surface, r.interfaces.face_kind);
    write_ply(dir / "fluid_fluid.ply", r.ff.mesh);
    write_ply(dir / "solid_fluid.ply", r.sf.mesh);
  }
  write_text(dir / "config.toml", dump_config(cfg));

  const auto g = global_statistics(r.measurements);
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& s : r.summaries)
    paths.push_back({{"path_id", s.path_id},
                     {"kind", to_string(s.kind)},
                     {"count", s.stats.count},
                     {"mean", sig6(s.stats.mean)},
                     {"mode", sig6(s.stats.mode)},
                     {"std", sig6(s.stats.std)}});
  write_json(dir / "report.json", {{"count", g.count},
                                   {"mean", sig6(g.mean)},
                                   {"std", sig6(g.std)},
                                   {"paths", paths},
                                   {"warnings", r.warnings}});

  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (g.count > 0)
    std::printf("global contact angle %.6g +/- %.6g deg (n=%d, %zu paths)\n", g.mean, g.std, g.count,
                r.summaries.size());
  else
    std::printf("no accepted measurements\n");
  return kOk;
}

int cmd_map(const ConfigOptions& opts, const std::string& input, const std::string& measurements,
            const std::string& summary, const std::string& out) {
  PipelineConfig cfg = opts.resolve();
  if (!input.empty()) cfg.input = input;
  if (!measurements.empty()) cfg.measurements = measurements;
  if (!summary.empty()) cfg.summary = summary;
  if (!out.empty()) cfg.output_dir = out;
  if (cfg.input.empty()) throw ConfigError("map needs an input volume (--input or io.input)");
  if (cfg.measurements.empty()) throw ConfigError("map needs a measurements CSV (--measurements or io.measurements)");
  if (cfg.summary.empty()) cfg.summary = cfg.measurements.parent_path() / "summary.csv";
  if (!fs::exists(cfg.measurements)) throw ConfigError("measurements file " + cfg.measurements.string() + " not found");
  if (!fs::exists(cfg.summary)) throw ConfigError("summary file " + cfg.summary.string() + " not found");
  if (!fs::exists(cfg.input)) throw IoError("input volume " + cfg.input.string() + " not found");

  const auto vol = read_labeled_volume(cfg.input);
  const auto nodes = read_measurements_csv(cfg.measurements);
  const auto summaries = read_summary_csv(cfg.summary);
  const auto sources = path_sources(summaries, nodes);

  std::vector<std::string> warnings;
  if (sources.empty()) warnings.emplace_back("no measured paths; invaded and transition voxels stay unassigned");

  const auto result = build_wettability_field(vol, sources, cfg.map);
  for (const auto& o : result.objects)
    if (o.orphan) warnings.push_back("object " + std::to_string(o.object_id) + " has no contact path in its dilation");

  const fs::path dir = cfg.output_dir;
  ensure_dir(dir);
  write_field(dir / "theta.raw", result.field);
  write_provenance(dir / "provenance.raw", result.field);
  write_text(dir / "config.toml", dump_config(cfg));

  {
    std::ofstream os(dir / "objects.csv");
    if (!os) throw IoError("cannot write objects.csv");
    os << "object_id,voxels,path_ids,angle_deg,orphan\n";
    for (const auto& o : result.objects) {
      std::string ids;
      for (std::size_t i = 0; i < o.path_ids.size(); ++i) ids += (i ? ";" : "") + std::to_string(o.path_ids[i]);
      char angle[32] = "";
      if (o.angle) std::snprintf(angle, sizeof angle, "%.6g", *o.angle);
      os << o.object_id << "," << o.voxels << "," << ids << "," << angle << "," << (o.orphan ? 1 : 0) << "\n";
    }
  }

  nlohmann::json provenance;
  for (auto p : {Provenance::solid, Provenance::uninvaded, Provenance::object, Provenance::transition,
                 Provenance::unassigned})
    provenance[to_string(p)] = result.field.count(p);
  nlohmann::json report{{"provenance", provenance}, {"warnings", warnings}};
  if (const auto hist = field_histogram(result.field)) {
    write_histogram_csv(dir / "histogram.csv", *hist);
    write_regimes_csv(dir / "regimes.csv", *hist);
    report["assigned"] = hist->assigned;
    report["regimes"] = {{"water_wet", sig6(hist->water_wet)},
                         {"intermediate", sig6(hist->intermediate)},
                         {"oil_wet", sig6(hist->oil_wet)}};
    std::printf("assigned %zu voxels: water-wet %.6g, intermediate %.6g, oil-wet %.6g\n", hist->assigned,
                hist->water_wet, hist->intermediate, hist->oil_wet);
  } else {
    warnings.emplace_back("no voxel was assigned an angle");
    report["warnings"] = warnings;
    report["assigned"] = 0;
    std::printf("no voxel was assigned an angle\n");
  }
  write_json(dir / "regimes.json", report);
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return kOk;
}

int cmd_validate(const ConfigOptions& opts, const std::string& out) {
  const PipelineConfig cfg = opts.resolve();
  const auto report = run_validation(cfg.measure, cfg.measure.taubin_sf);
  std::ostringstream csv;
  write_validation_csv(csv, report);
  if (out.empty() || out == "-") std::cout << csv.str();
  else write_text(out, csv.str());
  for (const auto& c : report.checks)
    std::fprintf(stderr, "%s  %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
  return report.passed() ? kOk : kValidationFailed;
}

int cmd_curvature(std::vector<double> radii, const TaubinParams& taubin, const std::string& ply_dir) {
  if (radii.empty()) radii = kCurvatureRadii;
  std::printf("radius,faces,vertices,kappa_mean,expected,relative_error\n");
  for (double r : radii) {
    const auto c = run_curvature_case(r, taubin);
    std::printf("%.6g,%zu,%zu,%.6g,%.6g,%.6g\n", r, c.faces, c.vertices, c.kappa, 1.0 / r, c.relative_error);
    if (!ply_dir.empty()) {
      ensure_dir(ply_dir);
      const auto mesh = taubin_smooth(extract_isosurface(gen_sphere(r), Phase::solid), taubin);
      const auto k = mean_curvature(mesh);
      char name[64];
      std::snprintf(name, sizeof name, "sphere_r%g.ply", r);
      write_ply(fs::path(ply_dir) / name, mesh, {}, k.mean_curvature);
    }
  }
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric contact angles and wettability maps from segmented three-phase volumes"};
  app.require_subcommand(1);

  PhantomArgs ph;
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic labelled volume");
  phantom->require_subcommand(1);
  auto* flat = phantom->add_subcommand("flat", "Droplet resting on a flat plane");
  flat->add_option("--radius", ph.radius, "Droplet radius (voxels)")->capture_default_str();
  flat->add_option("--theta", ph.theta, "Target contact angle through the defending fluid (deg)")->capture_default_str();
  auto* grain = phantom->add_subcommand("grain", "Droplet on a spherical grain");
  grain->add_option("--rg", ph.rg, "Grain radius (voxels)")->capture_default_str();
  grain->add_option("--rd", ph.rd, "Droplet radius (voxels)")->capture_default_str();
  grain->add_option("--sep", ph.sep, "Centre separation (voxels)")->capture_default_str();
  for (auto* sub : {flat, grain}) {
    sub->add_option("-o,--out", ph.out, "Output raw volume (sidecar written alongside)")->capture_default_str();
    sub->add_option("--report", ph.report, "JSON report with the analytical angle (default: <out stem>_report.json)");
    sub->add_option("--margin", ph.margin, "Empty margin (voxels)")->capture_default_str();
  }

  ConfigOptions measure_opts, map_opts, validate_opts;
  std::string m_input, m_out;
  auto* measure = app.add_subcommand("measure", "Measure contact angles on a labelled volume");
  measure->add_option("-i,--input", m_input, "Labelled volume (.raw with JSON sidecar)");
  measure->add_option("-o,--out", m_out, "Output directory");
  measure_opts.attach(measure);

  std::string p_input, p_meas, p_summary, p_out;
  auto* map = app.add_subcommand("map", "Build the wettability field from measurements");
  map->add_option("-i,--input", p_input, "Labelled volume (.raw with JSON sidecar)");
  map->add_option("-m,--measurements", p_meas, "Per-node CSV written by measure");
  map->add_option("-s,--summary", p_summary, "Per-path CSV (default: summary.csv next to the measurements)");
  map->add_option("-o,--out", p_out, "Output directory");
  map_opts.attach(map);

  std::string v_out;
  auto* validate = app.add_subcommand("validate", "Run the phantom and curvature validation suite");
  validate->add_option("-o,--out", v_out, "CSV report path (default: stdout)");
  validate_opts.attach(validate);

  std::vector<double> c_radii;
  TaubinParams c_taubin;
  std::string c_ply;
  auto* curvature = app.add_subcommand("curvature", "Mean curvature of smoothed voxel spheres");
  curvature->add_option("-r,--radius", c_radii, "Sphere radius (repeatable; default 50 28 6)");
  curvature->add_option("--iterations", c_taubin.iterations, "Taubin iterations")->capture_default_str();
  curvature->add_option("--lambda", c_taubin.lambda, "Taubin lambda")->capture_default_str();
  curvature->add_option("--mu", c_taubin.mu, "Taubin mu (0 for plain Laplacian)")->capture_default_str();
  curvature->add_option("--ply", c_ply, "Directory for PLY meshes with per-vertex curvature");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*flat) return cmd_phantom_flat(ph);
    if (*grain) return cmd_phantom_grain(ph);
    if (*measure) return cmd_measure(measure_opts, m_input, m_out);
    if (*map) return cmd_map(map_opts, p_input, p_meas, p_summary, p_out);
    if (*validate) return cmd_validate(validate_opts, v_out);
    if (*curvature) return cmd_curvature(c_radii, c_taubin, c_ply);
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
