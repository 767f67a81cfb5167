#include "porewet/angles.hpp"

#include "porewet/error.hpp"
#include "porewet/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace porewet {

namespace {

double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

double angle_between(const Vec3& a, const Vec3& b) {
  return rad2deg(std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0)));
}

} // namespace

void ExtrapolationParams::validate() const {
  if (!(slab_half_width > 0.0)) throw ParameterError("slab_half_width must be > 0");
  if (!(poly_window > 0.0 && poly_window <= max_face_distance))
    throw ParameterError("poly_window must satisfy 0 < poly_window <= max_face_distance");
  if (min_faces < 3) throw ParameterError("min_faces must be >= 3");
  if (poly_degree < 2 || poly_degree > 4) throw ParameterError("poly_degree must be 2, 3 or 4");
  if (!(fallback_threshold > 0.0)) throw ParameterError("fallback_threshold must be > 0");
  if (near_faces < 1) throw ParameterError("near_faces must be >= 1");
  if (lowess_robust_iterations < 0) throw ParameterError("lowess_robust_iterations must be >= 0");
  if (!(contact_exclusion >= 0.0 && contact_exclusion < max_face_distance))
    throw ParameterError("contact_exclusion must satisfy 0 <= contact_exclusion < max_face_distance");
}

const char* to_string(NormalMethod m) {
  switch (m) {
  case NormalMethod::polynomial: return "polynomial";
  case NormalMethod::lowess: return "lowess";
  case NormalMethod::rejected: return "rejected";
  }
  return "rejected";
}

std::optional<LocalFrame> local_frame(const ContactPath& path, int i) {
  const int n = static_cast<int>(path.nodes.size());
  if (i < 0 || i >= n || n < 2) return std::nullopt;
  LocalFrame frame;
  frame.origin = path.nodes[i];
  Vec3 dir;
  if (path.kind == PathKind::loop && n >= 3) {
    dir = path.nodes[(i + 1) % n] - path.nodes[(i - 1 + n) % n];
  } else if (i == 0) {
    dir = path.nodes[1] - path.nodes[0];
    frame.one_sided = true;
  } else if (i == n - 1) {
    dir = path.nodes[n - 1] - path.nodes[n - 2];
    frame.one_sided = true;
  } else {
    dir = path.nodes[i + 1] - path.nodes[i - 1];
  }
  const double len = dir.norm();
  if (!(len > 1e-12)) return std::nullopt;
  frame.secant = dir / len;
  return frame;
}

// ---------------------------------------------------------------------------

FaceIndex::FaceIndex(const TriangleMesh& mesh, double cell) : mesh_(&mesh), cell_(cell) {
  centroids_.reserve(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    centroids_.push_back(mesh.centroid(f));
    const Vec3& c = centroids_.back();
    buckets_[key(std::llround(std::floor(c.x() / cell_)), std::llround(std::floor(c.y() / cell_)),
                 std::llround(std::floor(c.z() / cell_)))]
        .push_back(static_cast<int>(f));
  }
}

std::uint64_t FaceIndex::key(long long i, long long j, long long k) const {
  const auto u = [](long long v) { return static_cast<std::uint64_t>(v + (1ll << 20)) & 0x1fffffull; };
  return (u(i) << 42) | (u(j) << 21) | u(k);
}

std::vector<int> FaceIndex::within(const Vec3& p, double radius) const {
  std::vector<int> out;
  const long long lo[3] = {std::llround(std::floor((p.x() - radius) / cell_)), std::llround(std::floor((p.y() - radius) / cell_)),
                           std::llround(std::floor((p.z() - radius) / cell_))};
  const long long hi[3] = {std::llround(std::floor((p.x() + radius) / cell_)), std::llround(std::floor((p.y() + radius) / cell_)),
                           std::llround(std::floor((p.z() + radius) / cell_))};
  const double r2 = radius * radius;
  for (long long i = lo[0]; i <= hi[0]; ++i)
    for (long long j = lo[1]; j <= hi[1]; ++j)
      for (long long k = lo[2]; k <= hi[2]; ++k) {
        const auto it = buckets_.find(key(i, j, k));
        if (it == buckets_.end()) continue;
        for (int f : it->second)
          if ((centroids_[f] - p).squaredNorm() <= r2) out.push_back(f);
      }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SelectedFace> select_faces(const Vec3& node, const Vec3& secant, const FaceIndex& index,
                                       const ExtrapolationParams& params) {
  std::vector<SelectedFace> out;
  for (int f : index.within(node, params.max_face_distance)) {
    const Vec3 rel = index.centroids()[f] - node;
    const double offset = rel.dot(secant);
    if (std::abs(offset) > params.slab_half_width) continue;
    const double dist = rel.norm();
    if (dist > params.max_face_distance) continue;
    out.push_back({f, dist, offset});
  }
  std::sort(out.begin(), out.end(), [](const SelectedFace& a, const SelectedFace& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.face < b.face;
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<Vec3> lowess_normal(std::span<const SelectedFace> faces, const TriangleMesh& mesh,
                                  const ExtrapolationParams& params) {
  std::vector<double> x(faces.size());
  std::vector<double> y[3];
  for (auto& c : y) c.resize(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    x[i] = faces[i].distance;
    const Vec3& n = mesh.face_normals[faces[i].face];
    for (int c = 0; c < 3; ++c) y[c][i] = n[c];
  }
  const std::size_t kth = std::min<std::size_t>(faces.size(), static_cast<std::size_t>(params.min_faces)) - 1;
  // Widen slightly so the min_faces-th face keeps a positive weight.
  const double bandwidth = std::max(params.contact_exclusion + params.poly_window, faces[kth].distance) * (1.0 + 1e-6) + 1e-9;
  const LowessParams lp{bandwidth, params.lowess_robust_iterations};
  Vec3 out;
  for (int c = 0; c < 3; ++c) {
    const auto v = lowess_at(x, y[c], 0.0, lp);
    if (!v) return std::nullopt;
    out[c] = *v;
  }
  const double len = out.norm();
  if (!(len > 1e-12)) return std::nullopt;
  return Vec3(out / len);
}

std::optional<Vec3> polynomial_normal(std::span<const SelectedFace> faces, const TriangleMesh& mesh,
                                      const ExtrapolationParams& params) {
  std::vector<double> x, w;
  std::vector<Vec3> normals;
  for (const auto& f : faces) {
    if (f.distance > params.contact_exclusion + params.poly_window) break;
    x.push_back(f.distance);
    w.push_back(1.0 / (0.5 + f.distance - params.contact_exclusion));
    normals.push_back(mesh.face_normals[f.face]);
  }
  Eigen::MatrixXd y(static_cast<Eigen::Index>(x.size()), 3);
  for (std::size_t i = 0; i < normals.size(); ++i) y.row(static_cast<Eigen::Index>(i)) = normals[i].transpose();
  const auto coeffs = weighted_polyfit(x, y, w, params.poly_degree);
  if (!coeffs) return std::nullopt;
  const Vec3 v = polyval(*coeffs, 0.0).transpose();
  const double len = v.norm();
  if (!(len > 1e-12) || !v.allFinite()) return std::nullopt;
  return Vec3(v / len);
}

} // namespace

NormalEstimate extrapolate_normal(std::span<const SelectedFace> selected, const TriangleMesh& mesh,
                                  const ExtrapolationParams& params, InterfaceKind kind) {
  NormalEstimate out;
  if (static_cast<int>(selected.size()) < params.min_faces) return out;
  std::vector<SelectedFace> faces;
  for (const auto& f : selected)
    if (f.distance >= params.contact_exclusion) faces.push_back(f);
  // The fits still need a few faces once the contact band is dropped.
  if (static_cast<int>(faces.size()) < params.poly_degree + 2) return out;

  const auto lowess = lowess_normal(faces, mesh, params);
  if (kind == InterfaceKind::solid_fluid) {
    if (lowess) out = {*lowess, NormalMethod::lowess};
    return out;
  }

  if (const auto poly = polynomial_normal(faces, mesh, params)) {
    Vec3 near = Vec3::Zero();
    const std::size_t k = std::min<std::size_t>(faces.size(), static_cast<std::size_t>(params.near_faces));
    for (std::size_t i = 0; i < k; ++i) near += mesh.face_normals[faces[i].face];
    if (near.norm() > 1e-12 && angle_between(*poly, near) <= params.fallback_threshold)
      return {*poly, NormalMethod::polynomial};
  }
  if (lowess) out = {*lowess, NormalMethod::lowess};
  return out;
}

std::optional<double> contact_angle(const Vec3& n_fs, const Vec3& n_ff) {
  const double a = n_fs.norm(), b = n_ff.norm();
  if (!(a > 0.0) || !(b > 0.0)) return std::nullopt;
  return rad2deg(std::acos(std::clamp(n_fs.dot(n_ff) / (a * b), -1.0, 1.0)));
}

std::vector<AngleMeasurement> measure_path(const ContactPath& path, const FaceIndex& ff, const FaceIndex& sf,
                                           const ExtrapolationParams& params) {
  std::vector<AngleMeasurement> out;
  out.reserve(path.nodes.size());
  for (int i = 0; i < static_cast<int>(path.nodes.size()); ++i) {
    AngleMeasurement m;
    m.path_id = path.id;
    m.node_index = i;
    m.position = path.nodes[i];
    if (const auto frame = local_frame(path, i)) {
      m.one_sided_secant = frame->one_sided;
      const auto ff_faces = select_faces(frame->origin, frame->secant, ff, params);
      const auto sf_faces = select_faces(frame->origin, frame->secant, sf, params);
      const auto nff = extrapolate_normal(ff_faces, ff.mesh(), params, InterfaceKind::fluid_fluid);
      const auto nfs = extrapolate_normal(sf_faces, sf.mesh(), params, InterfaceKind::solid_fluid);
      m.method_ff = nff.method;
      m.method_fs = nfs.method;
      if (nff.method != NormalMethod::rejected && nfs.method != NormalMethod::rejected) {
        m.n_ff = nff.normal;
        m.n_fs = nfs.normal;
        m.theta = contact_angle(m.n_fs, m.n_ff);
      }
    }
    out.push_back(m);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

OutlierReport clean_outliers(std::span<AngleMeasurement> measurements, PathKind kind, const OutlierParams& params) {
  OutlierReport report;
  std::vector<std::size_t> accepted;
  for (std::size_t i = 0; i < measurements.size(); ++i)
    if (!measurements[i].rejected()) accepted.push_back(i);
  const int n = static_cast<int>(accepted.size());
  if (n < params.min_measurements) {
    report.passthrough = true;
    return report;
  }

  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) values[i] = *measurements[accepted[i]].theta;
  const int half = params.window / 2;
  std::vector<std::optional<double>> replacement(n);

  for (int i = 0; i < n; ++i) {
    std::vector<double> window;
    if (kind == PathKind::loop && n > params.window) {
      for (int k = -half; k <= half; ++k) window.push_back(values[((i + k) % n + n) % n]);
    } else if (kind == PathKind::loop) {
      window = values;
    } else {
      for (int k = std::max(0, i - half); k <= std::min(n - 1, i + half); ++k) window.push_back(values[k]);
    }
    const double med = median_of(window);
    std::vector<double> dev(window.size());
    for (std::size_t k = 0; k < window.size(); ++k) dev[k] = std::abs(window[k] - med);
    const double mad = median_of(dev);
    const double d = std::abs(values[i] - med);
    double z = 0.0;
    if (mad > 0.0) {
      z = 0.6745 * d / mad;
    } else {
      // MAD collapses when most of the window is identical; use the mean
      // absolute deviation with its normal-consistency constant instead.
      double mean_ad = 0.0;
      for (double v : dev) mean_ad += v;
      mean_ad /= static_cast<double>(dev.size());
      if (mean_ad > 0.0) z = d / (1.253314 * mean_ad);
    }
    if (z > params.threshold) replacement[i] = med;
  }
  for (int i = 0; i < n; ++i)
    if (replacement[i]) {
      auto& m = measurements[accepted[i]];
      m.theta = *replacement[i];
      m.outlier_corrected = true;
      ++report.corrected;
    }
  return report;
}

std::optional<PathStatistics> path_statistics(std::span<const double> thetas, double width) {
  if (thetas.empty()) return std::nullopt;
  std::vector<double> v(thetas.begin(), thetas.end());
  std::sort(v.begin(), v.end());
  PathStatistics s;
  s.count = static_cast<int>(v.size());
  double sum = 0.0;
  for (double t : v) sum += t;
  s.mean = sum / s.count;
  double ss = 0.0;
  for (double t : v) ss += (t - s.mean) * (t - s.mean);
  s.std = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;

  int best = -1;
  const double h = 0.5 * width;
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0 && v[i] == v[i - 1]) continue;
    while (v[lo] < v[i] - h - 1e-12) ++lo;
    while (hi < v.size() && v[hi] <= v[i] + h + 1e-12) ++hi;
    const int cnt = static_cast<int>(hi - lo);
    if (cnt > best) {
      best = cnt;
      s.mode = v[i];
    }
  }
  return s;
}

std::optional<PathStatistics> path_statistics(std::span<const AngleMeasurement> measurements, double width) {
  std::vector<double> t;
  for (const auto& m : measurements)
    if (!m.rejected()) t.push_back(*m.theta);
  return path_statistics(t, width);
}

// ---------------------------------------------------------------------------

void write_measurements_csv(const std::filesystem::path& file, std::span<const AngleMeasurement> ms) {
  std::FILE* fp = std::fopen(file.string().c_str(), "w");
  if (!fp) throw IoError("cannot open " + file.string() + " for writing");
  std::fprintf(fp, "path_id,node_index,x,y,z,theta_deg,method_ff,method_fs,outlier_corrected,rejected\n");
  for (const auto& m : ms) {
    std::fprintf(fp, "%d,%d,%.6g,%.6g,%.6g,", m.path_id, m.node_index, m.position.x(), m.position.y(), m.position.z());
    if (m.theta) std::fprintf(fp, "%.6g", *m.theta);
    std::fprintf(fp, ",%s,%s,%d,%d\n", to_string(m.method_ff), to_string(m.method_fs), m.outlier_corrected ? 1 : 0,
                 m.rejected() ? 1 : 0);
  }
  const bool ok = std::ferror(fp) == 0;
  std::fclose(fp);
  if (!ok) throw IoError("failed writing " + file.string());
}

void write_summary_csv(const std::filesystem::path& file, std::span<const PathSummary> summaries) {
  std::FILE* fp = std::fopen(file.string().c_str(), "w");
  if (!fp) throw IoError("cannot open " + file.string() + " for writing");
  std::fprintf(fp, "path_id,kind,count,mean_deg,mode_deg,std_deg\n");
  for (const auto& s : summaries)
    std::fprintf(fp, "%d,%s,%d,%.6g,%.6g,%.6g\n", s.path_id, to_string(s.kind), s.stats.count, s.stats.mean,
                 s.stats.mode, s.stats.std);
  const bool ok = std::ferror(fp) == 0;
  std::fclose(fp);
  if (!ok) throw IoError("failed writing " + file.string());
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& file, std::size_t columns) {
  std::ifstream is(file);
  if (!is) throw IoError("cannot open " + file.string());
  std::string line;
  std::getline(is, line); // header
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != columns) throw IoError(file.string() + ": malformed row '" + line + "'");
    rows.push_back(std::move(cells));
  }
  return rows;
}

NormalMethod parse_method(const std::string& s) {
  if (s == "polynomial") return NormalMethod::polynomial;
  if (s == "lowess") return NormalMethod::lowess;
  return NormalMethod::rejected;
}

} // namespace

std::vector<PathSummary> read_summary_csv(const std::filesystem::path& file) {
  std::vector<PathSummary> out;
  try {
    for (const auto& r : read_csv(file, 6)) {
      PathSummary s;
      s.path_id = std::stoi(r[0]);
      s.kind = r[1] == "line" ? PathKind::line : PathKind::loop;
      s.stats.count = std::stoi(r[2]);
      s.stats.mean = std::stod(r[3]);
      s.stats.mode = std::stod(r[4]);
      s.stats.std = std::stod(r[5]);
      out.push_back(s);
    }
  } catch (const std::logic_error& e) {
    throw IoError(file.string() + ": " + e.what());
  }
  return out;
}

std::vector<AngleMeasurement> read_measurements_csv(const std::filesystem::path& file) {
  std::vector<AngleMeasurement> out;
  try {
    for (const auto& r : read_csv(file, 10)) {
      AngleMeasurement m;
      m.path_id = std::stoi(r[0]);
      m.node_index = std::stoi(r[1]);
      m.position = Vec3(std::stod(r[2]), std::stod(r[3]), std::stod(r[4]));
      if (!r[5].empty()) m.theta = std::stod(r[5]);
      m.method_ff = parse_method(r[6]);
      m.method_fs = parse_method(r[7]);
      m.outlier_corrected = r[8] == "1";
      if (r[9] == "1") m.theta.reset();
      out.push_back(m);
    }
  } catch (const std::logic_error& e) {
    throw IoError(file.string() + ": " + e.what());
  }
  return out;
}

} // namespace porewet
