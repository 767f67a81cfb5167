#include "porewet/loops.hpp"

#include "porewet/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

namespace porewet {

const char* to_string(PathKind kind) { return kind == PathKind::loop ? "loop" : "line"; }

double ContactPath::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) len += (nodes[i] - nodes[i - 1]).norm();
  if (kind == PathKind::loop && nodes.size() > 2) len += (nodes.front() - nodes.back()).norm();
  return len;
}

std::vector<int> find_three_phase_vertices(const InterfacePair& pair) {
  const std::size_t nv = pair.surface.vertices.size();
  std::vector<std::uint8_t> seen(nv, 0);
  for (std::size_t f = 0; f < pair.surface.faces.size(); ++f) {
    const std::uint8_t bit = pair.face_kind[f] == InterfaceKind::fluid_fluid ? 1 : 2;
    for (int v : pair.surface.faces[f]) seen[v] |= bit;
  }
  std::vector<int> out;
  for (std::size_t v = 0; v < nv; ++v)
    if (seen[v] == 3) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<ContactPath> trace_contact_paths(std::span<const int> v_tp, const InterfacePair& pair) {
  std::vector<int> verts(v_tp.begin(), v_tp.end());
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());

  std::unordered_map<int, int> local;
  for (std::size_t i = 0; i < verts.size(); ++i) local[verts[i]] = static_cast<int>(i);

  // Edges of the surface mesh joining two three-phase vertices.
  std::vector<std::vector<int>> adj(verts.size());
  for (const auto& t : pair.surface.faces)
    for (int k = 0; k < 3; ++k) {
      auto a = local.find(t[k]), b = local.find(t[(k + 1) % 3]);
      if (a == local.end() || b == local.end()) continue;
      adj[a->second].push_back(b->second);
      adj[b->second].push_back(a->second);
    }
  for (auto& n : adj) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }

  const auto& pos = pair.surface.vertices;
  std::vector<bool> visited(verts.size(), false);

  std::vector<ContactPath> paths;
  std::vector<int> component;
  std::vector<bool> in_component(verts.size(), false);
  for (std::size_t seed = 0; seed < verts.size(); ++seed) {
    if (in_component[seed]) continue;
    component.clear();
    std::vector<int> stack{static_cast<int>(seed)};
    in_component[seed] = true;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      component.push_back(v);
      for (int w : adj[v])
        if (!in_component[w]) {
          in_component[w] = true;
          stack.push_back(w);
        }
    }
    std::sort(component.begin(), component.end());

    // Peel dangling spurs; what remains (the 2-core) carries the contact
    // loop when the component has one. Spur vertices are traced afterwards.
    std::unordered_map<int, int> degree;
    std::vector<int> peel;
    for (int v : component) {
      degree[v] = static_cast<int>(adj[v].size());
      if (degree[v] <= 1) peel.push_back(v);
    }
    std::vector<bool> in_core(verts.size(), false);
    for (int v : component) in_core[v] = true;
    while (!peel.empty()) {
      const int v = peel.back();
      peel.pop_back();
      if (!in_core[v]) continue;
      in_core[v] = false;
      for (int w : adj[v])
        if (in_core[w] && --degree[w] == 1) peel.push_back(w);
    }
    const bool has_core = std::any_of(component.begin(), component.end(), [&](int v) { return in_core[v]; });

    // One path per component. It starts at the lowest-id core vertex, or
    // without a core at the lowest-id open end.
    int start = -1;
    for (int v : component)
      if (has_core ? in_core[v] : adj[v].size() <= 1) {
        start = v;
        break;
      }
    if (start < 0) start = component.front();

    ContactPath path;
    path.id = static_cast<int>(paths.size());

    // Depth-first walk preferring the smallest turn. A dead end that is not
    // next to the start is backed out of, so a spur or a detour inside a
    // thick band cannot cut a loop short. The step budget bounds the search;
    // when it runs out the longest trail seen is kept.
    auto candidates = [&](const std::vector<int>& trail) {
      const int cur = trail.back();
      std::vector<std::pair<double, int>> c;
      for (int w : adj[cur]) {
        if (visited[w] || (has_core && !in_core[w])) continue;
        double turn = 0.0;
        if (trail.size() >= 2) {
          const Vec3 in = pos[verts[cur]] - pos[verts[trail[trail.size() - 2]]];
          const Vec3 out = pos[verts[w]] - pos[verts[cur]];
          turn = std::acos(std::clamp(in.normalized().dot(out.normalized()), -1.0, 1.0));
        }
        c.emplace_back(turn, w);
      }
      std::sort(c.begin(), c.end());
      return c;
    };
    auto closes_at = [&](const std::vector<int>& trail) {
      return trail.size() >= 3 && std::binary_search(adj[trail.back()].begin(), adj[trail.back()].end(), start);
    };

    std::vector<int> trail{start}, best_trail{start};
    std::vector<std::vector<std::pair<double, int>>> options{candidates(trail)};
    std::vector<std::size_t> next{0};
    visited[start] = true;
    long long budget = 64ll * static_cast<long long>(component.size()) + 64;
    bool closed = false;
    while (!trail.empty() && budget-- > 0) {
      if (next.back() < options.back().size()) {
        const int w = options.back()[next.back()++].second;
        if (visited[w]) continue;
        visited[w] = true;
        trail.push_back(w);
        options.push_back(candidates(trail));
        next.push_back(0);
        continue;
      }
      // No way forward from the trail end.
      if (trail.size() > best_trail.size()) best_trail = trail;
      if (closes_at(trail) || trail.size() == 1) {
        closed = closes_at(trail);
        break;
      }
      visited[trail.back()] = false;
      trail.pop_back();
      options.pop_back();
      next.pop_back();
    }
    if (!closed) {
      for (int v : trail) visited[v] = false;
      trail = best_trail;
      for (int v : trail) visited[v] = true;
    }
    for (int v : trail)
      if (adj[v].size() >= 3) path.branched = true;

    path.kind = closes_at(trail) ? PathKind::loop : PathKind::line;
    for (int v : trail) {
      path.source_vertex_ids.push_back(verts[v]);
      path.nodes.push_back(pos[verts[v]]);
    }
    for (int v : component)
      if (!visited[v]) {
        visited[v] = true;
        path.absorbed_vertex_ids.push_back(verts[v]);
      }
    paths.push_back(std::move(path));
  }
  return paths;
}

// ---------------------------------------------------------------------------

namespace {

using Eigen::MatrixXd;

// Uniform cubic B-spline weights for local parameter f in [0,1).
std::array<double, 4> uniform_weights(double f) {
  const double f2 = f * f, f3 = f2 * f;
  return {(1.0 - f) * (1.0 - f) * (1.0 - f) / 6.0, (3.0 * f3 - 6.0 * f2 + 4.0) / 6.0,
          (-3.0 * f3 + 3.0 * f2 + 3.0 * f + 1.0) / 6.0, f3 / 6.0};
}

/// Closed curve with `m` control points, parameter u in [0,1).
struct PeriodicSpline {
  int m;
  MatrixXd ctrl; // m x 3

  // Basis row: (index, weight) pairs.
  static std::array<std::pair<int, double>, 4> basis(int m, double u) {
    double t = u * m;
    t -= std::floor(t / m) * m;
    int i = static_cast<int>(std::floor(t));
    if (i >= m) i = m - 1;
    const auto w = uniform_weights(t - i);
    std::array<std::pair<int, double>, 4> out;
    for (int k = 0; k < 4; ++k) out[k] = {((i - 1 + k) % m + m) % m, w[k]};
    return out;
  }
  Vec3 eval(double u) const {
    Vec3 p = Vec3::Zero();
    for (auto [j, w] : basis(m, u)) p += w * ctrl.row(j).transpose();
    return p;
  }
};

/// Open curve with clamped knots and `m` control points, u in [0,1].
struct ClampedSpline {
  int m;
  std::vector<double> knots;
  MatrixXd ctrl;

  explicit ClampedSpline(int m_) : m(m_) {
    const int spans = m - 3;
    knots.assign(4, 0.0);
    for (int k = 1; k < spans; ++k) knots.push_back(static_cast<double>(k) / spans);
    for (int k = 0; k < 4; ++k) knots.push_back(1.0);
  }
  std::vector<std::pair<int, double>> basis(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    int span = 3;
    while (span < m - 1 && u >= knots[span + 1]) ++span;
    // Cox-de Boor triangle for degree 3.
    double N[4] = {1.0, 0.0, 0.0, 0.0};
    double left[4], right[4];
    for (int j = 1; j <= 3; ++j) {
      left[j] = u - knots[span + 1 - j];
      right[j] = knots[span + j] - u;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double denom = right[r + 1] + left[j - r];
        const double tmp = denom != 0.0 ? N[r] / denom : 0.0;
        N[r] = saved + right[r + 1] * tmp;
        saved = left[j - r] * tmp;
      }
      N[j] = saved;
    }
    std::vector<std::pair<int, double>> out;
    for (int k = 0; k <= 3; ++k) out.emplace_back(span - 3 + k, N[k]);
    return out;
  }
  Vec3 eval(double u) const {
    Vec3 p = Vec3::Zero();
    for (auto [j, w] : basis(u)) p += w * ctrl.row(j).transpose();
    return p;
  }
};

std::vector<double> chord_parameters(const std::vector<Vec3>& pts, bool closed, double& total) {
  std::vector<double> u(pts.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    acc += (pts[i] - pts[i - 1]).norm();
    u[i] = acc;
  }
  if (closed) acc += (pts.front() - pts.back()).norm();
  total = acc;
  if (acc > 0.0)
    for (auto& v : u) v /= acc;
  return u;
}

template <class Spline, class BasisFn>
bool least_squares_fit(Spline& s, const std::vector<Vec3>& pts, const std::vector<double>& u, BasisFn&& basis,
                       double& ssr) {
  const int n = static_cast<int>(pts.size());
  MatrixXd A = MatrixXd::Zero(n, s.m), P(n, 3);
  for (int k = 0; k < n; ++k) {
    for (auto [j, w] : basis(u[k])) A(k, j) += w;
    P.row(k) = pts[k].transpose();
  }
  const MatrixXd AtA = A.transpose() * A;
  Eigen::LDLT<MatrixXd> ldlt(AtA);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) return false;
  s.ctrl = ldlt.solve(A.transpose() * P);
  if (!s.ctrl.allFinite()) return false;
  ssr = (A * s.ctrl - P).squaredNorm();
  return true;
}

bool collinear(const std::vector<Vec3>& pts) {
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const auto ev = es.eigenvalues();
  return ev[2] <= 0.0 || ev[1] <= 1e-9 * ev[2];
}

/// Uniform arc-length resampling of a densely sampled curve.
std::vector<Vec3> resample(const std::vector<Vec3>& dense, bool closed, double spacing) {
  std::vector<double> cum(dense.size(), 0.0);
  for (std::size_t i = 1; i < dense.size(); ++i) cum[i] = cum[i - 1] + (dense[i] - dense[i - 1]).norm();
  double total = cum.back();
  if (closed) total += (dense.front() - dense.back()).norm();
  if (total <= 0.0) return {dense.front()};

  const int segments = std::max(closed ? 3 : 1, static_cast<int>(std::lround(total / spacing)));
  const int count = closed ? segments : segments + 1;
  const double step = total / segments;
  std::vector<Vec3> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (int k = 0; k < count; ++k) {
    const double s = std::min(k * step, total);
    while (seg + 1 < dense.size() && cum[seg + 1] < s) ++seg;
    const Vec3& a = dense[seg];
    const bool wrap = seg + 1 >= dense.size();
    const Vec3& b = wrap ? dense.front() : dense[seg + 1];
    const double a_s = cum[seg], b_s = wrap ? total : cum[seg + 1];
    const double t = b_s > a_s ? (s - a_s) / (b_s - a_s) : 0.0;
    out.push_back(a + std::clamp(t, 0.0, 1.0) * (b - a));
  }
  if (!closed) out.back() = dense.back();
  return out;
}

std::vector<Vec3> moving_average(const std::vector<Vec3>& pts, bool closed) {
  const int n = static_cast<int>(pts.size());
  std::vector<Vec3> out(pts.size());
  for (int i = 0; i < n; ++i) {
    Vec3 sum = Vec3::Zero();
    int cnt = 0;
    for (int k = -1; k <= 1; ++k) {
      int j = i + k;
      if (closed) j = (j + n) % n;
      else if (j < 0 || j >= n) continue;
      sum += pts[j];
      ++cnt;
    }
    out[i] = sum / cnt;
  }
  if (!closed) {
    out.front() = pts.front();
    out.back() = pts.back();
  }
  return out;
}

} // namespace

ContactPath smooth_contact_path(const ContactPath& path, const SplineParams& params) {
  if (!(params.spacing > 0.0) || !(params.jitter >= 0.0)) throw ParameterError("spline spacing must be > 0 and jitter >= 0");
  ContactPath out = path;
  const int n = static_cast<int>(path.nodes.size());
  if (n < 4) {
    out.smoothing_degraded = true;
    return out;
  }
  const bool closed = path.kind == PathKind::loop;
  const double budget = n * params.jitter;

  double total = 0.0;
  const auto u = chord_parameters(path.nodes, closed, total);
  const int dense_n = std::max(400, 20 * n);
  std::vector<Vec3> dense;
  bool ok = total > 0.0 && !collinear(path.nodes);

  if (ok && closed) {
    PeriodicSpline s{std::max(4, n / 8), {}};
    double ssr = 0.0;
    ok = false;
    for (;;) {
      if (!least_squares_fit(s, path.nodes, u, [&](double t) { return PeriodicSpline::basis(s.m, t); }, ssr)) break;
      ok = true;
      if (ssr <= budget || s.m >= n / 2) break;
      s.m = std::min(n / 2, std::max(s.m + 1, s.m * 5 / 4));
    }
    if (ok)
      for (int k = 0; k < dense_n; ++k) dense.push_back(s.eval(static_cast<double>(k) / dense_n));
  } else if (ok) {
    ClampedSpline s(std::max(4, n / 8));
    double ssr = 0.0;
    ok = false;
    for (;;) {
      if (!least_squares_fit(s, path.nodes, u, [&](double t) { return s.basis(t); }, ssr)) break;
      ok = true;
      if (ssr <= budget || s.m >= n / 2) break;
      s = ClampedSpline(std::min(n / 2, std::max(s.m + 1, s.m * 5 / 4)));
    }
    if (ok)
      for (int k = 0; k <= dense_n; ++k) dense.push_back(s.eval(static_cast<double>(k) / dense_n));
  }

  if (!ok) {
    out.smoothing_degraded = true;
    dense = moving_average(path.nodes, closed);
  }
  out.nodes = resample(dense, closed, params.spacing);
  return out;
}

double total_turning(const ContactPath& path) {
  const auto& p = path.nodes;
  const int n = static_cast<int>(p.size());
  const bool closed = path.kind == PathKind::loop;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!closed && (i == 0 || i == n - 1)) continue;
    const Vec3 a = p[i] - p[(i - 1 + n) % n];
    const Vec3 b = p[(i + 1) % n] - p[i];
    if (a.norm() == 0.0 || b.norm() == 0.0) continue;
    sum += std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0));
  }
  return sum;
}

void write_paths_csv(const std::filesystem::path& file, std::span<const ContactPath> paths) {
  std::FILE* fp = std::fopen(file.string().c_str(), "w");
  if (!fp) throw IoError("cannot open " + file.string() + " for writing");
  std::fprintf(fp, "path_id,kind,node_index,x,y,z\n");
  for (const auto& p : paths)
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
      std::fprintf(fp, "%d,%s,%zu,%.6g,%.6g,%.6g\n", p.id, to_string(p.kind), i, p.nodes[i].x(), p.nodes[i].y(),
                   p.nodes[i].z());
  const bool ok = std::ferror(fp) == 0;
  std::fclose(fp);
  if (!ok) throw IoError("failed writing " + file.string());
}

} // namespace porewet
