#include "porewet/mesh.hpp"

#include "porewet/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

namespace porewet {

Vec3 TriangleMesh::centroid(std::size_t f) const {
  const auto& t = faces[f];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

double TriangleMesh::area(std::size_t f) const {
  const auto& t = faces[f];
  return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

void TriangleMesh::recompute_normals() {
  face_normals.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& t = faces[f];
    const Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    const double len = n.norm();
    face_normals[f] = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  }
}

MeshTopology::MeshTopology(const TriangleMesh& mesh) {
  const std::size_t nv = mesh.vertices.size();
  vertex_neighbors.assign(nv, {});
  vertex_faces.assign(nv, {});
  boundary_vertex.assign(nv, false);

  std::map<std::pair<int, int>, int> edge_use;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      vertex_faces[a].push_back(static_cast<int>(f));
      vertex_neighbors[a].push_back(b);
      vertex_neighbors[b].push_back(a);
      ++edge_use[{std::min(a, b), std::max(a, b)}];
    }
  }
  for (auto& n : vertex_neighbors) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  for (const auto& [edge, uses] : edge_use) {
    if (uses == 1) {
      ++boundary_edge_count;
      boundary_vertex[edge.first] = boundary_vertex[edge.second] = true;
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

using FaceKey = std::array<std::int64_t, 9>;

struct FaceKeyHash {
  std::size_t operator()(const FaceKey& k) const {
    std::size_t h = 1469598103934665603ull;
    for (auto v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
    return h;
  }
};

FaceKey face_key(const TriangleMesh& m, std::size_t f, double tolerance) {
  std::array<std::array<std::int64_t, 3>, 3> pts{};
  for (int k = 0; k < 3; ++k)
    for (int a = 0; a < 3; ++a)
      pts[k][a] = std::llround(m.vertices[m.faces[f][k]][a] / tolerance);
  std::sort(pts.begin(), pts.end());
  FaceKey key{};
  for (int k = 0; k < 3; ++k)
    for (int a = 0; a < 3; ++a) key[3 * k + a] = pts[k][a];
  return key;
}

} // namespace

InterfacePair classify_interfaces(const TriangleMesh& s_f2, const TriangleMesh& s_s, double tolerance) {
  std::unordered_set<FaceKey, FaceKeyHash> solid_faces;
  solid_faces.reserve(s_s.faces.size());
  for (std::size_t f = 0; f < s_s.faces.size(); ++f) solid_faces.insert(face_key(s_s, f, tolerance));

  InterfacePair pair;
  pair.surface = s_f2;
  pair.face_kind.resize(s_f2.faces.size());
  for (std::size_t f = 0; f < s_f2.faces.size(); ++f) {
    const bool shared = solid_faces.contains(face_key(s_f2, f, tolerance));
    pair.face_kind[f] = shared ? InterfaceKind::solid_fluid : InterfaceKind::fluid_fluid;
    (shared ? pair.sf_faces : pair.ff_faces).push_back(static_cast<int>(f));
  }
  return pair;
}

SubMesh InterfacePair::extract(InterfaceKind kind) const {
  const auto& list = kind == InterfaceKind::fluid_fluid ? ff_faces : sf_faces;
  SubMesh sub;
  std::vector<int> remap(surface.vertices.size(), -1);
  for (int f : list) {
    std::array<int, 3> t{};
    for (int k = 0; k < 3; ++k) {
      const int v = surface.faces[f][k];
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(sub.mesh.vertices.size());
        sub.mesh.vertices.push_back(surface.vertices[v]);
        sub.parent_vertex.push_back(v);
      }
      t[k] = remap[v];
    }
    sub.mesh.faces.push_back(t);
    sub.mesh.face_normals.push_back(surface.face_normals[f]);
    sub.parent_face.push_back(f);
  }
  return sub;
}

// ---------------------------------------------------------------------------

TriangleMesh taubin_smooth(const TriangleMesh& mesh, const TaubinParams& p) {
  if (!(p.lambda > 0.0 && p.lambda < 1.0)) throw ParameterError("taubin: lambda must lie in (0, 1)");
  if (!(p.mu < -p.lambda || p.mu == 0.0)) throw ParameterError("taubin: mu must be < -lambda (or 0 for plain Laplacian)");
  if (p.iterations < 0) throw ParameterError("taubin: iterations must be >= 0");

  TriangleMesh out = mesh;
  if (p.iterations == 0) return out;
  const MeshTopology topo(mesh);
  std::vector<Vec3> delta(mesh.vertices.size());

  auto step = [&](double factor) {
    for (std::size_t i = 0; i < out.vertices.size(); ++i) {
      const auto& nb = topo.vertex_neighbors[i];
      if (nb.empty() || (p.pin_boundary && topo.boundary_vertex[i])) {
        delta[i].setZero();
        continue;
      }
      Vec3 sum = Vec3::Zero();
      for (int j : nb) sum += out.vertices[j] - out.vertices[i];
      delta[i] = sum / static_cast<double>(nb.size());
    }
    for (std::size_t i = 0; i < out.vertices.size(); ++i) out.vertices[i] += factor * delta[i];
  };

  for (int it = 0; it < p.iterations; ++it) {
    step(p.lambda);
    if (p.mu != 0.0) step(p.mu);
  }
  out.recompute_normals();
  return out;
}

// ---------------------------------------------------------------------------

double CurvatureField::area_weighted_mean() const {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < mean_curvature.size(); ++i) {
    if (std::isnan(mean_curvature[i])) continue;
    num += mean_curvature[i] * vertex_area[i];
    den += vertex_area[i];
  }
  return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

CurvatureField mean_curvature(const TriangleMesh& mesh) {
  const std::size_t nv = mesh.vertices.size();
  const MeshTopology topo(mesh);
  std::vector<Vec3> laplace(nv, Vec3::Zero());
  std::vector<Vec3> normal_sum(nv, Vec3::Zero());
  CurvatureField out;
  out.vertex_area.assign(nv, 0.0);
  out.mean_curvature.assign(nv, std::numeric_limits<double>::quiet_NaN());

  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    const Vec3* p[3] = {&mesh.vertices[t[0]], &mesh.vertices[t[1]], &mesh.vertices[t[2]]};
    const Vec3 fn = (*p[1] - *p[0]).cross(*p[2] - *p[0]);
    const double area = 0.5 * fn.norm();
    if (area <= 0.0) continue;
    double cot[3];
    bool obtuse_at[3];
    for (int k = 0; k < 3; ++k) {
      const Vec3 u = *p[(k + 1) % 3] - *p[k];
      const Vec3 v = *p[(k + 2) % 3] - *p[k];
      cot[k] = u.dot(v) / u.cross(v).norm();
      obtuse_at[k] = u.dot(v) < 0.0;
    }
    const bool obtuse = obtuse_at[0] || obtuse_at[1] || obtuse_at[2];
    for (int k = 0; k < 3; ++k) {
      const int i = t[k], j = t[(k + 1) % 3], l = t[(k + 2) % 3];
      // Edge (i, j) is opposite corner l; edge (i, l) is opposite corner j.
      const double cot_ij = cot[(k + 2) % 3], cot_il = cot[(k + 1) % 3];
      laplace[i] += cot_ij * (mesh.vertices[i] - mesh.vertices[j]) + cot_il * (mesh.vertices[i] - mesh.vertices[l]);
      normal_sum[i] += fn;
      double a;
      if (!obtuse) {
        a = (cot_ij * (mesh.vertices[i] - mesh.vertices[j]).squaredNorm() +
             cot_il * (mesh.vertices[i] - mesh.vertices[l]).squaredNorm()) / 8.0;
      } else {
        a = obtuse_at[k] ? area / 2.0 : area / 4.0;
      }
      out.vertex_area[i] += a;
    }
  }

  for (std::size_t i = 0; i < nv; ++i) {
    if (topo.vertex_faces[i].empty() || topo.boundary_vertex[i] || out.vertex_area[i] <= 0.0) continue;
    const Vec3 k = laplace[i] / (2.0 * out.vertex_area[i]);
    const double nlen = normal_sum[i].norm();
    if (nlen == 0.0) continue;
    out.mean_curvature[i] = 0.5 * k.dot(normal_sum[i] / nlen);
  }
  return out;
}

VolumeResult enclosed_volume(const TriangleMesh& mesh) {
  VolumeResult r;
  for (const auto& t : mesh.faces)
    r.volume += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]])) / 6.0;
  r.closed = MeshTopology(mesh).boundary_edge_count == 0;
  return r;
}

// ---------------------------------------------------------------------------

void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh, std::span<const InterfaceKind> face_tags,
               std::span<const double> vertex_curvature) {
  const bool tags = !face_tags.empty(), curv = !vertex_curvature.empty();
  if (tags && face_tags.size() != mesh.faces.size()) throw ParameterError("write_ply: one tag per face required");
  if (curv && vertex_curvature.size() != mesh.vertices.size())
    throw ParameterError("write_ply: one curvature value per vertex required");

  std::FILE* fp = std::fopen(path.string().c_str(), "w");
  if (!fp) throw IoError("cannot open " + path.string() + " for writing");
  std::fprintf(fp, "ply\nformat ascii 1.0\nelement vertex %zu\n", mesh.vertices.size());
  std::fprintf(fp, "property float x\nproperty float y\nproperty float z\n");
  if (curv) std::fprintf(fp, "property float curvature\n");
  std::fprintf(fp, "element face %zu\nproperty list uchar int vertex_indices\n", mesh.faces.size());
  if (tags) std::fprintf(fp, "property uchar interface\n");
  std::fprintf(fp, "end_header\n");
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    std::fprintf(fp, "%.6g %.6g %.6g", v.x(), v.y(), v.z());
    if (curv) std::fprintf(fp, " %.6g", vertex_curvature[i]);
    std::fputc('\n', fp);
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    std::fprintf(fp, "3 %d %d %d", t[0], t[1], t[2]);
    if (tags) std::fprintf(fp, " %d", static_cast<int>(face_tags[f]));
    std::fputc('\n', fp);
  }
  const bool ok = std::ferror(fp) == 0;
  std::fclose(fp);
  if (!ok) throw IoError("failed writing " + path.string());
}

} // namespace porewet
