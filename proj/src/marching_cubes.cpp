#include "porewet/mesh.hpp"

#include <algorithm>
#include <unordered_map>

namespace porewet {

namespace {

// Corner i sits at (i & 1, (i >> 1) & 1, (i >> 2) & 1).
constexpr int corner_offset(int corner, int axis) { return (corner >> axis) & 1; }

struct CubeEdge {
  int a, b, axis;
};

// Triangulation of each of the 256 corner configurations, generated by
// walking isoline segments around the six cube faces. Faces are resolved
// independently, so neighbouring cubes always agree along a shared face.
struct CaseTable {
  std::array<CubeEdge, 12> edges{};
  std::array<std::vector<std::array<int, 3>>, 256> triangles;

  explicit CaseTable(Ambiguity rule) {
    int ne = 0;
    std::array<std::array<int, 8>, 8> edge_of{};
    for (auto& row : edge_of) row.fill(-1);
    for (int a = 0; a < 8; ++a)
      for (int axis = 0; axis < 3; ++axis)
        if (!corner_offset(a, axis)) {
          const int b = a | (1 << axis);
          edges[ne] = {a, b, axis};
          edge_of[a][b] = edge_of[b][a] = ne;
          ++ne;
        }

    // Six faces with corners in counter-clockwise order seen from outside.
    std::vector<std::array<int, 4>> faces;
    for (int axis = 0; axis < 3; ++axis)
      for (int side = 0; side < 2; ++side) {
        const int p = (axis + 1) % 3, q = (axis + 2) % 3;
        std::array<int, 4> c{};
        const int pq[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        for (int k = 0; k < 4; ++k) c[k] = (side << axis) | (pq[k][0] << p) | (pq[k][1] << q);
        // (p, q, axis) is a right-handed cycle, so this order faces +axis.
        if (side == 0) std::swap(c[1], c[3]);
        faces.push_back(c);
      }

    for (int config = 0; config < 256; ++config) {
      auto inside = [config](int c) { return ((config >> c) & 1) != 0; };
      std::array<int, 12> next;
      next.fill(-1);
      for (const auto& c : faces) {
        std::array<int, 4> e{};
        int crossings = 0;
        for (int k = 0; k < 4; ++k) {
          e[k] = edge_of[c[k]][c[(k + 1) % 4]];
          crossings += inside(c[k]) != inside(c[(k + 1) % 4]);
        }
        if (crossings == 2) {
          int start = -1, end = -1;
          for (int k = 0; k < 4; ++k) {
            const bool i0 = inside(c[k]), i1 = inside(c[(k + 1) % 4]);
            if (i0 && !i1) start = e[k];
            if (!i0 && i1) end = e[k];
          }
          next[start] = end;
        } else if (crossings == 4) {
          for (int k = 0; k < 4; ++k) {
            const int prev = e[(k + 3) % 4];
            if (rule == Ambiguity::separate && inside(c[k])) next[e[k]] = prev;
            if (rule == Ambiguity::join && !inside(c[k])) next[prev] = e[k];
          }
        }
      }

      std::array<bool, 12> used{};
      for (int s = 0; s < 12; ++s) {
        if (next[s] < 0 || used[s]) continue;
        std::vector<int> poly;
        for (int e = s; !used[e]; e = next[e]) {
          used[e] = true;
          poly.push_back(e);
        }
        std::rotate(poly.begin(), std::min_element(poly.begin(), poly.end()), poly.end());
        for (std::size_t k = 1; k + 1 < poly.size(); ++k)
          triangles[config].push_back({poly[0], poly[k + 1], poly[k]});
      }
    }
  }
};

const CaseTable& case_table(Ambiguity rule) {
  static const CaseTable separate(Ambiguity::separate);
  static const CaseTable join(Ambiguity::join);
  return rule == Ambiguity::separate ? separate : join;
}

} // namespace

Ambiguity default_ambiguity(Phase label) {
  return label == Phase::solid ? Ambiguity::join : Ambiguity::separate;
}

TriangleMesh extract_isosurface(const LabeledVolume& vol, Phase label) {
  return extract_isosurface(vol, static_cast<std::uint8_t>(label), default_ambiguity(label));
}

TriangleMesh extract_isosurface(const Grid8& vol, std::uint8_t label, Ambiguity rule) {
  const CaseTable& table = case_table(rule);
  const Dims& d = vol.dims();
  TriangleMesh mesh;
  std::unordered_map<std::uint64_t, int> vertex_of_edge;

  auto vertex_id = [&](int x, int y, int z, const CubeEdge& e) {
    const int ax = x + corner_offset(e.a, 0), ay = y + corner_offset(e.a, 1), az = z + corner_offset(e.a, 2);
    const std::uint64_t key = static_cast<std::uint64_t>(d.index(ax, ay, az)) * 3u + static_cast<std::uint64_t>(e.axis);
    auto [it, fresh] = vertex_of_edge.try_emplace(key, static_cast<int>(mesh.vertices.size()));
    if (fresh) {
      Vec3 p(ax, ay, az);
      p[e.axis] += 0.5;
      mesh.vertices.push_back(p);
    }
    return it->second;
  };

  for (int z = 0; z + 1 < d.nz; ++z)
    for (int y = 0; y + 1 < d.ny; ++y)
      for (int x = 0; x + 1 < d.nx; ++x) {
        int config = 0;
        for (int c = 0; c < 8; ++c)
          if (vol(x + corner_offset(c, 0), y + corner_offset(c, 1), z + corner_offset(c, 2)) == label)
            config |= 1 << c;
        if (config == 0 || config == 255) continue;
        for (const auto& tri : table.triangles[config]) {
          mesh.faces.push_back({vertex_id(x, y, z, table.edges[tri[0]]), vertex_id(x, y, z, table.edges[tri[1]]),
                                vertex_id(x, y, z, table.edges[tri[2]])});
        }
      }
  mesh.recompute_normals();
  return mesh;
}

} // namespace porewet
