#include "porewet/wetmap.hpp"

#include "porewet/error.hpp"
#include "porewet/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <unordered_map>

namespace porewet {

const char* to_string(Provenance p) {
  switch (p) {
  case Provenance::solid: return "solid";
  case Provenance::uninvaded: return "uninvaded";
  case Provenance::object: return "object";
  case Provenance::transition: return "transition";
  case Provenance::unassigned: return "unassigned";
  }
  return "unassigned";
}

WettabilityField::WettabilityField(const LabeledVolume& vol)
    : dims(vol.dims()), theta(vol.size(), unassigned), provenance(vol.size(), Provenance::unassigned) {
  for (std::size_t i = 0; i < vol.size(); ++i)
    if (vol[i] == static_cast<std::uint8_t>(Phase::solid)) provenance[i] = Provenance::solid;
}

std::size_t WettabilityField::count(Provenance p) const {
  return static_cast<std::size_t>(std::count(provenance.begin(), provenance.end(), p));
}

void MapParams::validate() const {
  if (!(uninvaded_angle >= 1.0 && uninvaded_angle <= 180.0))
    throw ParameterError("uninvaded_angle must lie in [1, 180]");
  if (dilation_radius < 1) throw ParameterError("dilation_radius must be > 0");
  if (!(idw_power > 0.0)) throw ParameterError("idw_power must be > 0");
  if (!(max_distance > 0.0)) throw ParameterError("max_distance must be > 0");
}

std::vector<PathSource> path_sources(std::span<const PathSummary> summaries,
                                     std::span<const AngleMeasurement> measurements) {
  std::map<int, PathSource> by_id;
  for (const auto& s : summaries) {
    auto& src = by_id[s.path_id];
    src.path_id = s.path_id;
    src.mean = s.stats.mean;
    src.count = s.stats.count;
  }
  for (const auto& m : measurements) {
    const auto it = by_id.find(m.path_id);
    if (it != by_id.end()) it->second.nodes.push_back(m.position);
  }
  std::vector<PathSource> out;
  for (auto& [id, src] : by_id)
    if (!src.nodes.empty()) out.push_back(std::move(src));
  return out;
}

std::optional<double> idw_mean(std::span<const IdwTerm> terms, double power) {
  double num = 0.0, den = 0.0;
  for (const auto& t : terms) {
    const double w = t.count / std::pow(std::max(t.distance, 1.0), power);
    num += w * t.mean;
    den += w;
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

void assign_uninvaded(const LabeledVolume& vol, WettabilityField& field, const MapParams& params) {
  params.validate();
  const auto solid = static_cast<std::uint8_t>(Phase::solid);
  Mask pore_mask(vol.dims());
  for (std::size_t i = 0; i < vol.size(); ++i) pore_mask[i] = vol[i] != solid;
  const auto pores = connected_components(pore_mask, params.connectivity);
  std::vector<char> invaded(pores.sizes.size(), 0);
  for (std::size_t i = 0; i < vol.size(); ++i)
    if (vol[i] == static_cast<std::uint8_t>(Phase::invading)) invaded[pores.ids[i]] = 1;
  const float angle = static_cast<float>(params.uninvaded_angle);
  for (std::size_t i = 0; i < vol.size(); ++i) {
    const auto id = pores.ids[i];
    if (id == 0 || invaded[id] || field.provenance[i] != Provenance::unassigned) continue;
    field.theta[i] = angle;
    field.provenance[i] = Provenance::uninvaded;
  }
}

namespace {

/// Nodes bucketed on a cubic grid for fixed-radius queries.
class NodeGrid {
public:
  NodeGrid(std::span<const PathSource> sources, double cell) : cell_(cell) {
    for (std::size_t s = 0; s < sources.size(); ++s)
      for (const auto& p : sources[s].nodes) cells_[key(p)].push_back({static_cast<int>(s), p});
  }

  /// Squared distance from p to the nearest node of each source within
  /// `radius`, as (source index, d2) sorted by source index.
  std::vector<std::pair<int, double>> nearest_per_source(const Vec3& p, double radius) const {
    std::vector<std::pair<int, double>> best;
    const double r2 = radius * radius;
    const auto c = cell_of(p);
    for (long long i = c[0] - 1; i <= c[0] + 1; ++i)
      for (long long j = c[1] - 1; j <= c[1] + 1; ++j)
        for (long long k = c[2] - 1; k <= c[2] + 1; ++k) {
          const auto it = cells_.find(pack(i, j, k));
          if (it == cells_.end()) continue;
          for (const auto& [s, q] : it->second) {
            const double d2 = (q - p).squaredNorm();
            if (d2 > r2) continue;
            auto slot = std::find_if(best.begin(), best.end(), [&](const auto& e) { return e.first == s; });
            if (slot == best.end()) best.emplace_back(s, d2);
            else slot->second = std::min(slot->second, d2);
          }
        }
    std::sort(best.begin(), best.end());
    return best;
  }

private:
  struct Entry {
    int source;
    Vec3 pos;
  };
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> cells_;

  std::array<long long, 3> cell_of(const Vec3& p) const {
    return {static_cast<long long>(std::floor(p.x() / cell_)), static_cast<long long>(std::floor(p.y() / cell_)),
            static_cast<long long>(std::floor(p.z() / cell_))};
  }
  static std::uint64_t pack(long long i, long long j, long long k) {
    const auto u = [](long long v) { return static_cast<std::uint64_t>(v + (1ll << 20)) & 0x1fffffull; };
    return (u(i) << 42) | (u(j) << 21) | u(k);
  }
  std::uint64_t key(const Vec3& p) const {
    const auto c = cell_of(p);
    return pack(c[0], c[1], c[2]);
  }
};

std::optional<double> voxel_idw(const NodeGrid& grid, std::span<const PathSource> sources, const Vec3& p,
                                const MapParams& params) {
  const auto near = grid.nearest_per_source(p, params.max_distance);
  if (near.empty()) return std::nullopt;
  std::vector<IdwTerm> terms;
  terms.reserve(near.size());
  for (const auto& [s, d2] : near) terms.push_back({sources[s].mean, sources[s].count, std::sqrt(d2)});
  return idw_mean(terms, params.idw_power);
}

Vec3 voxel_center(const Dims& d, std::size_t i) {
  const auto c = d.coords(i);
  return {static_cast<double>(c[0]), static_cast<double>(c[1]), static_cast<double>(c[2])};
}

/// Applies the stage-3 rule to every voxel accepted by `want`, in parallel
/// over z slices.
template <class Pred>
void assign_by_nodes(WettabilityField& field, std::span<const PathSource> sources, const MapParams& params,
                     Pred want) {
  if (sources.empty()) return;
  const NodeGrid grid(sources, params.max_distance);
  const Dims d = field.dims;
  const std::size_t slice = static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny);
  parallel_for(static_cast<std::size_t>(d.nz), [&](std::size_t z) {
    for (std::size_t i = z * slice; i < (z + 1) * slice; ++i) {
      if (!want(i)) continue;
      if (const auto v = voxel_idw(grid, sources, voxel_center(d, i), params)) {
        field.theta[i] = static_cast<float>(*v);
        field.provenance[i] = Provenance::transition;
      }
    }
  });
}

} // namespace

std::vector<ObjectReport> assign_invading_objects(const LabeledVolume& vol, WettabilityField& field,
                                                  std::span<const PathSource> sources, const MapParams& params) {
  params.validate();
  const auto objects = connected_components(vol, static_cast<std::uint8_t>(Phase::invading), params.connectivity);
  const Dims d = vol.dims();
  const std::size_t n_obj = objects.component_count();
  std::vector<ObjectReport> reports(n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) {
    reports[o].object_id = static_cast<int>(o + 1);
    reports[o].voxels = objects.sizes[o + 1];
  }
  if (n_obj == 0) return reports;

  // Path association: a node lies inside an object's dilation when an object
  // voxel sits within Chebyshev distance `dilation_radius` of the node's voxel.
  std::vector<std::vector<int>> assoc(n_obj); // source indices, ascending
  const int r = params.dilation_radius;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    std::vector<std::uint32_t> hit;
    for (const auto& p : sources[s].nodes) {
      const int cx = static_cast<int>(std::lround(p.x())), cy = static_cast<int>(std::lround(p.y())),
                cz = static_cast<int>(std::lround(p.z()));
      if (!d.contains(cx, cy, cz)) continue;
      for (int z = std::max(0, cz - r); z <= std::min(d.nz - 1, cz + r); ++z)
        for (int y = std::max(0, cy - r); y <= std::min(d.ny - 1, cy + r); ++y)
          for (int x = std::max(0, cx - r); x <= std::min(d.nx - 1, cx + r); ++x)
            if (const auto id = objects.ids[d.index(x, y, z)]; id != 0) hit.push_back(id);
    }
    std::sort(hit.begin(), hit.end());
    hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
    for (auto id : hit) assoc[id - 1].push_back(static_cast<int>(s));
  }

  // Boundary voxels: object voxels with a 6-neighbour outside the object.
  std::vector<std::vector<std::size_t>> boundary(n_obj);
  std::vector<std::vector<std::size_t>> members(n_obj);
  for (std::size_t i = 0; i < vol.size(); ++i) {
    const auto id = objects.ids[i];
    if (id == 0) continue;
    members[id - 1].push_back(i);
    const auto c = d.coords(i);
    static constexpr int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (const auto& o : off) {
      const int x = c[0] + o[0], y = c[1] + o[1], z = c[2] + o[2];
      if (d.contains(x, y, z) && objects.ids[d.index(x, y, z)] != id) {
        boundary[id - 1].push_back(i);
        break;
      }
    }
  }

  parallel_for(n_obj, [&](std::size_t o) {
    auto& rep = reports[o];
    if (assoc[o].empty()) {
      rep.orphan = true;
      return;
    }
    const auto& bset = boundary[o].empty() ? members[o] : boundary[o];
    std::vector<IdwTerm> terms;
    for (int s : assoc[o]) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i : bset) {
        const Vec3 c = voxel_center(d, i);
        for (const auto& p : sources[s].nodes) best = std::min(best, (p - c).squaredNorm());
      }
      terms.push_back({sources[s].mean, sources[s].count, std::sqrt(best)});
      rep.path_ids.push_back(sources[s].path_id);
    }
    rep.angle = idw_mean(terms, params.idw_power);
    if (!rep.angle) return;
    const float v = static_cast<float>(*rep.angle);
    for (std::size_t i : members[o]) {
      if (field.provenance[i] != Provenance::unassigned) continue;
      field.theta[i] = v;
      field.provenance[i] = Provenance::object;
    }
  });

  // Orphans get the per-voxel rule used for the defending fluid.
  std::vector<char> orphan(n_obj + 1, 0);
  bool any = false;
  for (const auto& rep : reports)
    if (rep.orphan) {
      orphan[rep.object_id] = 1;
      any = true;
    }
  if (any)
    assign_by_nodes(field, sources, params, [&](std::size_t i) {
      return orphan[objects.ids[i]] && field.provenance[i] == Provenance::unassigned;
    });
  return reports;
}

void assign_defending_transition(const LabeledVolume& vol, WettabilityField& field,
                                 std::span<const PathSource> sources, const MapParams& params) {
  params.validate();
  const auto defending = static_cast<std::uint8_t>(Phase::defending);
  assign_by_nodes(field, sources, params, [&](std::size_t i) {
    return vol[i] == defending && field.provenance[i] == Provenance::unassigned;
  });
}

void clip_field(WettabilityField& field) {
  for (auto& v : field.theta)
    if (v == v) v = std::clamp(v, 1.0f, 180.0f);
}

std::optional<FieldHistogram> field_histogram(const WettabilityField& field, double bin_width) {
  if (!(bin_width > 0.0)) throw ParameterError("histogram bin width must be > 0");
  FieldHistogram h;
  h.bin_width = bin_width;
  h.counts.assign(static_cast<std::size_t>(std::ceil(180.0 / bin_width - 1e-9)), 0);
  std::size_t water = 0, mid = 0, oil = 0;
  for (float t : field.theta) {
    if (t != t) continue;
    ++h.assigned;
    const auto bin = std::min(h.counts.size() - 1, static_cast<std::size_t>(std::max(0.0, t / bin_width)));
    ++h.counts[bin];
    if (t >= 1.0f && t < 70.0f) ++water;
    else if (t >= 70.0f && t <= 110.0f) ++mid;
    else if (t > 110.0f && t <= 180.0f) ++oil;
  }
  if (h.assigned == 0) return std::nullopt;
  const double n = static_cast<double>(h.assigned);
  h.water_wet = water / n;
  h.intermediate = mid / n;
  h.oil_wet = oil / n;
  return h;
}

MapResult build_wettability_field(const LabeledVolume& vol, std::span<const PathSource> sources,
                                  const MapParams& params) {
  params.validate();
  MapResult r{WettabilityField(vol), {}};
  assign_uninvaded(vol, r.field, params);
  r.objects = assign_invading_objects(vol, r.field, sources, params);
  assign_defending_transition(vol, r.field, sources, params);
  clip_field(r.field);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

std::uint32_t swap_bytes(std::uint32_t w) {
  return (w >> 24) | ((w >> 8) & 0xff00u) | ((w << 8) & 0xff0000u) | (w << 24);
}

void write_sidecar(const std::filesystem::path& raw, const nlohmann::json& header) {
  std::ofstream hs(sidecar_path(raw));
  if (!hs) throw IoError("cannot write sidecar for " + raw.string());
  hs << header.dump(2) << '\n';
}

} // namespace

void write_field(const std::filesystem::path& raw, const WettabilityField& field) {
  std::vector<std::uint32_t> words(field.theta.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::uint32_t w = std::bit_cast<std::uint32_t>(field.theta[i]);
    if constexpr (std::endian::native == std::endian::big) w = swap_bytes(w);
    words[i] = w;
  }
  std::ofstream os(raw, std::ios::binary);
  if (!os) throw IoError("cannot open " + raw.string() + " for writing");
  os.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
  if (!os) throw IoError("failed writing " + raw.string());
  write_sidecar(raw, {{"dims", {field.dims.nx, field.dims.ny, field.dims.nz}},
                      {"dtype", "float32"},
                      {"unassigned", "NaN"},
                      {"units", "degrees"}});
}

WettabilityField read_field(const std::filesystem::path& raw) {
  std::ifstream hs(sidecar_path(raw));
  if (!hs) throw IoError("missing sidecar " + sidecar_path(raw).string());
  nlohmann::json header;
  try {
    hs >> header;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed sidecar " + sidecar_path(raw).string() + ": " + e.what());
  }
  const auto& dj = header.at("dims");
  WettabilityField f;
  f.dims = {dj.at(0).get<int>(), dj.at(1).get<int>(), dj.at(2).get<int>()};
  std::vector<std::uint32_t> words(f.dims.count());
  std::ifstream is(raw, std::ios::binary);
  if (!is) throw IoError("cannot open " + raw.string());
  is.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
  if (is.gcount() != static_cast<std::streamsize>(words.size() * 4))
    throw IoError(raw.string() + " is shorter than its declared dimensions");
  f.theta.resize(words.size());
  f.provenance.assign(words.size(), Provenance::unassigned);
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::uint32_t w = words[i];
    if constexpr (std::endian::native == std::endian::big) w = swap_bytes(w);
    f.theta[i] = std::bit_cast<float>(w);
  }
  return f;
}

void write_provenance(const std::filesystem::path& raw, const WettabilityField& field) {
  std::ofstream os(raw, std::ios::binary);
  if (!os) throw IoError("cannot open " + raw.string() + " for writing");
  os.write(reinterpret_cast<const char*>(field.provenance.data()), static_cast<std::streamsize>(field.provenance.size()));
  if (!os) throw IoError("failed writing " + raw.string());
  write_sidecar(raw, {{"dims", {field.dims.nx, field.dims.ny, field.dims.nz}},
                      {"dtype", "uint8"},
                      {"labels", {{"solid", 0}, {"uninvaded", 1}, {"object", 2}, {"transition", 3}, {"unassigned", 255}}}});
}

void write_histogram_csv(const std::filesystem::path& file, const FieldHistogram& hist) {
  std::ofstream os(file);
  if (!os) throw IoError("cannot open " + file.string() + " for writing");
  os << "bin_lo,bin_hi,count\n";
  char buf[96];
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    const double lo = b * hist.bin_width, hi = std::min(180.0, lo + hist.bin_width);
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%zu\n", lo, hi, hist.counts[b]);
    os << buf;
  }
}

void write_regimes_csv(const std::filesystem::path& file, const FieldHistogram& hist) {
  std::ofstream os(file);
  if (!os) throw IoError("cannot open " + file.string() + " for writing");
  char buf[128];
  os << "regime,lo_deg,hi_deg,fraction\n";
  std::snprintf(buf, sizeof buf, "water_wet,1,70,%.6g\nintermediate,70,110,%.6g\noil_wet,110,180,%.6g\n",
                hist.water_wet, hist.intermediate, hist.oil_wet);
  os << buf;
}

} // namespace porewet
