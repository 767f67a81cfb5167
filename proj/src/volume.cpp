#include "porewet/volume.hpp"

#include "porewet/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

namespace porewet {

namespace {

constexpr int kOffsets6[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

template <class Pred>
ComponentMap label_components(const Dims& dims, Pred&& in_set, Connectivity conn) {
  ComponentMap out;
  out.dims = dims;
  out.ids.assign(dims.count(), 0);
  out.sizes.assign(1, 0);

  std::vector<std::array<int, 3>> offsets;
  if (conn == Connectivity::six) {
    for (const auto& o : kOffsets6) offsets.push_back({o[0], o[1], o[2]});
  } else {
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (dx || dy || dz) offsets.push_back({dx, dy, dz});
  }

  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < dims.count(); ++seed) {
    if (out.ids[seed] != 0 || !in_set(seed)) continue;
    const auto id = static_cast<std::uint32_t>(out.sizes.size());
    out.sizes.push_back(0);
    out.ids[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      ++out.sizes[id];
      const auto [x, y, z] = dims.coords(cur);
      for (const auto& o : offsets) {
        const int nx = x + o[0], ny = y + o[1], nz = z + o[2];
        if (!dims.contains(nx, ny, nz)) continue;
        const std::size_t n = dims.index(nx, ny, nz);
        if (out.ids[n] == 0 && in_set(n)) {
          out.ids[n] = id;
          stack.push_back(n);
        }
      }
    }
  }
  return out;
}

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

double sq(double v) { return v * v; }

} // namespace

Grid8::Grid8(Dims dims, std::uint8_t fill, double voxel_edge) : dims_(dims), voxel_edge_(voxel_edge) {
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1)
    throw DimensionError("volume dimensions must be >= 1");
  data_.assign(dims.count(), fill);
}

std::size_t Grid8::count(std::uint8_t value) const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), value));
}

LabeledVolume::LabeledVolume(Dims dims, Phase fill, double voxel_edge)
    : Grid8(dims, static_cast<std::uint8_t>(fill), voxel_edge) {}

void LabeledVolume::validate() const {
  for (std::size_t i = 0; i < size(); ++i)
    if ((*this)[i] > 2) throw ParameterError("voxel label " + std::to_string((*this)[i]) + " outside {0,1,2}");
}

ComponentMap connected_components(const Grid8& vol, std::uint8_t label, Connectivity conn) {
  return label_components(vol.dims(), [&](std::size_t i) { return vol[i] == label; }, conn);
}

ComponentMap connected_components(const Mask& mask, Connectivity conn) {
  return label_components(mask.dims(), [&](std::size_t i) { return mask[i] != 0; }, conn);
}

Mask dilate_mask(const Mask& mask, int radius) {
  if (radius < 0) throw ParameterError("dilation radius must be >= 0");
  Mask out = mask;
  if (radius == 0) return out;
  const Dims& d = mask.dims();
  // Separable running max along each axis.
  for (int axis = 0; axis < 3; ++axis) {
    Mask src = out;
    const int len = axis == 0 ? d.nx : axis == 1 ? d.ny : d.nz;
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) {
          if (src(x, y, z) == 0) continue;
          const int c = axis == 0 ? x : axis == 1 ? y : z;
          const int lo = std::max(0, c - radius), hi = std::min(len - 1, c + radius);
          for (int k = lo; k <= hi; ++k) {
            if (axis == 0) out(k, y, z) = 1;
            else if (axis == 1) out(x, k, z) = 1;
            else out(x, y, k) = 1;
          }
        }
  }
  return out;
}

LabeledVolume remove_small_clusters(const LabeledVolume& vol, Phase label, std::size_t v_min, Connectivity conn) {
  LabeledVolume out = vol;
  if (v_min == 0) return out;
  const auto cc = connected_components(vol, static_cast<std::uint8_t>(label), conn);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto id = cc.ids[i];
    if (id != 0 && cc.sizes[id] < v_min) out[i] = static_cast<std::uint8_t>(Phase::defending);
  }
  return out;
}

// ---------------------------------------------------------------------------

FlatPhantom gen_flat_droplet(const PhantomSpec& spec) {
  if (spec.kind != PhantomKind::flat) throw ParameterError("flat phantom requires kind = flat");
  const double theta = spec.target_angle;
  if (!(theta > 0.0 && theta < 180.0)) throw ParameterError("target angle must lie in (0, 180) degrees");
  const double R = spec.droplet_radius;
  if (!(R >= 4.0)) throw ParameterError("droplet radius must be >= 4 voxels");
  const int margin = std::max(spec.margin, 3);

  const double zc = R * std::cos(deg2rad(theta)); // centre height above the plane
  const double half_width = zc >= 0.0 ? R : R * std::sin(deg2rad(theta));
  const int solid_layers = margin + 1;

  Dims dims = spec.dims;
  const int auto_xy = 2 * static_cast<int>(std::ceil(half_width)) + 2 * margin + 1;
  if (dims.nx == 0) dims.nx = auto_xy;
  if (dims.ny == 0) dims.ny = auto_xy;
  const double plane_z = solid_layers - 0.5;
  const double top = plane_z + zc + R;
  if (dims.nz == 0) dims.nz = static_cast<int>(std::ceil(top)) + margin + 1;

  FlatGeometry g;
  g.plane_z = plane_z;
  g.center = {0.5 * (dims.nx - 1), 0.5 * (dims.ny - 1), plane_z + zc};
  g.radius = R;
  g.contact_radius = R * std::sin(deg2rad(theta));

  const double need = 3.0;
  if (g.center[0] - half_width < need || g.center[0] + half_width > dims.nx - 1 - need ||
      g.center[1] - half_width < need || g.center[1] + half_width > dims.ny - 1 - need || top > dims.nz - 1 - need)
    throw DimensionError("droplet does not fit inside the grid with a 3-voxel margin");

  FlatPhantom out{LabeledVolume(dims), g};
  auto& vol = out.volume;
  const double r2 = R * R;
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        if (z < solid_layers) {
          vol(x, y, z) = static_cast<std::uint8_t>(Phase::solid);
          continue;
        }
        const double d2 = sq(x - g.center[0]) + sq(y - g.center[1]) + sq(z - g.center[2]);
        if (d2 <= r2) vol(x, y, z) = static_cast<std::uint8_t>(Phase::invading);
      }
  return out;
}

double grain_contact_angle(double rg, double rd, double sep) {
  const double c = (sep * sep - rg * rg - rd * rd) / (2.0 * rg * rd);
  return rad2deg(std::acos(std::clamp(c, -1.0, 1.0)));
}

double grain_separation_for_angle(double rg, double rd, double theta_deg) {
  return std::sqrt(rg * rg + rd * rd + 2.0 * rg * rd * std::cos(deg2rad(theta_deg)));
}

LabeledVolume gen_sphere(double radius, Phase label, int margin) {
  if (!(radius > 0.0)) throw ParameterError("sphere radius must be positive");
  if (margin < 1) throw ParameterError("sphere margin must be >= 1");
  const int n = 2 * static_cast<int>(std::ceil(radius)) + 2 * margin + 1;
  LabeledVolume vol(Dims{n, n, n});
  const double c = 0.5 * (n - 1), r2 = radius * radius;
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        if (sq(x - c) + sq(y - c) + sq(z - c) <= r2) vol(x, y, z) = static_cast<std::uint8_t>(label);
  return vol;
}

GrainPhantom gen_grain_droplet(const PhantomSpec& spec) {
  if (spec.kind != PhantomKind::grain) throw ParameterError("grain phantom requires kind = grain");
  const double rg = spec.grain_radius, rd = spec.droplet_radius, D = spec.center_separation;
  if (!(rg > 0.0 && rd > 0.0)) throw ParameterError("sphere radii must be positive");
  if (!(D > std::abs(rg - rd) && D < rg + rd))
    throw ParameterError("grain and droplet spheres must intersect without nesting");
  const int margin = std::max(spec.margin, 3);

  const double half_xy = std::max(rg, rd);
  Dims dims = spec.dims;
  if (dims.nx == 0) dims.nx = 2 * static_cast<int>(std::ceil(half_xy)) + 2 * margin + 1;
  if (dims.ny == 0) dims.ny = dims.nx;
  const double z_lo = std::min(-rg, D - rd), z_hi = std::max(rg, D + rd);
  if (dims.nz == 0) dims.nz = static_cast<int>(std::ceil(z_hi - z_lo)) + 2 * margin + 1;

  GrainGeometry g;
  g.grain_radius = rg;
  g.droplet_radius = rd;
  const double cx = 0.5 * (dims.nx - 1), cy = 0.5 * (dims.ny - 1);
  const double zg = margin - z_lo;
  g.grain_center = {cx, cy, zg};
  g.droplet_center = {cx, cy, zg + D};

  const double need = 3.0;
  if (cx - half_xy < need || cx + half_xy > dims.nx - 1 - need || cy - half_xy < need ||
      cy + half_xy > dims.ny - 1 - need || zg + z_lo < need || zg + z_hi > dims.nz - 1 - need)
    throw DimensionError("grain and droplet do not fit inside the grid with a 3-voxel margin");

  GrainPhantom out{LabeledVolume(dims), g, grain_contact_angle(rg, rd, D)};
  auto& vol = out.volume;
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        const double dg = sq(x - g.grain_center[0]) + sq(y - g.grain_center[1]) + sq(z - g.grain_center[2]);
        const double dd = sq(x - g.droplet_center[0]) + sq(y - g.droplet_center[1]) + sq(z - g.droplet_center[2]);
        if (dg <= rg * rg) vol(x, y, z) = static_cast<std::uint8_t>(Phase::solid);
        else if (dd <= rd * rd) vol(x, y, z) = static_cast<std::uint8_t>(Phase::invading);
      }
  return out;
}

// ---------------------------------------------------------------------------

std::filesystem::path sidecar_path(const std::filesystem::path& raw) {
  auto p = raw;
  p.replace_extension(".json");
  return p;
}

namespace {

void write_grid(const std::filesystem::path& raw, const Grid8& g, const nlohmann::json& labels) {
  std::ofstream os(raw, std::ios::binary);
  if (!os) throw IoError("cannot open " + raw.string() + " for writing");
  os.write(reinterpret_cast<const char*>(g.data().data()), static_cast<std::streamsize>(g.size()));
  if (!os) throw IoError("failed writing " + raw.string());

  nlohmann::json header;
  header["dims"] = {g.dims().nx, g.dims().ny, g.dims().nz};
  header["voxel_edge"] = g.voxel_edge();
  header["labels"] = labels;
  std::ofstream hs(sidecar_path(raw));
  if (!hs) throw IoError("cannot write sidecar for " + raw.string());
  hs << header.dump(2) << '\n';
}

Grid8 read_grid(const std::filesystem::path& raw) {
  std::ifstream hs(sidecar_path(raw));
  if (!hs) throw IoError("missing sidecar " + sidecar_path(raw).string());
  nlohmann::json header;
  try {
    hs >> header;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed sidecar " + sidecar_path(raw).string() + ": " + e.what());
  }
  const auto& d = header.at("dims");
  Dims dims{d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
  Grid8 g(dims, 0, header.value("voxel_edge", 1.0));

  std::ifstream is(raw, std::ios::binary);
  if (!is) throw IoError("cannot open " + raw.string());
  is.read(reinterpret_cast<char*>(g.data().data()), static_cast<std::streamsize>(g.size()));
  if (is.gcount() != static_cast<std::streamsize>(g.size()))
    throw IoError(raw.string() + " is shorter than its declared dimensions");
  return g;
}

} // namespace

void write_labeled_volume(const std::filesystem::path& raw, const LabeledVolume& vol) {
  write_grid(raw, vol, {{"defending", 0}, {"invading", 1}, {"solid", 2}});
}

LabeledVolume read_labeled_volume(const std::filesystem::path& raw) {
  Grid8 g = read_grid(raw);
  LabeledVolume vol(g.dims(), Phase::defending, g.voxel_edge());
  std::copy(g.data().begin(), g.data().end(), vol.data().begin());
  vol.validate();
  return vol;
}

void write_mask(const std::filesystem::path& raw, const Mask& mask) {
  write_grid(raw, mask, {{"background", 0}, {"foreground", 1}});
}

Mask read_mask(const std::filesystem::path& raw) { return read_grid(raw); }

} // namespace porewet
