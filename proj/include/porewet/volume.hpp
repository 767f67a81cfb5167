#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace porewet {

/// Phase labels of a segmented three-phase image.
enum class Phase : std::uint8_t { defending = 0, invading = 1, solid = 2 };

struct Dims {
  int nx = 0, ny = 0, nz = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  bool contains(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
  }
  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(nx) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(z));
  }
  std::array<int, 3> coords(std::size_t idx) const {
    const int x = static_cast<int>(idx % static_cast<std::size_t>(nx));
    idx /= static_cast<std::size_t>(nx);
    const int y = static_cast<int>(idx % static_cast<std::size_t>(ny));
    const int z = static_cast<int>(idx / static_cast<std::size_t>(ny));
    return {x, y, z};
  }
  bool operator==(const Dims&) const = default;
};

/// Dense x-fastest voxel grid of 8-bit values.
///
/// Used both for phase-labelled volumes (values in {0,1,2}) and for binary
/// masks (values in {0,1}).
class Grid8 {
public:
  Grid8() = default;
  Grid8(Dims dims, std::uint8_t fill = 0, double voxel_edge = 1.0);

  const Dims& dims() const { return dims_; }
  double voxel_edge() const { return voxel_edge_; }
  void set_voxel_edge(double edge) { voxel_edge_ = edge; }

  std::uint8_t operator()(int x, int y, int z) const { return data_[dims_.index(x, y, z)]; }
  std::uint8_t& operator()(int x, int y, int z) { return data_[dims_.index(x, y, z)]; }
  std::uint8_t operator[](std::size_t i) const { return data_[i]; }
  std::uint8_t& operator[](std::size_t i) { return data_[i]; }

  /// Value at (x,y,z), or `outside` for coordinates beyond the grid.
  std::uint8_t at_or(int x, int y, int z, std::uint8_t outside) const {
    return dims_.contains(x, y, z) ? data_[dims_.index(x, y, z)] : outside;
  }

  std::size_t size() const { return data_.size(); }
  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  std::size_t count(std::uint8_t value) const;

  bool operator==(const Grid8& o) const { return dims_ == o.dims_ && data_ == o.data_; }

private:
  Dims dims_;
  double voxel_edge_ = 1.0;
  std::vector<std::uint8_t> data_;
};

/// Three-phase label volume: 0 defending fluid, 1 invading fluid, 2 solid.
class LabeledVolume : public Grid8 {
public:
  LabeledVolume() = default;
  explicit LabeledVolume(Dims dims, Phase fill = Phase::defending, double voxel_edge = 1.0);

  Phase phase(int x, int y, int z) const { return static_cast<Phase>((*this)(x, y, z)); }
  /// Throws ParameterError when any voxel carries a label outside {0,1,2}.
  void validate() const;
};

/// Binary voxel mask (values 0/1).
using Mask = Grid8;

enum class Connectivity { six = 6, twentysix = 26 };

/// Connected-component labelling result. Id 0 is background.
struct ComponentMap {
  Dims dims;
  std::vector<std::uint32_t> ids;
  /// sizes[id] = voxel count; sizes[0] is unused and left at 0.
  std::vector<std::size_t> sizes;

  std::size_t component_count() const { return sizes.empty() ? 0 : sizes.size() - 1; }
};

/// Labels connected regions of `label`. Ids ascend with the smallest linear
/// voxel index of each component.
ComponentMap connected_components(const Grid8& vol, std::uint8_t label, Connectivity conn = Connectivity::six);
/// Same as above for an arbitrary voxel predicate held in a mask (value != 0).
ComponentMap connected_components(const Mask& mask, Connectivity conn = Connectivity::six);

/// Dilation by a Chebyshev (cube) structuring element of half-width `radius`.
Mask dilate_mask(const Mask& mask, int radius);

/// Relabels every `label` component smaller than `v_min` voxels to defending fluid.
LabeledVolume remove_small_clusters(const LabeledVolume& vol, Phase label, std::size_t v_min,
                                    Connectivity conn = Connectivity::six);

// ---------------------------------------------------------------------------
// Synthetic phantoms

enum class PhantomKind { flat, grain };

struct PhantomSpec {
  PhantomKind kind = PhantomKind::flat;
  double droplet_radius = 28.0;   ///< R (flat) or r_d (grain), voxels
  double target_angle = 90.0;     ///< degrees, flat kind only
  double grain_radius = 40.0;     ///< r_g, voxels
  double center_separation = 48.0;///< D, voxels
  /// Grid size; zero components are chosen automatically to fit the geometry.
  Dims dims{};
  int margin = 4;
};

/// Geometry of a flat phantom in voxel coordinates.
struct FlatGeometry {
  double plane_z = 0.0;                    ///< analytic solid/fluid plane
  std::array<double, 3> center{};          ///< droplet sphere centre
  double radius = 0.0;
  double contact_radius = 0.0;
};

struct FlatPhantom {
  LabeledVolume volume;
  FlatGeometry geometry;
};

struct GrainGeometry {
  std::array<double, 3> grain_center{};
  std::array<double, 3> droplet_center{};
  double grain_radius = 0.0;
  double droplet_radius = 0.0;
};

struct GrainPhantom {
  LabeledVolume volume;
  GrainGeometry geometry;
  double theta_analytical = 0.0; ///< degrees, through the defending fluid
};

FlatPhantom gen_flat_droplet(const PhantomSpec& spec);
GrainPhantom gen_grain_droplet(const PhantomSpec& spec);

/// Contact angle (degrees) of a droplet sphere on a grain sphere.
double grain_contact_angle(double grain_radius, double droplet_radius, double separation);
/// Centre separation giving the requested grain contact angle.
double grain_separation_for_angle(double grain_radius, double droplet_radius, double theta_deg);

/// Voxelized sphere of `label` centred in a cube with `margin` empty voxels
/// on every side.
LabeledVolume gen_sphere(double radius, Phase label = Phase::solid, int margin = 4);

// ---------------------------------------------------------------------------
// Raw + JSON sidecar I/O

/// Sidecar path for a raw volume file: same stem, `.json` extension.
std::filesystem::path sidecar_path(const std::filesystem::path& raw);

void write_labeled_volume(const std::filesystem::path& raw, const LabeledVolume& vol);
LabeledVolume read_labeled_volume(const std::filesystem::path& raw);
void write_mask(const std::filesystem::path& raw, const Mask& mask);
Mask read_mask(const std::filesystem::path& raw);

} // namespace porewet
