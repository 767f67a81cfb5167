#include <doctest.h>

#include "helpers.hpp"
#include "porewet/angles.hpp"
#include "porewet/error.hpp"
#include "porewet/volume.hpp"

#include <cmath>
#include <numbers>

using namespace porewet;

namespace {

LabeledVolume single_voxel(Dims d, int x, int y, int z, Phase p = Phase::invading) {
  LabeledVolume v(d);
  v(x, y, z) = static_cast<std::uint8_t>(p);
  return v;
}

Mask as_mask(const LabeledVolume& v) {
  Mask m(v.dims());
  for (std::size_t i = 0; i < v.size(); ++i) m[i] = v[i] != 0;
  return m;
}

bool subset(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

// Cube of `side` voxels of label 1 with its low corner at (x, y, z).
void paint_cube(LabeledVolume& v, int x, int y, int z, int side) {
  for (int k = 0; k < side; ++k)
    for (int j = 0; j < side; ++j)
      for (int i = 0; i < side; ++i) v(x + i, y + j, z + k) = 1;
}

} // namespace

TEST_CASE("connected components: empty label yields no components") {
  LabeledVolume v(Dims{5, 5, 5});
  const auto cc = connected_components(v, 1);
  CHECK(cc.component_count() == 0);
}

TEST_CASE("connected components: corner contact depends on connectivity") {
  LabeledVolume v(Dims{4, 4, 4});
  v(1, 1, 1) = 1;
  v(2, 2, 2) = 1;
  CHECK(connected_components(v, 1, Connectivity::six).component_count() == 2);
  CHECK(connected_components(v, 1, Connectivity::twentysix).component_count() == 1);
}

TEST_CASE("connected components: ids ascend with first voxel and sizes match") {
  LabeledVolume v(Dims{10, 4, 4});
  paint_cube(v, 6, 0, 0, 2); // first in linear order: (6,0,0)
  v(0, 3, 3) = 1;            // later in linear order
  const auto cc = connected_components(v, 1);
  REQUIRE(cc.component_count() == 2);
  CHECK(cc.ids[v.dims().index(6, 0, 0)] == 1);
  CHECK(cc.ids[v.dims().index(0, 3, 3)] == 2);
  CHECK(cc.sizes[1] == 8);
  CHECK(cc.sizes[2] == 1);
  // partition: every label-1 voxel has exactly one nonzero id, others have 0
  std::size_t labelled = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK((cc.ids[i] != 0) == (v[i] == 1));
    labelled += cc.ids[i] != 0;
  }
  CHECK(labelled == cc.sizes[1] + cc.sizes[2]);
}

TEST_CASE("dilate_mask: identity, cube and clipped octant") {
  const auto centre = as_mask(single_voxel(Dims{7, 7, 7}, 3, 3, 3));
  CHECK(dilate_mask(centre, 0) == centre);
  CHECK(dilate_mask(centre, 1).count(1) == 27);

  const auto corner = as_mask(single_voxel(Dims{7, 7, 7}, 0, 0, 0));
  CHECK(dilate_mask(corner, 1).count(1) == 8);
  CHECK_THROWS_AS(dilate_mask(corner, -1), ParameterError);
}

TEST_CASE("dilate_mask: monotone in input and radius") {
  LabeledVolume v(Dims{12, 12, 12});
  v(2, 3, 4) = 1;
  v(8, 8, 1) = 1;
  const auto m = as_mask(v);
  const auto d1 = dilate_mask(m, 1), d2 = dilate_mask(m, 2), d3 = dilate_mask(m, 3);
  CHECK(subset(m, d1));
  CHECK(subset(d1, d2));
  CHECK(subset(d2, d3));
}

TEST_CASE("remove_small_clusters") {
  SUBCASE("v_min 0 is identity") {
    LabeledVolume v(Dims{6, 6, 6});
    v(1, 1, 1) = 1;
    CHECK(remove_small_clusters(v, Phase::invading, 0) == v);
  }
  SUBCASE("10-voxel cluster below v_min=11 is relabelled") {
    LabeledVolume v(Dims{12, 4, 4});
    for (int x = 0; x < 10; ++x) v(x, 1, 1) = 1;
    const auto out = remove_small_clusters(v, Phase::invading, 11);
    CHECK(out.count(1) == 0);
    CHECK(out.count(0) == v.size());
  }
  SUBCASE("sizes 5 and 64 with v_min=27 keep only the large cluster") {
    LabeledVolume v(Dims{16, 8, 8});
    paint_cube(v, 1, 1, 1, 4); // 64 voxels
    for (int x = 8; x < 13; ++x) v(x, 6, 6) = 1;
    REQUIRE(connected_components(v, 1).component_count() == 2);
    const auto out = remove_small_clusters(v, Phase::invading, 27);
    const auto cc = connected_components(out, 1);
    REQUIRE(cc.component_count() == 1);
    CHECK(cc.sizes[1] == 64);
    CHECK(remove_small_clusters(out, Phase::invading, 27) == out); // idempotent
  }
  SUBCASE("other labels untouched") {
    LabeledVolume v(Dims{6, 6, 6});
    v(1, 1, 1) = 2;
    v(4, 4, 4) = 1;
    const auto out = remove_small_clusters(v, Phase::invading, 5);
    CHECK(out(1, 1, 1) == 2);
    CHECK(out(4, 4, 4) == 0);
  }
}

TEST_CASE("LabeledVolume validate rejects labels outside {0,1,2}") {
  LabeledVolume v(Dims{3, 3, 3});
  v(1, 1, 1) = 3;
  CHECK_THROWS_AS(v.validate(), ParameterError);
  CHECK_THROWS_AS(LabeledVolume(Dims{0, 3, 3}), DimensionError);
}

TEST_CASE("flat phantom: theta 90 is an exact hemisphere on the plane") {
  PhantomSpec s;
  s.droplet_radius = 28;
  s.target_angle = 90;
  const auto ph = gen_flat_droplet(s);
  CHECK(ph.geometry.center[2] == doctest::Approx(ph.geometry.plane_z).epsilon(1e-12));
  CHECK(ph.geometry.contact_radius == doctest::Approx(28.0));
  const auto& v = ph.volume;
  // every droplet voxel sits above the plane and inside the sphere
  std::size_t n = 0;
  for (int z = 0; z < v.dims().nz; ++z)
    for (int y = 0; y < v.dims().ny; ++y)
      for (int x = 0; x < v.dims().nx; ++x) {
        if (v.phase(x, y, z) != Phase::invading) continue;
        ++n;
        CHECK(z > ph.geometry.plane_z);
      }
  // hemisphere volume within the voxelization bound 3 * area / R
  const double analytic = 2.0 / 3.0 * std::numbers::pi * 28 * 28 * 28;
  const double area = 2 * std::numbers::pi * 28 * 28;
  CHECK(std::abs(n - analytic) / analytic <= 3.0 * area / 28.0 / analytic);
  CHECK(std::abs(n - analytic) / analytic < 0.05);
}

TEST_CASE("flat phantom: analytic normals at the contact circle reproduce the target") {
  for (double theta : {30.0, 150.0}) {
    PhantomSpec s;
    s.droplet_radius = 50;
    s.target_angle = theta;
    const auto ph = gen_flat_droplet(s);
    const auto& g = ph.geometry;
    CHECK(g.center[2] - g.plane_z == doctest::Approx(50 * std::cos(theta * std::numbers::pi / 180)));
    const double h = g.plane_z - g.center[2];
    const double a = std::sqrt(50.0 * 50.0 - h * h);
    for (int k = 0; k < 16; ++k) {
      const double phi = 2 * std::numbers::pi * k / 16;
      const Vec3 n_ff = Vec3(a * std::cos(phi), a * std::sin(phi), h).normalized();
      const Vec3 n_fs(0, 0, -1); // out of the droplet into the solid
      CHECK(*contact_angle(n_fs, n_ff) == doctest::Approx(theta).epsilon(1e-9));
    }
  }
}

TEST_CASE("flat phantom: parameter and dimension errors") {
  PhantomSpec s;
  s.target_angle = 200;
  CHECK_THROWS_AS(gen_flat_droplet(s), ParameterError);
  s.target_angle = 0;
  CHECK_THROWS_AS(gen_flat_droplet(s), ParameterError);
  s.target_angle = 90;
  s.droplet_radius = 3;
  CHECK_THROWS_AS(gen_flat_droplet(s), ParameterError);
  s.droplet_radius = 28;
  s.dims = Dims{30, 30, 40};
  CHECK_THROWS_AS(gen_flat_droplet(s), DimensionError);
}

TEST_CASE("grain contact angle formula") {
  CHECK(grain_contact_angle(40, 20, std::sqrt(40.0 * 40 + 20 * 20)) == doctest::Approx(90.0));
  CHECK(grain_contact_angle(40, 20, 60.0 - 1e-9) == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(grain_contact_angle(40, 20, 48) == doctest::Approx(79.0475).epsilon(1e-4));
  for (double t : {45.0, 79.05, 120.0})
    CHECK(grain_contact_angle(40, 20, grain_separation_for_angle(40, 20, t)) == doctest::Approx(t));
}

TEST_CASE("grain phantom: brute-force normal sampling agrees with the formula") {
  PhantomSpec s;
  s.kind = PhantomKind::grain;
  s.grain_radius = 40;
  s.droplet_radius = 20;
  s.center_separation = 48;
  const auto ph = gen_grain_droplet(s);
  CHECK(ph.theta_analytical == doctest::Approx(79.05).epsilon(1e-3));

  // intersection circle of the two spheres along +z
  const double D = 48, rg = 40, rd = 20;
  const double zi = (D * D + rg * rg - rd * rd) / (2 * D);
  const double a = std::sqrt(rg * rg - zi * zi);
  const Vec3 cg(0, 0, 0), cd(0, 0, D);
  double sum = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const double phi = 2 * std::numbers::pi * k / n;
    const Vec3 p(a * std::cos(phi), a * std::sin(phi), zi);
    const Vec3 n_fs = (cg - p).normalized(); // out of the droplet into the grain
    const Vec3 n_ff = (p - cd).normalized(); // out of the droplet
    sum += *contact_angle(n_fs, n_ff);
  }
  CHECK(sum / n == doctest::Approx(ph.theta_analytical).epsilon(1e-9));

  // solid wins over droplet in the overlap
  const auto& v = ph.volume;
  const auto& g = ph.geometry;
  CHECK(v.phase(int(g.grain_center[0]), int(g.grain_center[1]), int(std::round(g.grain_center[2]))) == Phase::solid);
  CHECK(v.phase(int(g.droplet_center[0]), int(g.droplet_center[1]), int(std::round(g.droplet_center[2]))) ==
        Phase::invading);
}

TEST_CASE("grain phantom rejects non-intersecting or nested spheres") {
  PhantomSpec s;
  s.kind = PhantomKind::grain;
  s.grain_radius = 40;
  s.droplet_radius = 20;
  s.center_separation = 61;
  CHECK_THROWS_AS(gen_grain_droplet(s), ParameterError);
  s.center_separation = 19;
  CHECK_THROWS_AS(gen_grain_droplet(s), ParameterError);
}

TEST_CASE("volume raw and sidecar round trip") {
  const auto dir = testing_util::scratch_dir("volume_io");
  PhantomSpec s;
  s.droplet_radius = 6;
  s.target_angle = 60;
  const auto vol = gen_flat_droplet(s).volume;
  write_labeled_volume(dir / "v.raw", vol);
  CHECK(std::filesystem::exists(dir / "v.json"));
  CHECK(std::filesystem::file_size(dir / "v.raw") == vol.size());
  CHECK(read_labeled_volume(dir / "v.raw") == vol);

  const auto sidecar = testing_util::slurp(dir / "v.json");
  CHECK(sidecar.find("\"dims\"") != std::string::npos);
  CHECK(sidecar.find("\"invading\"") != std::string::npos);

  CHECK_THROWS_AS(read_labeled_volume(dir / "missing.raw"), IoError);
}
