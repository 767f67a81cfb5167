#include <doctest.h>

#include "helpers.hpp"
#include "porewet/error.hpp"
#include "porewet/wetmap.hpp"

#include <cmath>
#include <random>

using namespace porewet;

namespace {

PathSource source(int id, double mean, int count, std::vector<Vec3> nodes) {
  return {id, mean, count, std::move(nodes)};
}

std::size_t idx(const LabeledVolume& v, int x, int y, int z) { return v.dims().index(x, y, z); }

WettabilityField uniform_field(std::size_t n, const std::vector<float>& values) {
  WettabilityField f;
  f.dims = Dims{static_cast<int>(n), 1, 1};
  f.theta.assign(n, WettabilityField::unassigned);
  f.provenance.assign(n, Provenance::unassigned);
  for (std::size_t i = 0; i < n && i < values.size(); ++i) {
    f.theta[i] = values[i];
    f.provenance[i] = Provenance::transition;
  }
  return f;
}

// Two pore regions split by a solid wall at x = 10: the left one holds only
// defending fluid, the right one contains an invading blob.
LabeledVolume cavity_fixture() {
  LabeledVolume v(Dims{20, 8, 8}, Phase::solid);
  for (int z = 1; z < 7; ++z)
    for (int y = 1; y < 7; ++y)
      for (int x = 1; x < 19; ++x)
        if (x != 10) v(x, y, z) = 0;
  for (int z = 3; z < 5; ++z)
    for (int y = 3; y < 5; ++y)
      for (int x = 13; x < 16; ++x) v(x, y, z) = 1;
  return v;
}

} // namespace

TEST_CASE("field starts with solid marked and everything else unassigned") {
  LabeledVolume v(Dims{4, 4, 4});
  v(0, 0, 0) = 2;
  const WettabilityField f(v);
  CHECK(f.provenance[0] == Provenance::solid);
  CHECK_FALSE(f.assigned(0));
  CHECK(f.count(Provenance::unassigned) == 63);
}

TEST_CASE("uninvaded: sealed cavity gets 30 deg, invaded region untouched") {
  const auto v = cavity_fixture();
  WettabilityField f(v);
  assign_uninvaded(v, f, MapParams{});
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto c = v.dims().coords(i);
    if (v[i] == 2) {
      CHECK(f.provenance[i] == Provenance::solid);
    } else if (c[0] < 10) {
      CHECK(f.theta[i] == 30.0f);
      CHECK(f.provenance[i] == Provenance::uninvaded);
    } else {
      CHECK_FALSE(f.assigned(i));
    }
  }
}

TEST_CASE("uninvaded: no invading fluid means the whole pore space is 30 deg") {
  LabeledVolume v(Dims{6, 6, 6});
  v(0, 0, 0) = 2;
  WettabilityField f(v);
  assign_uninvaded(v, f, MapParams{});
  CHECK(f.count(Provenance::uninvaded) == v.size() - 1);
}

TEST_CASE("uninvaded: one invading voxel blocks the whole component") {
  LabeledVolume v(Dims{6, 6, 6});
  v(5, 5, 5) = 1;
  WettabilityField f(v);
  assign_uninvaded(v, f, MapParams{});
  CHECK(f.count(Provenance::uninvaded) == 0);
}

TEST_CASE("idw mean arithmetic") {
  const std::vector<IdwTerm> one{{64.7, 10, 3.0}};
  CHECK(*idw_mean(one, 2.0) == doctest::Approx(64.7).epsilon(1e-12));
  const std::vector<IdwTerm> even{{40, 100, 2.0}, {80, 100, 2.0}};
  CHECK(std::abs(*idw_mean(even, 2.0) - 60.0) < 1e-6);
  const std::vector<IdwTerm> weighted{{40, 300, 2.0}, {80, 100, 2.0}};
  CHECK(std::abs(*idw_mean(weighted, 2.0) - 50.0) < 1e-6);
  const std::vector<IdwTerm> spread{{40, 100, 2.0}, {80, 100, 4.0}};
  CHECK(std::abs(*idw_mean(spread, 2.0) - 48.0) < 1e-6);
  // distance floor of one voxel
  const std::vector<IdwTerm> close{{40, 1, 0.0}, {80, 1, 1.0}};
  CHECK(*idw_mean(close, 2.0) == doctest::Approx(60.0));
  CHECK_FALSE(idw_mean(std::vector<IdwTerm>{}, 2.0).has_value());
  CHECK_FALSE(idw_mean(std::vector<IdwTerm>{{40, 0, 1.0}}, 2.0).has_value());
}

TEST_CASE("idw mean: bounds and count monotonicity") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> mean(1, 180), dist(0.5, 20);
  std::uniform_int_distribution<int> count(1, 500);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<IdwTerm> t;
    for (int k = 0; k < 4; ++k) t.push_back({mean(rng), count(rng), dist(rng)});
    const double v = *idw_mean(t, 2.0);
    double lo = 180, hi = 0;
    for (const auto& x : t) lo = std::min(lo, x.mean), hi = std::max(hi, x.mean);
    CHECK(v >= lo - 1e-9);
    CHECK(v <= hi + 1e-9);
    auto more = t;
    more[0].count += 100;
    const double w = *idw_mean(more, 2.0);
    CHECK(std::abs(w - t[0].mean) < std::abs(v - t[0].mean));
  }
}

TEST_CASE("objects: single touching path gives its mean") {
  LabeledVolume v(Dims{12, 12, 12});
  v(6, 6, 6) = 1;
  v(6, 6, 7) = 1;
  const std::vector<PathSource> src{source(0, 64.7, 40, {Vec3(6, 8, 6)})};
  WettabilityField f(v);
  const auto reps = assign_invading_objects(v, f, src, MapParams{});
  REQUIRE(reps.size() == 1);
  CHECK(reps[0].path_ids == std::vector<int>{0});
  CHECK(*reps[0].angle == doctest::Approx(64.7).epsilon(1e-12));
  CHECK(f.theta[idx(v, 6, 6, 6)] == doctest::Approx(64.7).epsilon(1e-6));
  CHECK(f.theta[idx(v, 6, 6, 7)] == doctest::Approx(64.7).epsilon(1e-6));
  CHECK(f.count(Provenance::object) == 2);
}

TEST_CASE("objects: two equidistant paths") {
  LabeledVolume v(Dims{12, 12, 12});
  v(6, 6, 6) = 1;
  const auto run = [&](int ca, int cb) {
    const std::vector<PathSource> src{source(0, 40, ca, {Vec3(4, 6, 6)}), source(1, 80, cb, {Vec3(8, 6, 6)})};
    WettabilityField f(v);
    const auto reps = assign_invading_objects(v, f, src, MapParams{});
    REQUIRE(reps.size() == 1);
    CHECK(reps[0].path_ids.size() == 2);
    return std::pair{*reps[0].angle, f.theta[idx(v, 6, 6, 6)]};
  };
  const auto [a, fa] = run(100, 100);
  CHECK(std::abs(a - 60.0) < 1e-6);
  CHECK(fa == 60.0f);
  const auto [b, fb] = run(300, 100);
  CHECK(std::abs(b - 50.0) < 1e-6);
  CHECK(fb == 50.0f);
}

TEST_CASE("objects: paths outside the dilation are not associated") {
  LabeledVolume v(Dims{16, 16, 16});
  v(4, 4, 4) = 1;
  const std::vector<PathSource> src{source(0, 40, 10, {Vec3(7, 4, 4)}), source(1, 120, 10, {Vec3(8, 4, 4)})};
  WettabilityField f(v);
  const auto reps = assign_invading_objects(v, f, src, MapParams{});
  CHECK(reps[0].path_ids == std::vector<int>{0});
  CHECK(*reps[0].angle == doctest::Approx(40.0));
}

TEST_CASE("objects: an orphan falls back to the per-voxel rule") {
  LabeledVolume v(Dims{50, 8, 8});
  v(2, 4, 4) = 1;  // orphan, a path node 10 voxels away
  v(40, 4, 4) = 1; // orphan, 28 voxels from the node
  const std::vector<PathSource> src{source(0, 70, 10, {Vec3(12, 4, 4)})};
  WettabilityField f(v);
  const auto reps = assign_invading_objects(v, f, src, MapParams{});
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].orphan);
  CHECK(reps[1].orphan);
  CHECK(f.theta[idx(v, 2, 4, 4)] == 70.0f);
  CHECK(f.provenance[idx(v, 2, 4, 4)] == Provenance::transition);
  CHECK_FALSE(f.assigned(idx(v, 40, 4, 4)));
}

TEST_CASE("transition: distance cutoff and IDW values") {
  LabeledVolume v(Dims{50, 5, 5});
  SUBCASE("single path") {
    const std::vector<PathSource> src{source(0, 45, 10, {Vec3(2, 2, 2)})};
    WettabilityField f(v);
    assign_defending_transition(v, f, src, MapParams{});
    CHECK(f.theta[idx(v, 3, 2, 2)] == 45.0f);
    CHECK(f.provenance[idx(v, 3, 2, 2)] == Provenance::transition);
    CHECK(f.assigned(idx(v, 22, 2, 2)));       // distance 20
    CHECK_FALSE(f.assigned(idx(v, 23, 2, 2))); // distance 21
  }
  SUBCASE("two paths at distances 2 and 4") {
    const std::vector<PathSource> src{source(0, 40, 100, {Vec3(10, 2, 2)}), source(1, 80, 100, {Vec3(16, 2, 2)})};
    WettabilityField f(v);
    assign_defending_transition(v, f, src, MapParams{});
    CHECK(std::abs(f.theta[idx(v, 12, 2, 2)] - 48.0) < 1e-6);
  }
  SUBCASE("stage order: assigned voxels are never overwritten") {
    const std::vector<PathSource> src{source(0, 45, 10, {Vec3(2, 2, 2)})};
    WettabilityField f(v);
    f.theta[idx(v, 3, 2, 2)] = 30.0f;
    f.provenance[idx(v, 3, 2, 2)] = Provenance::uninvaded;
    assign_defending_transition(v, f, src, MapParams{});
    CHECK(f.theta[idx(v, 3, 2, 2)] == 30.0f);
    CHECK(f.provenance[idx(v, 3, 2, 2)] == Provenance::uninvaded);
  }
}

TEST_CASE("clip field") {
  auto f = uniform_field(4, {0.4f, 185.0f, 64.7f});
  clip_field(f);
  CHECK(f.theta[0] == 1.0f);
  CHECK(f.theta[1] == 180.0f);
  CHECK(f.theta[2] == 64.7f);
  CHECK(std::isnan(f.theta[3]));
}

TEST_CASE("histogram regimes") {
  SUBCASE("all 30 deg") {
    const auto h = field_histogram(uniform_field(10, std::vector<float>(10, 30.0f)));
    REQUIRE(h);
    CHECK(h->water_wet == 1.0);
    CHECK(h->assigned == 10);
  }
  SUBCASE("half 30, half 90") {
    std::vector<float> vals(10, 30.0f);
    std::fill(vals.begin() + 5, vals.end(), 90.0f);
    const auto h = field_histogram(uniform_field(10, vals));
    REQUIRE(h);
    CHECK(h->water_wet == 0.5);
    CHECK(h->intermediate == 0.5);
    CHECK(h->oil_wet == 0.0);
  }
  SUBCASE("60/40 draws from two bands") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<float> lo(40, 60), hi(75, 105);
    std::uniform_real_distribution<double> pick(0, 1);
    std::vector<float> vals(20000);
    for (auto& x : vals) x = pick(rng) < 0.6 ? lo(rng) : hi(rng);
    const auto h = field_histogram(uniform_field(vals.size(), vals));
    REQUIRE(h);
    CHECK(std::abs(h->water_wet - 0.6) < 0.01);
    CHECK(std::abs(h->intermediate - 0.4) < 0.01);
  }
  SUBCASE("boundaries: 70 and 110 are intermediate, 180 lands in the last bin") {
    const auto h = field_histogram(uniform_field(3, {70.0f, 110.0f, 180.0f}));
    REQUIRE(h);
    CHECK(h->intermediate == doctest::Approx(2.0 / 3.0));
    CHECK(h->oil_wet == doctest::Approx(1.0 / 3.0));
    CHECK(h->counts.back() == 1);
  }
  SUBCASE("empty field") { CHECK_FALSE(field_histogram(uniform_field(3, {})).has_value()); }
}

TEST_CASE("full map on a fixture: partition, range and cavity value") {
  auto v = cavity_fixture();
  const std::vector<PathSource> src{source(0, 55, 30, {Vec3(12, 3, 3), Vec3(12, 4, 3)}),
                                    source(1, 95, 10, {Vec3(16, 4, 4)})};
  const auto r = build_wettability_field(v, src, MapParams{});
  const auto& f = r.field;
  std::size_t pore = 0, counted = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 2) {
      CHECK(f.provenance[i] == Provenance::solid);
      CHECK_FALSE(f.assigned(i));
      continue;
    }
    ++pore;
    if (f.assigned(i)) {
      CHECK(f.theta[i] >= 1.0f);
      CHECK(f.theta[i] <= 180.0f);
    }
    if (f.provenance[i] == Provenance::uninvaded) CHECK(f.theta[i] == 30.0f);
  }
  for (auto p : {Provenance::uninvaded, Provenance::object, Provenance::transition, Provenance::unassigned})
    counted += f.count(p);
  CHECK(counted == pore);
  CHECK(f.count(Provenance::uninvaded) > 0);
  CHECK(f.count(Provenance::object) == 12);
  REQUIRE(r.objects.size() == 1);
  CHECK(*r.objects[0].angle > 55.0);
  CHECK(*r.objects[0].angle < 95.0);
}

TEST_CASE("path sources pair summaries with measured nodes") {
  std::vector<PathSummary> sums{{2, PathKind::loop, {50, 50, 1, 3}}, {0, PathKind::line, {40, 40, 1, 2}}};
  std::vector<AngleMeasurement> ms(4);
  ms[0].path_id = 0;
  ms[1].path_id = 2;
  ms[2].path_id = 2;
  ms[3].path_id = 5; // no summary
  const auto s = path_sources(sums, ms);
  REQUIRE(s.size() == 2);
  CHECK(s[0].path_id == 0);
  CHECK(s[0].nodes.size() == 1);
  CHECK(s[1].path_id == 2);
  CHECK(s[1].nodes.size() == 2);
  CHECK(s[1].count == 3);
}

TEST_CASE("map parameters are validated") {
  MapParams p;
  CHECK_NOTHROW(p.validate());
  p.uninvaded_angle = 0.5;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = {};
  p.max_distance = 0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
}

TEST_CASE("field, provenance and report files") {
  const auto dir = testing_util::scratch_dir("wetmap_io");
  const auto r = build_wettability_field(cavity_fixture(), {}, MapParams{});
  write_field(dir / "theta.raw", r.field);
  CHECK(std::filesystem::file_size(dir / "theta.raw") == 4 * r.field.theta.size());
  const auto back = read_field(dir / "theta.raw");
  REQUIRE(back.dims == r.field.dims);
  for (std::size_t i = 0; i < back.theta.size(); ++i)
    CHECK((back.theta[i] == r.field.theta[i] || (std::isnan(back.theta[i]) && std::isnan(r.field.theta[i]))));
  CHECK(testing_util::slurp(dir / "theta.json").find("\"NaN\"") != std::string::npos);

  write_provenance(dir / "prov.raw", r.field);
  CHECK(std::filesystem::file_size(dir / "prov.raw") == r.field.theta.size());

  const auto h = field_histogram(r.field);
  REQUIRE(h);
  write_histogram_csv(dir / "h.csv", *h);
  write_regimes_csv(dir / "g.csv", *h);
  CHECK(testing_util::slurp(dir / "h.csv").rfind("bin_lo,bin_hi,count\n", 0) == 0);
  CHECK(testing_util::slurp(dir / "g.csv").find("water_wet") != std::string::npos);
}
