#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "tdlab/transforms.hpp"

using namespace tdlab;

namespace {

const std::vector<Bounds> kMcBounds = {{-1.2, 0.6}, {-0.07, 0.07}};

StateVector random_mc_state(Rng& rng) {
  return {rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07)};
}

}  // namespace

TEST_CASE("feature vector construction rules") {
  auto f = FeatureVector::make_sparse({1, 4, 9}, 10);
  CHECK(f.is_sparse);
  CHECK(f.length == 10);
  const auto dense = f.to_dense();
  CHECK(dense[1] == 1.0);
  CHECK(dense[4] == 1.0);
  CHECK(dense[9] == 1.0);
  CHECK(dense[0] == 0.0);

  CHECK_THROWS_AS(FeatureVector::make_sparse({4, 1}, 10), std::invalid_argument);
  CHECK_THROWS_AS(FeatureVector::make_sparse({1, 1}, 10), std::invalid_argument);
  CHECK_THROWS_AS(FeatureVector::make_sparse({10}, 10), std::invalid_argument);
  CHECK_THROWS_AS(FeatureVector::make_sparse({-1}, 10), std::invalid_argument);

  auto d = FeatureVector::make_dense({0.5, -0.5});
  CHECK_FALSE(d.is_sparse);
  CHECK(d.length == 2);
  CHECK(d.to_dense() == std::vector<double>{0.5, -0.5});
}

TEST_CASE("normalizer maps bounds to [-1, 1] and counts clamps") {
  Normalizer n(kMcBounds);
  auto mid = n.apply({-0.3, 0.0});
  CHECK(mid[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(mid[1] == 0.0);
  auto lo = n.apply({-1.2, -0.07});
  CHECK(lo[0] == -1.0);
  CHECK(lo[1] == -1.0);
  auto hi = n.apply({0.6, 0.07});
  CHECK(hi[0] == 1.0);
  CHECK(hi[1] == 1.0);
  CHECK(n.clamp_events() == 0);
  auto out = n.apply({0.7, 0.0});
  CHECK(out[0] == 1.0);
  CHECK(n.clamp_events() == 1);
  CHECK_THROWS_AS(n.apply({0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Normalizer({{1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("tile coding joint mode exact sparsity over random states") {
  TileCodingConfig cfg;
  cfg.mode = TileCodingConfig::Mode::joint;
  cfg.num_tilings = 5;
  cfg.tiles_per_dim = {4, 4};
  cfg.input_bounds = kMcBounds;
  TileCodingTransform tc(cfg);
  CHECK(tc.output_dim() == 80);
  Rng rng(17);
  for (int i = 0; i < 10000; ++i) {
    const auto f = tc.apply(random_mc_state(rng));
    REQUIRE(f.is_sparse);
    REQUIRE(f.length == 80);
    REQUIRE(f.active.size() == 5);
    // one tile per tiling, inside that tiling's index block
    for (int k = 0; k < 5; ++k) {
      CHECK(f.active[k] >= k * 16);
      CHECK(f.active[k] < (k + 1) * 16);
    }
  }
  CHECK(tc.hash_collisions() == 0);
}

TEST_CASE("tile coding separate mode exact sparsity") {
  TileCodingConfig cfg;
  cfg.mode = TileCodingConfig::Mode::separate;
  cfg.num_tilings = 5;
  cfg.tiles_per_dim = {4, 4};
  cfg.input_bounds = kMcBounds;
  TileCodingTransform tc(cfg);
  CHECK(tc.output_dim() == 40);
  Rng rng(18);
  for (int i = 0; i < 10000; ++i) {
    const auto f = tc.apply(random_mc_state(rng));
    REQUIRE(f.active.size() == 10);  // dims * num_tilings
    int first_dim = 0;
    for (auto idx : f.active) first_dim += idx < 20;
    CHECK(first_dim == 5);
  }
}

TEST_CASE("tile coding known cell for a single centered tiling") {
  TileCodingConfig cfg;
  cfg.num_tilings = 1;
  cfg.tiles_per_dim = {4, 4};
  cfg.offsets = {{0.0, 0.0}};
  cfg.input_bounds = {{0.0, 1.0}, {0.0, 1.0}};
  TileCodingTransform tc(cfg);
  // unit (0.5, 0.5) -> cell (2, 2) -> flat 2*4+2
  const auto f = tc.apply({0.5, 0.5});
  REQUIRE(f.active.size() == 1);
  CHECK(f.active[0] == 10);
  // top corner clamps into the last tile
  const auto g = tc.apply({1.0, 1.0});
  CHECK(g.active[0] == 15);
  const auto h = tc.apply({0.0, 0.0});
  CHECK(h.active[0] == 0);
}

TEST_CASE("default displacement shifts tiling k by k over num_tilings") {
  TileCodingConfig cfg;
  cfg.num_tilings = 5;
  cfg.tiles_per_dim = {4};
  cfg.input_bounds = {{0.0, 1.0}};
  TileCodingTransform tc(cfg);
  // unit u = 0.5: cell_k = floor(0.5*4 + k/5) = floor(2 + 0.2k) = 2 for all k
  auto f = tc.apply({0.5});
  for (int k = 0; k < 5; ++k) CHECK(f.active[k] - 4 * k == 2);
  // unit u = 0.2: cell_k = floor(0.8 + 0.2k): k<1 -> 0, k>=1 -> 1
  f = tc.apply({0.2});
  CHECK(f.active[0] == 0);
  for (int k = 1; k < 5; ++k) CHECK(f.active[k] - 4 * k == 1);
}

TEST_CASE("explicit offsets are honored") {
  TileCodingConfig cfg;
  cfg.num_tilings = 2;
  cfg.tiles_per_dim = {4};
  cfg.offsets = {{0.0}, {0.5}};
  cfg.input_bounds = {{0.0, 1.0}};
  TileCodingTransform tc(cfg);
  const auto f = tc.apply({0.4});
  // floor(1.6 + 0) = 1, floor(1.6 + 0.5) = 2
  CHECK(f.active[0] == 1);
  CHECK(f.active[1] == 4 + 2);
}

TEST_CASE("tile coding hashed index table assigns first-come indices") {
  TileCodingConfig cfg;
  cfg.num_tilings = 5;
  cfg.tiles_per_dim = {4, 4};
  cfg.memory_size = 8;
  cfg.input_bounds = kMcBounds;
  TileCodingTransform tc(cfg);
  CHECK(tc.output_dim() == 8);
  const auto f = tc.apply({-0.5, 0.0});
  REQUIRE(f.active.size() == 5);
  // fresh table: the five new cell keys take indices 0..4 in tiling order
  std::set<std::int32_t> got(f.active.begin(), f.active.end());
  CHECK(got == std::set<std::int32_t>{0, 1, 2, 3, 4});
  CHECK(tc.hash_collisions() == 0);

  // drive many distinct states; indices stay within memory and collisions
  // start counting once the table is full
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const auto g = tc.apply(random_mc_state(rng));
    for (auto idx : g.active) {
      CHECK(idx >= 0);
      CHECK(idx < 8);
    }
  }
  CHECK(tc.hash_collisions() > 0);
}

TEST_CASE("tile coding separate hashed memory per dimension") {
  TileCodingConfig cfg;
  cfg.mode = TileCodingConfig::Mode::separate;
  cfg.num_tilings = 8;
  cfg.tiles_per_dim = {4, 4, 4};
  cfg.memory_size = 64;
  cfg.input_bounds = {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
  TileCodingTransform tc(cfg);
  CHECK(tc.output_dim() == 3 * 64);
  const auto f = tc.apply({0.1, 0.5, 0.9});
  CHECK(f.active.size() == 24);
  for (std::size_t i = 0; i < 8; ++i) CHECK(f.active[i] < 64);
  for (std::size_t i = 8; i < 16; ++i) {
    CHECK(f.active[i] >= 64);
    CHECK(f.active[i] < 128);
  }
}

TEST_CASE("tile coding validation") {
  TileCodingConfig cfg;
  cfg.num_tilings = 0;
  cfg.tiles_per_dim = {4};
  cfg.input_bounds = {{0.0, 1.0}};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.num_tilings = 2;
  cfg.tiles_per_dim = {};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.tiles_per_dim = {4, 4};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // dims mismatch
  cfg.tiles_per_dim = {4};
  cfg.offsets = {{0.0}};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // one row per tiling
}

TEST_CASE("tile coding serialization round-trip") {
  TileCodingConfig cfg;
  cfg.num_tilings = 5;
  cfg.tiles_per_dim = {4, 4};
  cfg.memory_size = 32;
  cfg.input_bounds = kMcBounds;
  TileCodingTransform tc(cfg);
  Rng rng(77);
  std::vector<StateVector> states;
  for (int i = 0; i < 100; ++i) {
    states.push_back(random_mc_state(rng));
    tc.apply(states.back());
  }
  std::stringstream buf;
  tc.save(buf);
  auto loaded = load_transform(buf);
  REQUIRE(loaded->kind() == "tile_coding");
  CHECK(loaded->output_dim() == tc.output_dim());
  for (const auto& s : states) {
    const auto a = tc.apply(s);
    const auto b = loaded->apply(s);
    CHECK(a.active == b.active);
  }
}

TEST_CASE("lift-project joint stays on the sphere") {
  LiftProjectConfig cfg;
  cfg.radius = 8.0;
  cfg.shift = 0.0;
  cfg.mode = LiftProjectConfig::Mode::joint;
  cfg.input_bounds = kMcBounds;
  LiftProjectTransform lp(cfg);
  CHECK(lp.output_dim() == 3);
  CHECK(lp.extra_coordinate_indices() == std::vector<int>{2});
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const auto f = lp.apply(random_mc_state(rng));
    REQUIRE(f.dense.size() == 3);
    const double norm = std::sqrt(f.dense[0] * f.dense[0] + f.dense[1] * f.dense[1] + f.dense[2] * f.dense[2]);
    CHECK(std::abs(norm - 8.0) < 1e-9);
    CHECK(f.dense[2] > 0.0);  // lift coordinate keeps the upper hemisphere
  }
  // corner state: normalized (1,1) scales by r/sqrt(3)
  const auto c = lp.apply({0.6, 0.07});
  const double s = 4.6188021535170067;
  CHECK(c.dense[0] == doctest::Approx(s).epsilon(1e-15));
  CHECK(c.dense[1] == doctest::Approx(s).epsilon(1e-15));
  CHECK(c.dense[2] == doctest::Approx(s).epsilon(1e-15));
  // center maps to the pole
  const auto p = lp.apply({-0.3, 0.0});
  CHECK(std::abs(p.dense[0]) < 1e-15);
  CHECK(p.dense[2] == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("lift-project shift moves only the extra coordinate") {
  LiftProjectConfig cfg;
  cfg.radius = 8.0;
  cfg.shift = 6.0;
  cfg.mode = LiftProjectConfig::Mode::joint;
  cfg.input_bounds = kMcBounds;
  LiftProjectTransform lp(cfg);
  Rng rng(22);
  for (int i = 0; i < 1000; ++i) {
    const auto f = lp.apply(random_mc_state(rng));
    const double extra = f.dense[2] + 6.0;  // undo the shift
    const double norm = std::sqrt(f.dense[0] * f.dense[0] + f.dense[1] * f.dense[1] + extra * extra);
    CHECK(std::abs(norm - 8.0) < 1e-9);
  }
}

TEST_CASE("lift-project separate mode embeds each dimension on its own circle") {
  LiftProjectConfig cfg;
  cfg.radius = 3.0;
  cfg.shift = 2.0;
  cfg.mode = LiftProjectConfig::Mode::separate;
  cfg.input_bounds = std::vector<Bounds>(4, Bounds{0.0, 1.0});
  LiftProjectTransform lp(cfg);
  CHECK(lp.output_dim() == 8);
  CHECK(lp.extra_coordinate_indices() == std::vector<int>{1, 3, 5, 7});
  Rng rng(23);
  for (int i = 0; i < 1000; ++i) {
    StateVector s = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
    const auto f = lp.apply(s);
    for (int b = 0; b < 4; ++b) {
      const double x = f.dense[2 * b];
      const double e = f.dense[2 * b + 1] + 2.0;
      CHECK(std::abs(std::sqrt(x * x + e * e) - 3.0) < 1e-9);
    }
  }
}

TEST_CASE("lift-project inversion recovers the normalized input") {
  Rng rng(24);
  for (auto mode : {LiftProjectConfig::Mode::joint, LiftProjectConfig::Mode::separate}) {
    LiftProjectConfig cfg;
    cfg.radius = 8.0;
    cfg.shift = 6.0;
    cfg.mode = mode;
    cfg.input_bounds = kMcBounds;
    LiftProjectTransform lp(cfg);
    Normalizer norm(kMcBounds);
    for (int i = 0; i < 1000; ++i) {
      const auto s = random_mc_state(rng);
      const auto f = lp.apply(s);
      const auto back = lp.invert(f.dense);
      const auto expected = norm.apply(s);
      for (int d = 0; d < 2; ++d) CHECK(std::abs(back[d] - expected[d]) < 1e-9);
    }
  }
}

TEST_CASE("lift-project partition validation") {
  LiftProjectConfig cfg;
  cfg.radius = 1.0;
  cfg.mode = LiftProjectConfig::Mode::separate;
  cfg.input_bounds = {{0.0, 1.0}, {0.0, 1.0}};
  cfg.partition = {{0}, {0}};
  CHECK_THROWS_AS(LiftProjectTransform{cfg}, std::invalid_argument);
  cfg.partition = {{0}};
  CHECK_THROWS_AS(LiftProjectTransform{cfg}, std::invalid_argument);
  cfg.partition = {{0, 1}};
  CHECK_NOTHROW(LiftProjectTransform{cfg});
  cfg.radius = 0.0;
  CHECK_THROWS_AS(LiftProjectTransform{cfg}, std::invalid_argument);
}

TEST_CASE("lift-project serialization round-trip") {
  LiftProjectConfig cfg;
  cfg.radius = 8.0;
  cfg.shift = 6.0;
  cfg.mode = LiftProjectConfig::Mode::joint;
  cfg.input_bounds = kMcBounds;
  LiftProjectTransform lp(cfg);
  std::stringstream buf;
  lp.save(buf);
  auto loaded = load_transform(buf);
  REQUIRE(loaded->kind() == "lift_project");
  Rng rng(25);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_mc_state(rng);
    const auto a = lp.apply(s);
    const auto b = loaded->apply(s);
    REQUIRE(a.dense.size() == b.dense.size());
    for (std::size_t d = 0; d < a.dense.size(); ++d) CHECK(a.dense[d] == b.dense[d]);
  }
}

TEST_CASE("epigraph appends the squared norm of the normalized input") {
  EpigraphTransform ep(kMcBounds);
  CHECK(ep.output_dim() == 3);
  CHECK(ep.extra_coordinate_indices() == std::vector<int>{2});
  const auto center = ep.apply({-0.3, 0.0});
  CHECK(std::abs(center.dense[2]) < 1e-15);
  const auto corner = ep.apply({0.6, 0.07});
  CHECK(corner.dense[2] == doctest::Approx(2.0).epsilon(1e-15));
  // strict convexity puts interior points below the chord between them
  const auto a = ep.apply({-1.2, 0.0});
  const auto b = ep.apply({0.6, 0.0});
  const auto m = ep.apply({-0.3, 0.0});
  CHECK(m.dense[2] < 0.5 * (a.dense[2] + b.dense[2]));
}

TEST_CASE("epigraph embed helper") {
  const auto e = epigraph_embed({3.0, 4.0}, &squared_norm);
  REQUIRE(e.size() == 3);
  CHECK(e[0] == 3.0);
  CHECK(e[1] == 4.0);
  CHECK(e[2] == 25.0);
}

TEST_CASE("rbf features from explicit centers") {
  RbfConfig cfg;
  cfg.num_centers = 2;
  cfg.width = 0.1;
  cfg.centers = {{0.0, 0.0}, {1.0, 1.0}};
  cfg.input_bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  RbfTransform rbf(cfg);
  CHECK(rbf.output_dim() == 2);
  // at the first center the feature is exactly 1
  const auto f = rbf.apply({0.0, 0.0});
  CHECK(f.dense[0] == 1.0);
  // normalized distance 0.1 along one axis: exp(-0.01 / 0.02)
  const auto g = rbf.apply({0.1, 0.0});
  CHECK(g.dense[0] == doctest::Approx(0.60653065971263342).epsilon(1e-15));
}

TEST_CASE("rbf sparsification zeroes small responses") {
  RbfConfig cfg;
  cfg.num_centers = 2;
  cfg.width = 0.1;
  cfg.sparsify_threshold = 0.001;
  cfg.centers = {{-0.9, -0.9}, {0.9, 0.9}};
  cfg.input_bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  RbfTransform rbf(cfg);
  const auto f = rbf.apply({-0.9, -0.9});
  CHECK(f.dense[0] == 1.0);
  CHECK(f.dense[1] == 0.0);  // far center sparsified to exact zero
}

TEST_CASE("rbf centers drawn from the seed are reproducible") {
  RbfConfig cfg;
  cfg.num_centers = 100;
  cfg.width = 0.1;
  cfg.centers_seed = 99;
  cfg.input_bounds = kMcBounds;
  RbfTransform a(cfg), b(cfg);
  REQUIRE(a.centers().size() == 100);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.centers()[i] == b.centers()[i]);
    for (double v : a.centers()[i]) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("rbf serialization round-trip") {
  RbfConfig cfg;
  cfg.num_centers = 10;
  cfg.width = 0.1;
  cfg.sparsify_threshold = 0.001;
  cfg.centers_seed = 7;
  cfg.input_bounds = kMcBounds;
  RbfTransform rbf(cfg);
  std::stringstream buf;
  rbf.save(buf);
  auto loaded = load_transform(buf);
  REQUIRE(loaded->kind() == "rbf");
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_mc_state(rng);
    const auto a = rbf.apply(s);
    const auto b = loaded->apply(s);
    for (int d = 0; d < 10; ++d) CHECK(a.dense[d] == b.dense[d]);
  }
}

TEST_CASE("identity transform normalizes only") {
  IdentityTransform id(kMcBounds);
  CHECK(id.output_dim() == 2);
  CHECK(id.extra_coordinate_indices().empty());
  const auto f = id.apply({0.6, -0.07});
  CHECK(f.dense[0] == 1.0);
  CHECK(f.dense[1] == -1.0);
  CHECK(id.clamp_events() == 0);
  id.apply({2.0, 0.0});
  CHECK(id.clamp_events() == 1);

  std::stringstream buf;
  id.save(buf);
  auto loaded = load_transform(buf);
  CHECK(loaded->kind() == "identity");
  CHECK(loaded->apply({0.6, -0.07}).dense == f.dense);
}
