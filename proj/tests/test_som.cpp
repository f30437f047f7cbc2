#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "divex/som.hpp"
#include "fixture.hpp"

using namespace divex;
using namespace divex::testing;

namespace {

FeatureEntry entry(std::string video, std::uint64_t shot, std::vector<double> v) {
  auto item = ItemKey::shot(std::move(video), shot);
  auto key = item.str();
  return {std::move(item), std::move(key), {FeatureKind::Motion, std::move(v)}};
}

SomGrid grid_of(GridShape shape, const std::vector<std::vector<double>>& units) {
  SomGrid g(shape, units.front().size(), FeatureKind::Motion);
  for (std::size_t i = 0; i < units.size(); ++i) std::copy(units[i].begin(), units[i].end(), g.unit(i).begin());
  return g;
}

double norm(std::span<const double> a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < b.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<FeatureEntry> random_entries(std::mt19937_64& rng, std::size_t n, std::size_t dims) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FeatureEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dims);
    for (auto& x : v) x = u(rng);
    out.push_back(entry("r" + std::to_string(i % 7), i, std::move(v)));
  }
  return out;
}

void check_bijective(const GridLayout& layout, std::size_t items) {
  CHECK(layout.cells.size() == items);
  std::set<std::size_t> cells;
  std::set<std::string> keys;
  for (const auto& c : layout.cells) {
    CHECK(c.cell < layout.shape.cells());
    cells.insert(c.cell);
    keys.insert(c.item.str());
  }
  CHECK(cells.size() == items);
  CHECK(keys.size() == items);
}

}  // namespace

TEST_CASE("grid shape") {
  CHECK(GridShape::for_items(5) == GridShape{3, 2});
  CHECK(GridShape::for_items(1) == GridShape{1, 1});
  CHECK(GridShape::for_items(4) == GridShape{2, 2});
  CHECK(GridShape::for_items(10) == GridShape{4, 3});
  CHECK(GridShape::for_items(64) == GridShape{8, 8});
  for (std::size_t n = 1; n < 500; ++n) {
    const auto s = GridShape::for_items(n);
    CHECK(s.cells() >= n);
    CHECK(s.width * s.width >= n);
    CHECK((s.width - 1) * (s.width - 1) < n);
  }
}

TEST_CASE("decay schedule") {
  CHECK(decay(0.5, 0.01, 0, 40) == 0.5);
  CHECK(decay(0.5, 0.01, 39, 40) == doctest::Approx(0.01));
  CHECK(decay(0.5, 0.01, 0, 1) == 0.5);
  CHECK(decay(2.0, 0.5, 1, 3) == doctest::Approx(1.0));
}

TEST_CASE("parameter validation") {
  const GridShape s{2, 2};
  SomParams p;
  CHECK_NOTHROW(validate(p, s));
  p.epochs = 0;
  CHECK(code_of([&] { validate(p, s); }) == ErrorCode::InvalidArgument);
  p = {};
  p.etaF = 0.6;
  CHECK(code_of([&] { validate(p, s); }) == ErrorCode::InvalidArgument);
  p = {};
  p.eta0 = 1.5;
  CHECK(code_of([&] { validate(p, s); }) == ErrorCode::InvalidArgument);
  p = {};
  p.sigma0 = 0.2;
  CHECK(code_of([&] { validate(p, s); }) == ErrorCode::InvalidArgument);

  CHECK(code_of([] { train_som({}, SomParams{}); }) == ErrorCode::EmptyInput);
  const std::vector<FeatureEntry> ragged{entry("a", 0, {1, 2}), entry("a", 1, {1})};
  CHECK(code_of([&] { train_som(ragged, SomParams{}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("single point convergence follows the closed form") {
  const std::vector<double> v{0.3, 0.7, 0.1};
  const std::vector<FeatureEntry> items{entry("a", 0, v)};
  auto grid = grid_of({1, 1}, {{0.5, 0.5, 0.2}});
  const double initial = norm(grid.unit(0), v);

  SomParams p;
  std::vector<double> errors;
  train_som_from(grid, items, p, [&](std::size_t, const SomGrid& g) { errors.push_back(quantization_error(g, items)); });
  REQUIRE(errors.size() == p.epochs);

  double expected = initial;
  for (std::size_t t = 0; t < p.epochs; ++t) {
    expected *= 1.0 - decay(p.eta0, p.etaF, t, p.epochs);
    CHECK(errors[t] == doctest::Approx(expected).epsilon(1e-9));
    if (t > 0) CHECK(errors[t] <= errors[t - 1]);
  }
  CHECK(errors.back() < 1e-3);
  CHECK(norm(grid.unit(0), v) < 1e-3);

  // initialised from the input itself: already exact
  const auto fresh = train_som(items, p);
  CHECK(fresh.shape() == GridShape{1, 1});
  CHECK(quantization_error(fresh, items) < 1e-3);
}

TEST_CASE("training is deterministic per seed") {
  std::mt19937_64 rng(5);
  const auto items = random_entries(rng, 5, 4);
  SomParams p;
  p.seed = 99;
  const auto a = train_som(items, p);
  const auto b = train_som(items, p);
  CHECK(a.shape() == GridShape{3, 2});
  CHECK(a == b);
  CHECK(assign_unique_cells(a, items).cells.size() == 5);
  p.seed = 100;
  CHECK_FALSE(train_som(items, p) == a);
}

TEST_CASE("bmu examples") {
  const auto two = grid_of({2, 1}, {{0, 0}, {10, 10}});
  const std::vector<double> v{1, 1};
  CHECK(bmu(two, v).cell == 0);
  CHECK(bmu(two, v).squaredDistance == 2.0);

  // cells 1 and 3 equidistant from v
  const auto four = grid_of({2, 2}, {{5, 5}, {1, 0}, {9, 9}, {0, 1}});
  CHECK(bmu(four, std::vector<double>{0, 0}).cell == 1);

  const auto exact = bmu(four, std::vector<double>{9, 9});
  CHECK(exact.cell == 2);
  CHECK(exact.squaredDistance == 0.0);

  CHECK(code_of([&] { bmu(four, std::vector<double>{1}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("unique cell assignment") {
  SUBCASE("conflict goes to the nearest free cell") {
    const auto grid = grid_of({2, 1}, {{0, 0}, {10, 10}});
    const std::vector<FeatureEntry> items{entry("b", 0, {1, 1}), entry("a", 0, {0.5, 0})};
    const auto layout = assign_unique_cells(grid, items);
    CHECK(layout.mode == LayoutMode::Som);
    REQUIRE(layout.cells.size() == 2);
    CHECK(layout.cells[0].cell == 0);
    CHECK(layout.cells[0].item.str() == "v:a/s:0");
    CHECK(layout.cells[1].cell == 1);
    CHECK(layout.cells[1].item.str() == "v:b/s:0");
  }
  SUBCASE("distinct BMUs are kept as they are") {
    const auto grid = grid_of({2, 2}, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    const std::vector<FeatureEntry> items{entry("p", 0, {0.9, 0.9}), entry("p", 1, {0.1, 0}), entry("p", 2, {0, 0.8}),
                                          entry("p", 3, {0.7, 0.1})};
    const auto layout = assign_unique_cells(grid, items);
    std::map<std::string, std::size_t> where;
    for (const auto& c : layout.cells) where[c.item.str()] = c.cell;
    for (const auto& it : items) CHECK(where[it.key] == bmu(grid, it.vector.values).cell);
  }
  SUBCASE("capacity") {
    const auto grid = grid_of({2, 1}, {{0}, {1}});
    const std::vector<FeatureEntry> items{entry("a", 0, {0}), entry("a", 1, {0}), entry("a", 2, {1})};
    CHECK(code_of([&] { assign_unique_cells(grid, items); }) == ErrorCode::CapacityExceeded);
  }
  SUBCASE("a tie for the nearest free cell picks the lower index") {
    // identical units: every BMU is cell 0
    const auto grid = grid_of({3, 3}, std::vector<std::vector<double>>(9, {0.0}));
    std::vector<FeatureEntry> items;
    for (std::uint64_t i = 0; i < 9; ++i) items.push_back(entry("t", i, {0.0}));
    const auto layout = assign_unique_cells(grid, items);
    std::vector<std::size_t> order(9);
    for (const auto& c : layout.cells) order[c.item.ordinal] = c.cell;
    // from cell 0 the free cells by grid distance: 1,3 (1.0), 4 (1.41), 2,6 (2.0), 5,7 (2.24), 8
    CHECK(order == std::vector<std::size_t>{0, 1, 3, 4, 2, 6, 5, 7, 8});
  }
}

TEST_CASE("order layouts") {
  const GridShape shape{2, 2};
  SUBCASE("confidence") {
    const std::vector<ScoredItem> items{{ItemKey::shot("a", 0), 0.9}, {ItemKey::shot("b", 0), 0.7}, {ItemKey::shot("c", 0), 0.8}};
    const auto layout = order_layout(items, LayoutMode::Confidence, shape);
    REQUIRE(layout.cells.size() == 3);
    CHECK(layout.cells[0].item.videoId == "a");
    CHECK(layout.cells[1].item.videoId == "c");
    CHECK(layout.cells[2].item.videoId == "b");
    CHECK(layout.cells[2].cell == 2);
  }
  SUBCASE("video") {
    const std::vector<ScoredItem> items{{ItemKey::shot("v2", 1), 0.9}, {ItemKey::shot("v1", 3), 0.8}, {ItemKey::shot("v1", 0), 0.1}};
    const auto layout = order_layout(items, LayoutMode::Video, shape);
    REQUIRE(layout.cells.size() == 3);
    CHECK(layout.cells[0].item.str() == "v:v1/s:0");
    CHECK(layout.cells[1].item.str() == "v:v1/s:3");
    CHECK(layout.cells[2].item.str() == "v:v2/s:1");
  }
  SUBCASE("equal scores") {
    const std::vector<ScoredItem> items{{ItemKey::shot("z", 0), 0.5}, {ItemKey::shot("a", 10), 0.5}, {ItemKey::shot("a", 2), 0.5}};
    const auto layout = order_layout(items, LayoutMode::Confidence, shape);
    CHECK(layout.cells[0].item.str() == "v:a/s:10");
    CHECK(layout.cells[1].item.str() == "v:a/s:2");
    CHECK(layout.cells[2].item.str() == "v:z/s:0");
  }
  SUBCASE("errors") {
    const std::vector<ScoredItem> five(5, ScoredItem{ItemKey::shot("a", 0), 0.5});
    CHECK(code_of([&] { order_layout(five, LayoutMode::Video, shape); }) == ErrorCode::CapacityExceeded);
    CHECK(code_of([&] { order_layout({}, LayoutMode::Som, shape); }) == ErrorCode::InvalidArgument);
  }
  CHECK(parse_layout_mode("confidence") == LayoutMode::Confidence);
  CHECK(to_string(LayoutMode::Video) == "video");
  CHECK(code_of([] { parse_layout_mode("spiral"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("quantization error") {
  const auto grid = grid_of({2, 1}, {{0, 0}, {10, 0}});
  CHECK(quantization_error(grid, std::vector<FeatureEntry>{entry("a", 0, {10, 0}), entry("a", 1, {0, 0})}) == 0.0);
  CHECK(quantization_error(grid, std::vector<FeatureEntry>{entry("a", 0, {0, 3})}) == 3.0);
  CHECK(code_of([&] { quantization_error(grid, {}); }) == ErrorCode::EmptyInput);

  std::mt19937_64 rng(3);
  const auto items = random_entries(rng, 30, 6);
  SomParams p;
  p.seed = 4;
  p.epochs = 5;
  const auto trained = train_som(items, p);
  double sum = 0;
  for (const auto& it : items) {
    double best = INFINITY;
    for (std::size_t u = 0; u < trained.units(); ++u) best = std::min(best, norm(trained.unit(u), it.vector.values));
    sum += best;
  }
  CHECK(quantization_error(trained, items) == doctest::Approx(sum / 30.0).epsilon(1e-12));
}

TEST_CASE("layouts are bijective on random instances") {
  std::mt19937_64 rng(2025);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    const auto items = random_entries(rng, n, 1 + rng() % 8);
    SomParams p;
    p.seed = rng();
    p.epochs = 1 + rng() % 6;
    const auto grid = train_som(items, p);
    check_bijective(assign_unique_cells(grid, items), n);

    std::vector<ScoredItem> scored;
    for (const auto& it : items) scored.push_back({it.item, static_cast<double>(rng() % 5) / 4.0});
    check_bijective(order_layout(scored, LayoutMode::Confidence, grid.shape()), n);
    check_bijective(order_layout(scored, LayoutMode::Video, grid.shape()), n);
  }
}

TEST_CASE("two separated clusters map to disjoint units") {
  int separated = 0;
  for (std::uint64_t run = 0; run < 20; ++run) {
    std::mt19937_64 rng(1000 + run);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<FeatureEntry> items;
    for (std::uint64_t i = 0; i < 30; ++i) {
      const double centre = i < 15 ? 0.0 : 5.0;
      items.push_back(entry("c", i, {centre + noise(rng), centre + noise(rng), centre + noise(rng)}));
    }
    SomParams p;
    p.seed = run;
    const auto grid = train_som(items, p);
    std::set<std::size_t> left, right;
    for (const auto& it : items) (it.item.ordinal < 15 ? left : right).insert(bmu(grid, it.vector.values).cell);
    std::vector<std::size_t> both;
    std::set_intersection(left.begin(), left.end(), right.begin(), right.end(), std::back_inserter(both));
    separated += both.empty();
  }
  CHECK(separated >= 18);
}
