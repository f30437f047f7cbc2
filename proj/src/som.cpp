#include "divex/som.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "divex/error.hpp"

namespace divex {

GridShape GridShape::for_items(std::size_t n) {
  if (n == 0) return {1, 1};
  auto w = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (w * w < n) ++w;
  while (w > 1 && (w - 1) * (w - 1) >= n) --w;
  return {w, (n + w - 1) / w};
}

void validate(const SomParams& p, const GridShape& shape) {
  if (p.epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be positive");
  if (!(p.etaF > 0.0 && p.etaF <= p.eta0 && p.eta0 <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "learning rates must satisfy 0 < etaF <= eta0 <= 1");
  }
  const double sigma0 = p.sigma0.value_or(static_cast<double>(std::max(shape.width, shape.height)) / 2.0);
  if (!(p.sigmaF > 0.0 && p.sigmaF <= sigma0)) {
    fail(ErrorCode::InvalidArgument, "radii must satisfy 0 < sigmaF <= sigma0");
  }
}

double decay(double initial, double final, std::size_t epoch, std::size_t epochs) {
  if (epochs <= 1) return initial;
  const double frac = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
  return initial * std::pow(final / initial, frac);
}

SomGrid::SomGrid(GridShape shape, std::size_t dims, FeatureKind kind)
    : shape_(shape), dims_(dims), kind_(kind), weights_(shape.cells() * dims, 0.0) {}

std::uint64_t SomRandom::below(std::uint64_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "empty range");
  // Rejects the low (2^64 mod n) outputs.
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x < threshold);
  return x % n;
}

namespace {

void check_items(std::span<const FeatureEntry> items, std::size_t dims) {
  if (items.empty()) fail(ErrorCode::EmptyInput, "SOM needs at least one vector");
  for (const auto& it : items) {
    if (it.vector.dims() != dims) fail(ErrorCode::DimensionMismatch, "SOM input vectors differ in dimension");
  }
}

}  // namespace

void train_som_from(SomGrid& grid, std::span<const FeatureEntry> items, const SomParams& params,
                    const EpochObserver& observer) {
  check_items(items, grid.dims());
  validate(params, grid.shape());
  const double sigma0 =
      params.sigma0.value_or(static_cast<double>(std::max(grid.shape().width, grid.shape().height)) / 2.0);

  // Shuffle stream, separate from the initialisation stream.
  SomRandom rng(params.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    const double eta = decay(params.eta0, params.etaF, epoch, params.epochs);
    const double sigma = decay(sigma0, params.sigmaF, epoch, params.epochs);
    const double twoSigmaSq = 2.0 * sigma * sigma;

    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    for (auto idx : order) {
      const auto& x = items[idx].vector.values;
      const auto best = bmu(grid, x);
      const auto [bx, by] = grid.coords(best.cell);
      for (std::size_t u = 0; u < grid.units(); ++u) {
        const auto [ux, uy] = grid.coords(u);
        const double g2 = (ux - bx) * (ux - bx) + (uy - by) * (uy - by);
        const double rate = eta * std::exp(-g2 / twoSigmaSq);
        if (rate == 0.0) continue;
        auto w = grid.unit(u);
        for (std::size_t d = 0; d < w.size(); ++d) w[d] += rate * (x[d] - w[d]);
      }
    }
    if (observer) observer(epoch, grid);
  }
}

SomGrid train_som(std::span<const FeatureEntry> items, const SomParams& params, std::optional<GridShape> shape,
                  const EpochObserver& observer) {
  if (items.empty()) fail(ErrorCode::EmptyInput, "SOM needs at least one vector");
  const auto dims = items.front().vector.dims();
  check_items(items, dims);
  const auto gs = shape.value_or(GridShape::for_items(items.size()));
  validate(params, gs);

  SomGrid grid(gs, dims, items.front().vector.kind);
  SomRandom rng(params.seed);
  for (std::size_t u = 0; u < grid.units(); ++u) {
    const auto& src = items[rng.below(items.size())].vector.values;
    std::copy(src.begin(), src.end(), grid.unit(u).begin());
  }
  train_som_from(grid, items, params, observer);
  return grid;
}

BestMatch bmu(const SomGrid& grid, std::span<const double> v) {
  if (v.size() != grid.dims()) {
    fail(ErrorCode::DimensionMismatch,
         "vector has " + std::to_string(v.size()) + " dimensions, grid has " + std::to_string(grid.dims()));
  }
  BestMatch best{0, INFINITY};
  for (std::size_t u = 0; u < grid.units(); ++u) {
    const auto w = grid.unit(u);
    double d = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double diff = v[i] - w[i];
      d += diff * diff;
    }
    if (d < best.squaredDistance) best = {u, d};
  }
  return best;
}

std::string_view to_string(LayoutMode mode) {
  switch (mode) {
    case LayoutMode::Som: return "som";
    case LayoutMode::Confidence: return "confidence";
    case LayoutMode::Video: return "video";
  }
  return "som";
}

LayoutMode parse_layout_mode(std::string_view text) {
  if (text == "som") return LayoutMode::Som;
  if (text == "confidence") return LayoutMode::Confidence;
  if (text == "video") return LayoutMode::Video;
  fail(ErrorCode::InvalidArgument, "organization must be som, confidence or video, got '" + std::string(text) + "'");
}

GridLayout assign_unique_cells(const SomGrid& grid, std::span<const FeatureEntry> items) {
  const auto cells = grid.units();
  if (items.size() > cells) {
    fail(ErrorCode::CapacityExceeded,
         std::to_string(items.size()) + " items do not fit a grid of " + std::to_string(cells) + " cells");
  }
  struct Candidate {
    std::size_t index;
    std::string key;
    BestMatch match;
  };
  std::vector<Candidate> order;
  order.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) order.push_back({i, items[i].item.str(), bmu(grid, items[i].vector.values)});
  std::sort(order.begin(), order.end(), [](const Candidate& a, const Candidate& b) {
    if (a.match.squaredDistance != b.match.squaredDistance) return a.match.squaredDistance < b.match.squaredDistance;
    return a.key < b.key;
  });

  std::vector<bool> taken(cells, false);
  GridLayout layout{LayoutMode::Som, grid.shape(), {}};
  for (const auto& c : order) {
    std::size_t cell = c.match.cell;
    if (taken[cell]) {
      const auto [bx, by] = grid.coords(cell);
      double bestD = INFINITY;
      for (std::size_t u = 0; u < cells; ++u) {
        if (taken[u]) continue;
        const auto [ux, uy] = grid.coords(u);
        const double d = (ux - bx) * (ux - bx) + (uy - by) * (uy - by);
        if (d < bestD) {
          bestD = d;
          cell = u;
        }
      }
    }
    taken[cell] = true;
    layout.cells.push_back({cell, items[c.index].item});
  }
  std::sort(layout.cells.begin(), layout.cells.end(), [](const auto& a, const auto& b) { return a.cell < b.cell; });
  return layout;
}

GridLayout order_layout(std::span<const ScoredItem> items, LayoutMode mode, const GridShape& shape) {
  if (items.size() > shape.cells()) {
    fail(ErrorCode::CapacityExceeded,
         std::to_string(items.size()) + " items do not fit a grid of " + std::to_string(shape.cells()) + " cells");
  }
  if (mode == LayoutMode::Som) fail(ErrorCode::InvalidArgument, "som layouts come from assign_unique_cells");

  struct Row {
    const ScoredItem* item;
    std::string key;
  };
  std::vector<Row> rows;
  rows.reserve(items.size());
  for (const auto& it : items) rows.push_back({&it, it.item.str()});

  if (mode == LayoutMode::Confidence) {
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.item->score != b.item->score) return a.item->score > b.item->score;
      return a.key < b.key;
    });
  } else {
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.item->item.videoId != b.item->item.videoId) return a.item->item.videoId < b.item->item.videoId;
      if (a.item->item.ordinal != b.item->item.ordinal) return a.item->item.ordinal < b.item->item.ordinal;
      return a.key < b.key;
    });
  }
  GridLayout layout{mode, shape, {}};
  for (std::size_t i = 0; i < rows.size(); ++i) layout.cells.push_back({i, rows[i].item->item});
  return layout;
}

double quantization_error(const SomGrid& grid, std::span<const FeatureEntry> items) {
  if (items.empty()) fail(ErrorCode::EmptyInput, "quantization error of an empty set");
  double sum = 0.0;
  for (const auto& it : items) sum += std::sqrt(bmu(grid, it.vector.values).squaredDistance);
  return sum / static_cast<double>(items.size());
}

}  // namespace divex
