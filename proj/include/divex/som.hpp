#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "divex/catalog.hpp"
#include "divex/feature_vector.hpp"
#include "divex/item_key.hpp"

namespace divex {

struct GridShape {
  std::size_t width = 1;
  std::size_t height = 1;

  std::size_t cells() const { return width * height; }
  /// Near-square grid for n items: W = ceil(sqrt(n)), H = ceil(n / W).
  static GridShape for_items(std::size_t n);
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

struct SomParams {
  std::size_t epochs = 40;
  double eta0 = 0.5;
  double etaF = 0.01;
  std::optional<double> sigma0;  // defaults to max(W, H) / 2
  double sigmaF = 0.5;
  std::uint64_t seed = 0;
};

void validate(const SomParams& params, const GridShape& shape);

/// Exponential decay from `initial` to `final` over epochs 0..epochs-1.
double decay(double initial, double final, std::size_t epoch, std::size_t epochs);

class SomGrid {
 public:
  SomGrid(GridShape shape, std::size_t dims, FeatureKind kind);

  const GridShape& shape() const { return shape_; }
  std::size_t dims() const { return dims_; }
  FeatureKind trained_with() const { return kind_; }
  std::size_t units() const { return shape_.cells(); }

  std::span<const double> unit(std::size_t cell) const { return {weights_.data() + cell * dims_, dims_}; }
  std::span<double> unit(std::size_t cell) { return {weights_.data() + cell * dims_, dims_}; }
  const std::vector<double>& weights() const { return weights_; }

  std::pair<double, double> coords(std::size_t cell) const {
    return {static_cast<double>(cell % shape_.width), static_cast<double>(cell / shape_.width)};
  }

  friend bool operator==(const SomGrid&, const SomGrid&) = default;

 private:
  GridShape shape_;
  std::size_t dims_;
  FeatureKind kind_;
  std::vector<double> weights_;
};

/// The pinned generator: mt19937_64 with a rejection-sampled bounded draw, so
/// results do not depend on the standard library's distributions.
class SomRandom {
 public:
  explicit SomRandom(std::uint64_t seed) : engine_(seed) {}
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

using EpochObserver = std::function<void(std::size_t epoch, const SomGrid& grid)>;

/// Online Kohonen training. Units start as copies of randomly drawn inputs;
/// each epoch visits the items in a fresh seeded shuffle and pulls every unit
/// towards the item, weighted by a Gaussian of its grid distance to the BMU.
/// Throws Error(EmptyInput) or Error(DimensionMismatch).
SomGrid train_som(std::span<const FeatureEntry> items, const SomParams& params,
                  std::optional<GridShape> shape = std::nullopt, const EpochObserver& observer = {});

/// Continues training from given weights (initialisation skipped).
void train_som_from(SomGrid& grid, std::span<const FeatureEntry> items, const SomParams& params,
                    const EpochObserver& observer = {});

struct BestMatch {
  std::size_t cell = 0;
  double squaredDistance = 0.0;
};

/// Nearest unit by squared Euclidean distance; lowest index wins ties.
BestMatch bmu(const SomGrid& grid, std::span<const double> v);
inline std::size_t bmu_cell(const SomGrid& grid, const FeatureVector& v) { return bmu(grid, v.values).cell; }

enum class LayoutMode { Som, Confidence, Video };

std::string_view to_string(LayoutMode mode);
LayoutMode parse_layout_mode(std::string_view text);

struct CellItem {
  std::size_t cell = 0;
  ItemKey item;
};

/// Injective item-to-cell placement on a grid. `cells` ascend by cell index.
struct GridLayout {
  LayoutMode mode = LayoutMode::Som;
  GridShape shape;
  std::vector<CellItem> cells;
};

/// Items in (BMU distance, canonical key) order take their BMU when free,
/// otherwise the free cell nearest to it on the grid (lowest index on ties).
/// Throws Error(CapacityExceeded) when there are more items than cells.
GridLayout assign_unique_cells(const SomGrid& grid, std::span<const FeatureEntry> items);

struct ScoredItem {
  ItemKey item;
  double score = 0.0;
};

/// Row-major placement. Confidence: score descending, then canonical key.
/// Video: video id ascending, then ordinal ascending.
GridLayout order_layout(std::span<const ScoredItem> items, LayoutMode mode, const GridShape& shape);

/// Mean Euclidean distance from each item to its BMU.
double quantization_error(const SomGrid& grid, std::span<const FeatureEntry> items);

}  // namespace divex
