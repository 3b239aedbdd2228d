#pragma once

// Multi-level grid over balls with widely varying radii. Level k holds radii
// up to base * 2^k and uses cells of that size, so a query only scans cells
// near the query ball at each level.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "coxperc/core.hpp"

namespace coxperc {

class BallIndex {
 public:
  BallIndex() = default;
  BallIndex(std::span<const Point> centers, std::span<const double> radii);

  std::size_t size() const { return centers_.size(); }
  const Point& center(std::size_t i) const { return centers_[i]; }
  double radius(std::size_t i) const { return radii_[i]; }

  /// Calls f(i) for every ball with |X_i - c| < rho_i + a.
  template <class F>
  void for_each_intersecting(const Point& c, double a, F&& f) const;

  /// Calls f(i) for every ball containing p in its interior.
  template <class F>
  void for_each_covering(const Point& p, F&& f) const {
    for_each_intersecting(p, 0.0, f);
  }

 private:
  struct Level {
    double cell = 1.0;
    double rmax = 0.0;
    std::vector<std::uint64_t> keys;  // sorted
    std::vector<int> ids;             // parallel to keys
  };

  static constexpr int kBits = 21;
  static constexpr std::int64_t kOffset = std::int64_t{1} << (kBits - 1);

  static std::int64_t cell_coord(double x, double cell) {
    const double q = std::floor(x / cell);
    return static_cast<std::int64_t>(std::clamp(q, static_cast<double>(-kOffset + 1), static_cast<double>(kOffset - 1)));
  }
  static std::uint64_t pack(std::int64_t i, std::int64_t j, std::int64_t k) {
    return (static_cast<std::uint64_t>(i + kOffset) << (2 * kBits)) | (static_cast<std::uint64_t>(j + kOffset) << kBits) |
           static_cast<std::uint64_t>(k + kOffset);
  }

  int dim_ = 0;
  std::vector<Point> centers_;
  std::vector<double> radii_;
  std::vector<Level> levels_;
};

template <class F>
void BallIndex::for_each_intersecting(const Point& c, double a, F&& f) const {
  for (const Level& lv : levels_) {
    if (lv.ids.empty()) continue;
    const double reach = a + lv.rmax;
    std::int64_t lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    double cells = 1.0;
    for (int k = 0; k < dim_; ++k) {
      lo[k] = cell_coord(c[k] - reach, lv.cell);
      hi[k] = cell_coord(c[k] + reach, lv.cell);
      cells *= static_cast<double>(hi[k] - lo[k] + 1);
    }
    auto visit = [&](int id) {
      const double s = radii_[static_cast<std::size_t>(id)] + a;
      if (squared_distance(centers_[static_cast<std::size_t>(id)], c) < s * s) f(static_cast<std::size_t>(id));
    };
    if (cells > static_cast<double>(lv.ids.size())) {
      for (int id : lv.ids) visit(id);
      continue;
    }
    for (std::int64_t i = lo[0]; i <= hi[0]; ++i)
      for (std::int64_t j = lo[1]; j <= hi[1]; ++j)
        for (std::int64_t k = lo[2]; k <= hi[2]; ++k) {
          const std::uint64_t key = pack(i, j, k);
          auto it = std::lower_bound(lv.keys.begin(), lv.keys.end(), key);
          for (auto p = it; p != lv.keys.end() && *p == key; ++p) visit(lv.ids[static_cast<std::size_t>(p - lv.keys.begin())]);
        }
  }
}

}  // namespace coxperc
