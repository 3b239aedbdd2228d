#include "coxperc/ball_index.hpp"

#include <numeric>
#include <stdexcept>

namespace coxperc {

BallIndex::BallIndex(std::span<const Point> centers, std::span<const double> radii)
    : centers_(centers.begin(), centers.end()), radii_(radii.begin(), radii.end()) {
  if (centers.size() != radii.size()) throw std::invalid_argument("BallIndex: centers and radii differ in length");
  if (centers_.empty()) return;
  dim_ = centers_.front().dim();

  std::vector<double> sorted(radii_);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  double base = sorted[sorted.size() / 2];
  const double top = *std::max_element(radii_.begin(), radii_.end());
  if (!(base > 0.0)) base = top > 0.0 ? top : 1.0;

  std::vector<int> level_of(radii_.size(), 0);
  int nlevels = 1;
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    int lv = 0;
    double cap = base;
    while (radii_[i] > cap) cap *= 2.0, ++lv;
    level_of[i] = lv;
    nlevels = std::max(nlevels, lv + 1);
  }
  levels_.resize(static_cast<std::size_t>(nlevels));
  for (int l = 0; l < nlevels; ++l) levels_[static_cast<std::size_t>(l)].cell = base * std::ldexp(1.0, l);

  std::vector<std::vector<std::pair<std::uint64_t, int>>> entries(static_cast<std::size_t>(nlevels));
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    Level& lv = levels_[static_cast<std::size_t>(level_of[i])];
    lv.rmax = std::max(lv.rmax, radii_[i]);
    std::int64_t c[3] = {0, 0, 0};
    for (int k = 0; k < dim_; ++k) c[k] = cell_coord(centers_[i][k], lv.cell);
    entries[static_cast<std::size_t>(level_of[i])].emplace_back(pack(c[0], c[1], c[2]), static_cast<int>(i));
  }
  for (int l = 0; l < nlevels; ++l) {
    auto& e = entries[static_cast<std::size_t>(l)];
    std::sort(e.begin(), e.end());
    Level& lv = levels_[static_cast<std::size_t>(l)];
    lv.keys.reserve(e.size());
    lv.ids.reserve(e.size());
    for (const auto& [key, id] : e) lv.keys.push_back(key), lv.ids.push_back(id);
  }
}

}  // namespace coxperc
