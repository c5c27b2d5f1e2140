#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace alceval {

// Indices that sort v ascending; stable, so ties keep original index order.
inline std::vector<std::size_t> sort_permutation(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  return order;
}

// 1-based ranks with tied values sharing their average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
  const auto order = sort_permutation(v);
  std::vector<double> ranks(v.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    // positions i..j (0-based) share rank (i+1 + j+1)/2
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace alceval
