#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace amodscale {

/// weights[r][c]; nullopt marks a forbidden pair.
using WeightMatrix = std::vector<std::vector<std::optional<double>>>;

struct Matching {
  std::vector<std::optional<std::size_t>> row_to_col;
  double total_weight = 0.0;  // sum of original weights of matched pairs
  std::size_t size = 0;
};

enum class MatchingMode {
  kProfit,       // maximum weight; only pairs with weight >= 0 are eligible
  kCardinality,  // maximum number of pairs first, then maximum weight
};

/// Maximum-weight bipartite matching (Hungarian method on rows x (cols + rows)
/// where the extra columns stand for "unmatched").
Matching max_weight_matching(const WeightMatrix& weights, MatchingMode mode = MatchingMode::kProfit);

}  // namespace amodscale
