#pragma once

#include <Eigen/Core>

#include <limits>
#include <vector>

namespace lanekit {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

/// One-to-one assignment of rows (ground truths) to columns (predictions).
struct MatchResult {
  std::vector<int> row_to_col;  ///< -1 when the row is unmatched
  double total_cost = 0.0;

  static constexpr int kUnmatched = -1;

  std::vector<int> col_to_row(int cols) const;
  int matched_count() const;
};

/// Minimum-cost assignment of min(n, m) pairs (Kuhn-Munkres with
/// potentials, O(n^2 m)). +inf marks forbidden pairs.
///
/// Rows are inserted in increasing order and each augmentation prefers the
/// lowest column index among equal reduced costs, so results are
/// deterministic for tied inputs.
///
/// Throws kNoFeasibleAssignment if every complete assignment uses a
/// forbidden pair, kInvalidArgument on NaN or -inf.
MatchResult hungarian(const Eigen::MatrixXd& cost);

}  // namespace lanekit
