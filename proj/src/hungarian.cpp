#include "lanekit/hungarian.hpp"

#include "lanekit/error.hpp"

#include <algorithm>
#include <cmath>

namespace lanekit {

std::vector<int> MatchResult::col_to_row(int cols) const {
  std::vector<int> out(static_cast<std::size_t>(cols), kUnmatched);
  for (std::size_t r = 0; r < row_to_col.size(); ++r) {
    if (row_to_col[r] != kUnmatched) out[static_cast<std::size_t>(row_to_col[r])] = static_cast<int>(r);
  }
  return out;
}

int MatchResult::matched_count() const {
  return static_cast<int>(std::count_if(row_to_col.begin(), row_to_col.end(),
                                        [](int c) { return c != kUnmatched; }));
}

namespace {

// Rectangular solver for rows <= cols. 1-based potentials as in the classic
// shortest-augmenting-path formulation.
std::vector<int> solve_wide(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(n), MatchResult::kUnmatched);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  }
  return row_to_col;
}

}  // namespace

MatchResult hungarian(const Eigen::MatrixXd& cost) {
  const auto n = cost.rows();
  const auto m = cost.cols();
  MatchResult result;
  result.row_to_col.assign(static_cast<std::size_t>(n), MatchResult::kUnmatched);
  if (n == 0 || m == 0) return result;

  double max_abs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double c = cost(i, j);
      if (std::isnan(c) || c == -kForbidden) {
        throw LaneError(ErrorCode::kInvalidArgument, "cost matrix has NaN or -inf");
      }
      if (c != kForbidden) max_abs = std::max(max_abs, std::abs(c));
    }
  }
  // Any assignment touching a forbidden pair costs more than every
  // assignment that avoids them.
  const double big = (2.0 * max_abs + 1.0) * static_cast<double>(std::min(n, m) + 1);
  Eigen::MatrixXd work = cost.unaryExpr([big](double c) { return c == kForbidden ? big : c; });

  const bool transposed = n > m;
  std::vector<int> assignment;
  if (transposed) {
    const std::vector<int> col_to_row = solve_wide(work.transpose());
    for (std::size_t c = 0; c < col_to_row.size(); ++c) {
      if (col_to_row[c] != MatchResult::kUnmatched) {
        result.row_to_col[static_cast<std::size_t>(col_to_row[c])] = static_cast<int>(c);
      }
    }
  } else {
    result.row_to_col = solve_wide(work);
  }

  for (std::size_t r = 0; r < result.row_to_col.size(); ++r) {
    const int c = result.row_to_col[r];
    if (c == MatchResult::kUnmatched) continue;
    const double value = cost(static_cast<Eigen::Index>(r), c);
    if (value == kForbidden) {
      throw LaneError(ErrorCode::kNoFeasibleAssignment,
                      "every complete assignment uses a forbidden pair");
    }
    result.total_cost += value;
  }
  return result;
}

}  // namespace lanekit
