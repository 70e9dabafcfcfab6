#include "motcup/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "motcup/kernels.hpp"

namespace motcup {

namespace {

constexpr double kInadmissible = 1e6;

// Shortest-augmenting-path solver on a square matrix (Jonker-Volgenant
// flavor). Returns col_of_row; potentials are internal.
std::vector<int> solve_square(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
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
      for (int j = 0; j <= n; ++j) {
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
    } while (j0);
  }

  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) col_of_row[p[j] - 1] = j - 1;
  }
  return col_of_row;
}

// Row-order sum of the chosen cells. Kept as the single way totals are
// computed so equal-cost comparisons are bit-exact.
double assignment_cost(const Eigen::MatrixXd& cost,
                       const std::vector<std::pair<int, int>>& pairs) {
  double total = 0.0;
  for (const auto& [r, c] : pairs) total += cost(r, c);
  return total;
}

// Number of injective assignments of the smaller side into the larger one
// (falling factorial), saturating at limit+1.
double injection_count(int rows, int cols, double limit) {
  const int m = std::min(rows, cols);
  const int big = std::max(rows, cols);
  double count = 1.0;
  for (int k = 0; k < m; ++k) {
    count *= static_cast<double>(big - k);
    if (count > limit) return limit + 1.0;
  }
  return count;
}

struct LexSearch {
  const Eigen::MatrixXd& cost;
  double target;
  int rows, cols, skips_allowed;
  std::vector<char> col_used;
  std::vector<std::pair<int, int>> current;
  std::vector<std::pair<int, int>> found;
  long visits = 0;
  static constexpr long kVisitLimit = 4'000'000;

  // DFS in output order: for each row, real columns ascending, then "skip"
  // (only when more rows than columns). The first complete assignment whose
  // total equals `target` bit-exactly is the lexicographic minimum.
  bool dfs(int r, double sum, int skips) {
    if (++visits > kVisitLimit) return true;  // bail out, caller keeps JV result
    if (r == rows) {
      if (sum == target) {
        found = current;
        return true;
      }
      return false;
    }
    for (int c = 0; c < cols; ++c) {
      if (col_used[c]) continue;
      col_used[c] = 1;
      current.emplace_back(r, c);
      if (dfs(r + 1, sum + cost(r, c), skips)) return true;
      current.pop_back();
      col_used[c] = 0;
    }
    if (skips < skips_allowed) {
      if (dfs(r + 1, sum, skips + 1)) return true;
    }
    return false;
  }
};

// Re-select the lexicographically smallest assignment among those matching
// the optimal total exactly. Only attempted when the candidate space is
// small; the solver result stands otherwise.
std::vector<std::pair<int, int>> lex_refine(
    const Eigen::MatrixXd& cost, std::vector<std::pair<int, int>> pairs) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (injection_count(rows, cols, 1e6) > 1e6) return pairs;

  LexSearch search{cost,
                   assignment_cost(cost, pairs),
                   rows,
                   cols,
                   std::max(0, rows - cols),
                   std::vector<char>(cols, 0),
                   {},
                   {}};
  search.dfs(0, 0.0, 0);
  if (!search.found.empty()) return search.found;
  return pairs;
}

std::vector<int> complement(int n, const std::vector<std::pair<int, int>>& pairs,
                            bool first_member) {
  std::vector<char> hit(n, 0);
  for (const auto& [a, b] : pairs) hit[first_member ? a : b] = 1;
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (!hit[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

double iou(const BoxState& a, const BoxState& b) {
  const Corners ca = box_corners(a);
  const Corners cb = box_corners(b);
  const double ix = std::min(ca.x_max, cb.x_max) - std::max(ca.x_min, cb.x_min);
  const double iy = std::min(ca.y_max, cb.y_max) - std::max(ca.y_min, cb.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return inter / uni;
}

std::vector<std::pair<int, int>> hungarian(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!std::isfinite(cost(r, c))) {
        throw InvalidCostError("hungarian: cost matrix entries must be finite");
      }
    }
  }
  if (rows == 0 || cols == 0) return {};

  const int n = std::max(rows, cols);
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(n, n);
  padded.topLeftCorner(rows, cols) = cost;
  const std::vector<int> col_of_row = solve_square(padded);

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(std::min(rows, cols));
  for (int r = 0; r < rows; ++r) {
    if (col_of_row[r] < cols) pairs.emplace_back(r, col_of_row[r]);
  }
  return lex_refine(cost, std::move(pairs));
}

double snll(const Vec4& track_pred, const Detection& d) {
  double sum = 0.0;
  for (int i = 0; i < kNumVars; ++i) {
    sum += gaussian_logpdf(track_pred[i], d.mean[i], d.sigma[i]);
  }
  return -sum / kNumVars;
}

AssociationResult associate_base_sort(std::span<const Detection> dets,
                                      std::span<const BoxState> preds,
                                      double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold < 1.0)) {
    throw ConfigError("iou_threshold must lie in [0,1)");
  }
  const int nd = static_cast<int>(dets.size());
  const int nt = static_cast<int>(preds.size());
  std::vector<BoxState> det_boxes;
  det_boxes.reserve(dets.size());
  for (const auto& d : dets) det_boxes.push_back(d.box());
  const Eigen::MatrixXd cost = kernels::iou_cost(det_boxes, preds);

  AssociationResult res;
  for (const auto& [r, c] : hungarian(cost)) {
    // demote matched pairs below the gate
    if (iou(det_boxes[r], preds[c]) >= iou_threshold) {
      res.matched.emplace_back(r, c);
    }
  }
  res.unmatched_detections = complement(nd, res.matched, true);
  res.unmatched_tracklets = complement(nt, res.matched, false);
  return res;
}

AssociationResult associate_base_byte(std::span<const Detection> dets,
                                      std::span<const BoxState> preds,
                                      double score_high, double score_low,
                                      double iou_threshold) {
  if (!(score_low >= 0.0 && score_low < score_high && score_high <= 1.0)) {
    throw ConfigError("byte association requires 0 <= score_low < score_high <= 1");
  }
  const int nd = static_cast<int>(dets.size());

  std::vector<int> high_idx, low_idx;
  for (int i = 0; i < nd; ++i) {
    if (dets[i].score >= score_high) {
      high_idx.push_back(i);
    } else if (dets[i].score >= score_low) {
      low_idx.push_back(i);
    }
  }

  std::vector<Detection> high;
  high.reserve(high_idx.size());
  for (int i : high_idx) high.push_back(dets[i]);
  AssociationResult stage1 =
      associate_base_sort(high, preds, iou_threshold);

  AssociationResult res;
  for (const auto& [r, c] : stage1.matched) {
    res.matched.emplace_back(high_idx[r], c);
  }
  for (int r : stage1.unmatched_detections) {
    res.unmatched_detections.push_back(high_idx[r]);
  }

  // Stage 2: low-score detections against the tracklets stage 1 left over.
  std::vector<int> free_tracks = stage1.unmatched_tracklets;
  if (!low_idx.empty() && !free_tracks.empty()) {
    std::vector<Detection> low;
    low.reserve(low_idx.size());
    for (int i : low_idx) low.push_back(dets[i]);
    std::vector<BoxState> free_boxes;
    free_boxes.reserve(free_tracks.size());
    for (int t : free_tracks) free_boxes.push_back(preds[t]);

    AssociationResult stage2 =
        associate_base_sort(low, free_boxes, iou_threshold);
    for (const auto& [r, c] : stage2.matched) {
      res.matched.emplace_back(low_idx[r], free_tracks[c]);
    }
    std::vector<int> still_free;
    for (int c : stage2.unmatched_tracklets) still_free.push_back(free_tracks[c]);
    free_tracks = std::move(still_free);
  }

  res.unmatched_tracklets = std::move(free_tracks);
  std::sort(res.matched.begin(), res.matched.end());
  return res;
}

AssociationResult nllai(const AssociationResult& base,
                        std::span<const Detection> dets,
                        std::span<const Vec4> track_preds, double tau) {
  if (!std::isfinite(tau)) throw ConfigError("nllai: tau must be finite");

  const auto& ud = base.unmatched_detections;
  const auto& ut = base.unmatched_tracklets;
  AssociationResult res;
  res.matched = base.matched;
  if (ud.empty() || ut.empty()) {
    res.unmatched_detections = ud;
    res.unmatched_tracklets = ut;
    return res;
  }

  std::vector<Detection> sub_dets;
  std::vector<Vec4> sub_preds;
  sub_dets.reserve(ud.size());
  sub_preds.reserve(ut.size());
  for (int r : ud) sub_dets.push_back(dets[r]);
  for (int c : ut) sub_preds.push_back(track_preds[c]);
  const Eigen::MatrixXd sim = kernels::snll_matrix(sub_dets, sub_preds);

  std::vector<std::pair<int, int>> recovered;
  for (const auto& [r, c] : hungarian(sim)) {
    if (sim(r, c) <= tau) {
      recovered.emplace_back(r, c);
    }
  }
  for (const auto& [r, c] : recovered) {
    res.matched.emplace_back(ud[r], ut[c]);
  }
  for (int r : complement(static_cast<int>(ud.size()), recovered, true)) {
    res.unmatched_detections.push_back(ud[r]);
  }
  for (int c : complement(static_cast<int>(ut.size()), recovered, false)) {
    res.unmatched_tracklets.push_back(ut[c]);
  }
  return res;
}

std::vector<std::pair<int, int>> match_boxes_iou(std::span<const BoxState> a,
                                                 std::span<const BoxState> b,
                                                 double min_iou) {
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  if (na == 0 || nb == 0) return {};
  Eigen::MatrixXd cost(na, nb);
  Eigen::MatrixXd overlap(na, nb);
  for (int r = 0; r < na; ++r) {
    for (int c = 0; c < nb; ++c) {
      overlap(r, c) = iou(a[r], b[c]);
      cost(r, c) = overlap(r, c) >= min_iou ? 1.0 - overlap(r, c) : kInadmissible;
    }
  }
  std::vector<std::pair<int, int>> out;
  for (const auto& [r, c] : hungarian(cost)) {
    if (overlap(r, c) >= min_iou) out.emplace_back(r, c);
  }
  return out;
}

}  // namespace motcup
