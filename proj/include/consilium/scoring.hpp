#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "consilium/error.hpp"
#include "consilium/json_util.hpp"
#include "consilium/model.hpp"

namespace consilium {

inline constexpr std::string_view kSawMethod = "min-max/saw";

struct ScoreVector {
  std::string method{kSawMethod};
  // One entry per alternative, in matrix row order.
  std::vector<std::pair<std::string, double>> scores;

  double at(std::string_view id) const {
    for (const auto& [alt, s] : scores) {
      if (alt == id) return s;
    }
    fail(ErrorCode::not_found, "no score for alternative " + std::string(id));
  }

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

/// Strict total order over alternatives, best first.
struct Ranking {
  std::vector<std::string> ordered;
  bool strict = true;

  std::size_t size() const noexcept { return ordered.size(); }
  const std::string& front() const { return ordered.front(); }

  friend bool operator==(const Ranking&, const Ranking&) = default;
};

namespace detail {

// Maps each matrix column to its criterion; throws config_error naming the
// first id present on one side only.
inline std::vector<const Criterion*> bind_criteria(const EvaluationMatrix& m,
                                                   std::span<const Criterion> criteria) {
  std::unordered_map<std::string_view, const Criterion*> by_id;
  for (const auto& c : criteria) by_id.emplace(c.id, &c);
  std::vector<const Criterion*> bound;
  bound.reserve(m.cols());
  for (const auto& col : m.criteria()) {
    auto it = by_id.find(col);
    if (it == by_id.end()) fail(ErrorCode::config_error, "matrix column " + col + " has no criterion definition");
    bound.push_back(it->second);
  }
  for (const auto& c : criteria) {
    if (!m.criterion_index(c.id)) fail(ErrorCode::config_error, "criterion " + c.id + " has no matrix column");
  }
  return bound;
}

}  // namespace detail

/// Min-max normalizes every column into [0,1] following each criterion's
/// direction. A constant column maps to 0 for every alternative.
inline EvaluationMatrix normalize(const EvaluationMatrix& matrix, std::span<const Criterion> criteria) {
  auto bound = detail::bind_criteria(matrix, criteria);
  std::vector<double> out(matrix.values().size());
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    auto col = matrix.column(j);
    auto [lo_it, hi_it] = std::minmax_element(col.begin(), col.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double span = hi - lo;
    for (std::size_t a = 0; a < matrix.rows(); ++a) {
      double v = 0.0;
      if (span > 0.0) {
        v = bound[j]->direction == Direction::maximize ? (col[a] - lo) / span : (hi - col[a]) / span;
      }
      out[a * matrix.cols() + j] = v;
    }
  }
  return EvaluationMatrix(matrix.alternatives(), matrix.criteria(), std::move(out));
}

/// score(a) = sum over criteria of weight(c) * normalized(a, c).
inline ScoreVector weighted_score(const EvaluationMatrix& normalized, std::span<const Criterion> criteria) {
  if (auto v = validate_criteria(criteria); !v.empty()) throw ValidationError(std::move(v));
  auto bound = detail::bind_criteria(normalized, criteria);
  ScoreVector result;
  result.scores.reserve(normalized.rows());
  for (std::size_t a = 0; a < normalized.rows(); ++a) {
    double s = 0.0;
    for (std::size_t j = 0; j < normalized.cols(); ++j) s += bound[j]->weight * normalized(a, j);
    // weights may drift from 1 by the sum tolerance
    result.scores.emplace_back(normalized.alternatives()[a].id, std::clamp(s, 0.0, 1.0));
  }
  return result;
}

inline ScoreVector score_matrix(const EvaluationMatrix& matrix, std::span<const Criterion> criteria) {
  return weighted_score(normalize(matrix, criteria), criteria);
}

/// Descending by score. Exact ties keep the order of `alternatives`.
inline Ranking derive_ranking(const ScoreVector& scores, std::span<const std::string> alternatives) {
  std::unordered_map<std::string_view, double> by_id;
  for (const auto& [id, s] : scores.scores) by_id.emplace(id, s);
  std::vector<double> key;
  key.reserve(alternatives.size());
  for (const auto& id : alternatives) {
    auto it = by_id.find(id);
    if (it == by_id.end()) fail(ErrorCode::config_error, "no score for alternative " + id);
    key.push_back(it->second);
  }
  std::vector<std::size_t> order(alternatives.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return key[l] > key[r]; });

  Ranking ranking;
  ranking.ordered.reserve(order.size());
  for (auto i : order) ranking.ordered.push_back(alternatives[i]);
  return ranking;
}

inline Ranking derive_ranking(const ScoreVector& scores, const EvaluationMatrix& matrix) {
  auto ids = matrix.alternative_ids();
  return derive_ranking(scores, ids);
}

inline Json to_json(const ScoreVector& scores, const Ranking& ranking) {
  Json by_id = Json::object();
  for (const auto& [id, s] : scores.scores) by_id[id] = s;
  return Json{{"method", scores.method}, {"scores", by_id}, {"ranking", ranking.ordered}};
}

}  // namespace consilium
