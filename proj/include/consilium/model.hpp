#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "consilium/error.hpp"
#include "consilium/json_util.hpp"

namespace consilium {

struct Alternative {
  std::string id;
  std::string label;

  friend bool operator==(const Alternative&, const Alternative&) = default;
};

enum class Direction { maximize, minimize };

constexpr std::string_view to_string(Direction d) {
  return d == Direction::maximize ? "maximize" : "minimize";
}

inline std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "maximize") return Direction::maximize;
  if (text == "minimize") return Direction::minimize;
  return std::nullopt;
}

struct Criterion {
  std::string id;
  std::string name;
  double weight = 0.0;
  Direction direction = Direction::maximize;
  std::string scale;

  friend bool operator==(const Criterion&, const Criterion&) = default;
};

/// Absolute tolerance on the sum of a criteria set's weights.
inline constexpr double kWeightSumTolerance = 1e-9;

namespace detail {

inline std::string format_real(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

// Shortest representation that parses back to the same double.
inline std::string shortest_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline std::optional<double> parse_decimal(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value,
                                   std::chars_format::general);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::not_found, "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Returns the violated invariants of a criteria set; empty when valid.
inline std::vector<std::string> validate_criteria(std::span<const Criterion> criteria) {
  std::vector<std::string> violations;
  if (criteria.empty()) {
    violations.emplace_back("criteria set is empty");
    return violations;
  }
  std::unordered_set<std::string> seen;
  double sum = 0.0;
  for (const auto& c : criteria) {
    if (c.id.empty()) violations.emplace_back("criterion with empty id");
    else if (!seen.insert(c.id).second) violations.push_back("duplicate criterion id: " + c.id);
    if (!(c.weight >= 0.0 && c.weight <= 1.0)) {
      violations.push_back("criterion " + c.id + ": weight " + detail::format_real(c.weight) +
                           " outside [0,1]");
    }
    sum += c.weight;
  }
  if (!(std::abs(sum - 1.0) <= kWeightSumTolerance)) {
    violations.push_back("weights sum to " + detail::format_real(sum) + " ≠ 1");
  }
  return violations;
}

// Dense alternatives x criteria table. Criterion directions and weights are
// bound later (at normalization / scoring), so columns are identified by id.
class EvaluationMatrix {
 public:
  EvaluationMatrix(std::vector<Alternative> alternatives, std::vector<std::string> criteria,
                   std::vector<double> values)
      : alternatives_(std::move(alternatives)),
        criteria_(std::move(criteria)),
        values_(std::move(values)) {
    std::vector<std::string> violations;
    if (alternatives_.size() < 2) violations.emplace_back("matrix needs at least 2 alternatives");
    if (criteria_.empty()) violations.emplace_back("matrix needs at least 1 criterion");
    std::unordered_set<std::string> ids;
    std::set<std::string> duplicates;
    for (const auto& a : alternatives_) {
      if (a.id.empty()) violations.emplace_back("alternative with empty id");
      else if (!ids.insert(a.id).second) duplicates.insert(a.id);
    }
    for (const auto& d : duplicates) violations.push_back("duplicate alternative id: " + d);
    std::unordered_set<std::string> cids;
    for (const auto& c : criteria_) {
      if (c.empty()) violations.emplace_back("criterion column with empty id");
      else if (!cids.insert(c).second) violations.push_back("duplicate criterion column: " + c);
    }
    if (values_.size() != alternatives_.size() * criteria_.size()) {
      violations.emplace_back("matrix is not dense");
    } else {
      for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
          violations.push_back("non-finite value at (" + alternatives_[i / criteria_.size()].id +
                               ", " + criteria_[i % criteria_.size()] + ")");
        }
      }
    }
    if (!violations.empty()) throw ValidationError(std::move(violations));
  }

  std::size_t rows() const noexcept { return alternatives_.size(); }
  std::size_t cols() const noexcept { return criteria_.size(); }

  const std::vector<Alternative>& alternatives() const noexcept { return alternatives_; }
  const std::vector<std::string>& criteria() const noexcept { return criteria_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double operator()(std::size_t alt, std::size_t crit) const { return values_[alt * cols() + crit]; }

  std::span<const double> row(std::size_t alt) const {
    return std::span<const double>(values_).subspan(alt * cols(), cols());
  }

  std::vector<double> column(std::size_t crit) const {
    std::vector<double> out;
    out.reserve(rows());
    for (std::size_t a = 0; a < rows(); ++a) out.push_back((*this)(a, crit));
    return out;
  }

  std::optional<std::size_t> criterion_index(std::string_view id) const {
    for (std::size_t j = 0; j < criteria_.size(); ++j) {
      if (criteria_[j] == id) return j;
    }
    return std::nullopt;
  }

  std::vector<std::string> alternative_ids() const {
    std::vector<std::string> ids;
    ids.reserve(rows());
    for (const auto& a : alternatives_) ids.push_back(a.id);
    return ids;
  }

  friend bool operator==(const EvaluationMatrix&, const EvaluationMatrix&) = default;

 private:
  std::vector<Alternative> alternatives_;
  std::vector<std::string> criteria_;
  std::vector<double> values_;
};

/// Parses the matrix CSV format: header `alternative,<c-id>,...`, one row per
/// alternative, decimal cells with "." as separator. Row and column order are
/// preserved. Alternative labels default to their ids.
inline EvaluationMatrix load_matrix(std::string_view source) {
  std::vector<std::string> criteria;
  std::vector<Alternative> alternatives;
  std::vector<double> values;
  bool have_header = false;
  std::size_t line_no = 0;

  while (!source.empty()) {
    auto nl = source.find('\n');
    std::string_view line = source.substr(0, nl);
    source = nl == std::string_view::npos ? std::string_view{} : source.substr(nl + 1);
    ++line_no;
    if (detail::trim(line).empty()) continue;

    auto cells = detail::split(line, ',');
    if (!have_header) {
      if (cells.size() < 2) {
        fail(ErrorCode::parse_error,
             "line " + std::to_string(line_no) + ": header needs an alternative column and at least one criterion");
      }
      for (std::size_t j = 1; j < cells.size(); ++j) criteria.emplace_back(cells[j]);
      have_header = true;
      continue;
    }
    if (cells.size() != criteria.size() + 1) {
      fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(criteria.size() + 1) + " cells, found " +
                                       std::to_string(cells.size()));
    }
    std::string id(cells[0]);
    alternatives.push_back({id, id});
    for (std::size_t j = 1; j < cells.size(); ++j) {
      auto v = detail::parse_decimal(cells[j]);
      if (!v) {
        fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ", column " +
                                         std::to_string(j + 1) + " (" + criteria[j - 1] +
                                         "): '" + std::string(cells[j]) +
                                         "' is not a decimal number");
      }
      values.push_back(*v);
    }
  }
  if (!have_header) fail(ErrorCode::parse_error, "empty matrix source");
  return EvaluationMatrix(std::move(alternatives), std::move(criteria), std::move(values));
}

inline std::string serialize_matrix(const EvaluationMatrix& m) {
  std::string out = "alternative";
  for (const auto& c : m.criteria()) out += "," + c;
  out += '\n';
  for (std::size_t a = 0; a < m.rows(); ++a) {
    out += m.alternatives()[a].id;
    for (double v : m.row(a)) out += "," + detail::shortest_real(v);
    out += '\n';
  }
  return out;
}

inline EvaluationMatrix load_matrix_file(const std::string& path) {
  return load_matrix(detail::read_file(path));
}

// ---- criteria JSON: array of {id, name, weight, direction, scale} ----

inline Json to_json(const Criterion& c) {
  return Json{{"id", c.id},
              {"name", c.name},
              {"weight", c.weight},
              {"direction", to_string(c.direction)},
              {"scale", c.scale}};
}

inline Json to_json(std::span<const Criterion> criteria) {
  Json arr = Json::array();
  for (const auto& c : criteria) arr.push_back(to_json(c));
  return arr;
}

/// Structural parse only; call validate_criteria for the set invariants.
inline std::vector<Criterion> criteria_from_json(const Json& doc) {
  if (!doc.is_array()) fail(ErrorCode::parse_error, "criteria must be a JSON array");
  std::vector<Criterion> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    auto where = "criteria[" + std::to_string(i) + "]";
    if (!item.is_object()) fail(ErrorCode::parse_error, where + " is not an object");
    if (!item.contains("id") || !item["id"].is_string()) {
      fail(ErrorCode::parse_error, where + ": missing string field 'id'");
    }
    if (!item.contains("weight") || !item["weight"].is_number()) {
      fail(ErrorCode::parse_error, where + ": missing numeric field 'weight'");
    }
    if (!item.contains("direction") || !item["direction"].is_string()) {
      fail(ErrorCode::parse_error, where + ": missing field 'direction' (maximize|minimize)");
    }
    auto dir = parse_direction(item["direction"].get<std::string>());
    if (!dir) {
      fail(ErrorCode::parse_error,
           where + ": direction must be 'maximize' or 'minimize', got '" +
               item["direction"].get<std::string>() + "'");
    }
    Criterion c;
    c.id = item["id"].get<std::string>();
    c.name = item.value("name", c.id);
    c.weight = item["weight"].get<double>();
    c.direction = *dir;
    c.scale = item.value("scale", std::string{});
    out.push_back(std::move(c));
  }
  return out;
}

/// Parses and validates; throws ValidationError listing every violation.
inline std::vector<Criterion> load_criteria(std::string_view text) {
  Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::parse_error, "criteria: malformed JSON");
  auto criteria = criteria_from_json(doc);
  if (auto v = validate_criteria(criteria); !v.empty()) throw ValidationError(std::move(v));
  return criteria;
}

inline std::vector<Criterion> load_criteria_file(const std::string& path) {
  return load_criteria(detail::read_file(path));
}

}  // namespace consilium
