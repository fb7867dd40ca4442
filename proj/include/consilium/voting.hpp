#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "consilium/error.hpp"
#include "consilium/json_util.hpp"
#include "consilium/scoring.hpp"

namespace consilium {

struct Ballot {
  std::string voter;
  Ranking ranking;

  friend bool operator==(const Ballot&, const Ballot&) = default;
};

/// Problems that keep `ranking` from being a strict permutation of
/// `alternatives`; empty when it is one.
inline std::vector<std::string> permutation_problems(std::span<const std::string> ranking,
                                                     std::span<const std::string> alternatives) {
  std::unordered_set<std::string_view> expected(alternatives.begin(), alternatives.end());
  std::unordered_set<std::string_view> seen;
  std::vector<std::string> problems;
  for (const auto& id : ranking) {
    if (!expected.count(id)) problems.push_back("unknown alternative " + id);
    else if (!seen.insert(id).second) problems.push_back("duplicate alternative " + id);
  }
  for (const auto& id : alternatives) {
    if (!seen.count(id)) problems.push_back("missing alternative " + id);
  }
  return problems;
}

// A validated set of strict ballots over a common alternative list. The
// alternative order is the session order used for every tie-break.
class Profile {
 public:
  Profile(std::vector<std::string> alternatives, std::vector<Ballot> ballots)
      : alternatives_(std::move(alternatives)), ballots_(std::move(ballots)) {
    if (ballots_.empty()) fail(ErrorCode::domain_error, "profile has no ballots");
    if (alternatives_.empty()) fail(ErrorCode::domain_error, "profile has no alternatives");

    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < alternatives_.size(); ++i) {
      if (!index.emplace(alternatives_[i], i).second) {
        fail(ErrorCode::validation_error, "duplicate alternative " + alternatives_[i]);
      }
    }
    std::vector<std::string> problems;
    std::unordered_set<std::string_view> voters;
    for (const auto& b : ballots_) {
      if (!voters.insert(b.voter).second) problems.push_back("voter " + b.voter + " appears more than once");
      for (auto& p : permutation_problems(b.ranking.ordered, alternatives_)) {
        problems.push_back("ballot of " + b.voter + ": " + p);
      }
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));

    orders_.reserve(ballots_.size());
    for (const auto& b : ballots_) {
      std::vector<std::size_t> order;
      order.reserve(alternatives_.size());
      for (const auto& id : b.ranking.ordered) order.push_back(index.at(id));
      orders_.push_back(std::move(order));
    }
  }

  const std::vector<std::string>& alternatives() const noexcept { return alternatives_; }
  const std::vector<Ballot>& ballots() const noexcept { return ballots_; }
  std::size_t voter_count() const noexcept { return ballots_.size(); }
  std::size_t size() const noexcept { return alternatives_.size(); }

  /// Alternative indices per ballot, best first.
  const std::vector<std::vector<std::size_t>>& orders() const noexcept { return orders_; }

 private:
  std::vector<std::string> alternatives_;
  std::vector<Ballot> ballots_;
  std::vector<std::vector<std::size_t>> orders_;
};

struct PairwiseMatrix {
  std::vector<std::string> alternatives;
  std::vector<std::int64_t> wins;  // row-major; wins[a][b] = voters ranking a above b
  std::int64_t voter_count = 0;

  std::size_t size() const noexcept { return alternatives.size(); }
  std::int64_t operator()(std::size_t a, std::size_t b) const { return wins[a * size() + b]; }

  friend bool operator==(const PairwiseMatrix&, const PairwiseMatrix&) = default;
};

enum class Method { borda, condorcet };

constexpr std::string_view to_string(Method m) { return m == Method::borda ? "borda" : "condorcet"; }

inline std::optional<Method> parse_method(std::string_view text) {
  if (text == "borda") return Method::borda;
  if (text == "condorcet") return Method::condorcet;
  return std::nullopt;
}

inline constexpr std::string_view kCondorcetCompletion = "copeland, then borda, then session order";

struct VoteResult {
  Method method = Method::borda;
  // Borda points, or Copeland scores for the condorcet method; session order.
  std::vector<std::pair<std::string, double>> scores;
  Ranking ranking;
  std::optional<std::string> condorcet_winner;
  std::optional<PairwiseMatrix> pairwise;

  bool has_condorcet_winner() const noexcept { return condorcet_winner.has_value(); }

  double score(std::string_view id) const {
    for (const auto& [alt, s] : scores) {
      if (alt == id) return s;
    }
    fail(ErrorCode::not_found, "no score for alternative " + std::string(id));
  }

  friend bool operator==(const VoteResult&, const VoteResult&) = default;
};

/// Each ballot gives its last-ranked alternative 1 point, the next one up 2,
/// and so on to n for the top; points are summed over ballots. Aligned with
/// profile.alternatives().
inline std::vector<std::int64_t> borda_scores(const Profile& profile) {
  const auto n = profile.size();
  std::vector<std::int64_t> points(n, 0);
  for (const auto& order : profile.orders()) {
    for (std::size_t pos = 0; pos < n; ++pos) points[order[pos]] += static_cast<std::int64_t>(n - pos);
  }
  return points;
}

inline PairwiseMatrix pairwise_matrix(const Profile& profile) {
  const auto n = profile.size();
  PairwiseMatrix pw{profile.alternatives(), std::vector<std::int64_t>(n * n, 0),
                    static_cast<std::int64_t>(profile.voter_count())};
  for (const auto& order : profile.orders()) {
    for (std::size_t hi = 0; hi < n; ++hi) {
      for (std::size_t lo = hi + 1; lo < n; ++lo) ++pw.wins[order[hi] * n + order[lo]];
    }
  }
  return pw;
}

namespace detail {

inline bool beats(const PairwiseMatrix& pw, std::size_t a, std::size_t b) {
  // strict majority: a tie at exactly V/2 is not a victory
  return 2 * pw(a, b) > pw.voter_count;
}

inline std::optional<std::size_t> condorcet_winner_index(const PairwiseMatrix& pw) {
  for (std::size_t a = 0; a < pw.size(); ++a) {
    bool all = true;
    for (std::size_t b = 0; b < pw.size() && all; ++b) all = (a == b) || beats(pw, a, b);
    if (all) return a;
  }
  return std::nullopt;
}

inline std::vector<std::pair<std::string, double>> label_scores(std::span<const std::string> ids,
                                                                std::span<const std::int64_t> values) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out.emplace_back(ids[i], static_cast<double>(values[i]));
  return out;
}

// Sorts indices by the given keys (all descending); remaining ties keep
// session order.
inline Ranking rank_by(std::span<const std::string> ids,
                       std::initializer_list<std::span<const std::int64_t>> keys) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    for (const auto& key : keys) {
      if (key[l] != key[r]) return key[l] > key[r];
    }
    return false;
  });
  Ranking ranking;
  for (auto i : order) ranking.ordered.push_back(ids[i]);
  return ranking;
}

}  // namespace detail

/// The alternative that beats every other by strict pairwise majority, if any.
inline std::optional<std::string> condorcet_winner(const PairwiseMatrix& pw) {
  if (auto i = detail::condorcet_winner_index(pw)) return pw.alternatives[*i];
  return std::nullopt;
}

/// Pairwise strict-majority wins minus losses; aligned with pw.alternatives.
inline std::vector<std::int64_t> copeland_scores(const PairwiseMatrix& pw) {
  std::vector<std::int64_t> out(pw.size(), 0);
  for (std::size_t a = 0; a < pw.size(); ++a) {
    for (std::size_t b = 0; b < pw.size(); ++b) {
      if (a == b) continue;
      if (detail::beats(pw, a, b)) ++out[a];
      else if (detail::beats(pw, b, a)) --out[a];
    }
  }
  return out;
}

inline VoteResult borda_result(const Profile& profile) {
  auto points = borda_scores(profile);
  VoteResult r;
  r.method = Method::borda;
  r.scores = detail::label_scores(profile.alternatives(), points);
  r.ranking = detail::rank_by(profile.alternatives(), {points});
  return r;
}

inline VoteResult condorcet_result(const Profile& profile) {
  auto pw = pairwise_matrix(profile);
  auto copeland = copeland_scores(pw);
  auto points = borda_scores(profile);
  VoteResult r;
  r.method = Method::condorcet;
  r.scores = detail::label_scores(profile.alternatives(), copeland);
  r.ranking = detail::rank_by(profile.alternatives(), {copeland, points});
  r.condorcet_winner = condorcet_winner(pw);
  r.pairwise = std::move(pw);
  return r;
}

inline VoteResult vote(const Profile& profile, Method method) {
  return method == Method::borda ? borda_result(profile) : condorcet_result(profile);
}

// ---- JSON ----

inline Json to_json(const PairwiseMatrix& pw) {
  Json rows = Json::array();
  for (std::size_t a = 0; a < pw.size(); ++a) {
    Json row = Json::array();
    for (std::size_t b = 0; b < pw.size(); ++b) row.push_back(pw(a, b));
    rows.push_back(std::move(row));
  }
  return Json{{"alternatives", pw.alternatives}, {"wins", std::move(rows)}, {"voter_count", pw.voter_count}};
}

inline PairwiseMatrix pairwise_from_json(const Json& j) {
  PairwiseMatrix pw;
  pw.alternatives = j.at("alternatives").get<std::vector<std::string>>();
  pw.voter_count = j.at("voter_count").get<std::int64_t>();
  for (const auto& row : j.at("wins")) {
    for (const auto& cell : row) pw.wins.push_back(cell.get<std::int64_t>());
  }
  if (pw.wins.size() != pw.size() * pw.size()) fail(ErrorCode::parse_error, "pairwise matrix is not square");
  return pw;
}

inline Json to_json(const VoteResult& r) {
  Json scores = Json::object();
  for (const auto& [id, s] : r.scores) scores[id] = s;
  Json j{{"method", to_string(r.method)}, {"scores", std::move(scores)}, {"ranking", r.ranking.ordered}};
  j["has_condorcet_winner"] = r.has_condorcet_winner();
  j["condorcet_winner"] = r.condorcet_winner ? Json(*r.condorcet_winner) : Json(nullptr);
  if (r.method == Method::condorcet) j["completion"] = kCondorcetCompletion;
  if (r.pairwise) j["pairwise"] = to_json(*r.pairwise);
  return j;
}

inline VoteResult vote_result_from_json(const Json& j) {
  VoteResult r;
  auto method = parse_method(j.at("method").get<std::string>());
  if (!method) fail(ErrorCode::parse_error, "unknown method " + j.at("method").get<std::string>());
  r.method = *method;
  for (const auto& [id, s] : j.at("scores").items()) r.scores.emplace_back(id, s.get<double>());
  r.ranking.ordered = j.at("ranking").get<std::vector<std::string>>();
  if (!j.at("condorcet_winner").is_null()) r.condorcet_winner = j["condorcet_winner"].get<std::string>();
  if (j.contains("pairwise")) r.pairwise = pairwise_from_json(j["pairwise"]);
  return r;
}

/// Ballots document: `{alternatives?: [id...], voters: [{id, ranking: [id...]}]}`.
/// Without `alternatives`, session order is the first voter's ranking.
inline Profile profile_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("voters") || !doc["voters"].is_array()) {
    fail(ErrorCode::parse_error, "ballots document needs a 'voters' array");
  }
  std::vector<Ballot> ballots;
  for (std::size_t i = 0; i < doc["voters"].size(); ++i) {
    const auto& v = doc["voters"][i];
    auto where = "voters[" + std::to_string(i) + "]";
    if (!v.is_object() || !v.contains("id") || !v["id"].is_string()) {
      fail(ErrorCode::parse_error, where + ": missing string field 'id'");
    }
    if (!v.contains("ranking") || !v["ranking"].is_array()) {
      fail(ErrorCode::parse_error, where + ": missing array field 'ranking'");
    }
    Ballot b{v["id"].get<std::string>(), {}};
    for (const auto& id : v["ranking"]) {
      if (!id.is_string()) fail(ErrorCode::parse_error, where + ": ranking entries must be strings");
      b.ranking.ordered.push_back(id.get<std::string>());
    }
    ballots.push_back(std::move(b));
  }
  if (ballots.empty()) fail(ErrorCode::domain_error, "profile has no ballots");
  std::vector<std::string> alternatives;
  if (doc.contains("alternatives")) {
    if (!doc["alternatives"].is_array()) fail(ErrorCode::parse_error, "'alternatives' must be an array");
    for (const auto& id : doc["alternatives"]) {
      if (!id.is_string()) fail(ErrorCode::parse_error, "'alternatives' entries must be strings");
      alternatives.push_back(id.get<std::string>());
    }
  } else {
    alternatives = ballots.front().ranking.ordered;
  }
  return Profile(std::move(alternatives), std::move(ballots));
}

inline Profile load_profile(std::string_view text) {
  Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::parse_error, "ballots: malformed JSON");
  return profile_from_json(doc);
}

inline Json to_json(const Profile& profile) {
  Json voters = Json::array();
  for (const auto& b : profile.ballots()) voters.push_back(Json{{"id", b.voter}, {"ranking", b.ranking.ordered}});
  return Json{{"alternatives", profile.alternatives()}, {"voters", std::move(voters)}};
}

}  // namespace consilium
