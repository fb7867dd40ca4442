#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "consilium/error.hpp"
#include "consilium/json_util.hpp"
#include "consilium/model.hpp"
#include "consilium/scoring.hpp"
#include "consilium/voting.hpp"

namespace consilium {

// Phases advance strictly one step at a time, never backwards.
enum class Phase { setup, balloting, results, closed };

constexpr std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::setup: return "setup";
    case Phase::balloting: return "balloting";
    case Phase::results: return "results";
    case Phase::closed: return "closed";
  }
  return "?";
}

inline std::optional<Phase> parse_phase(std::string_view text) {
  for (auto p : {Phase::setup, Phase::balloting, Phase::results, Phase::closed}) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

enum class Role { facilitator, decision_maker };

constexpr std::string_view to_string(Role r) {
  return r == Role::facilitator ? "facilitator" : "decision_maker";
}

inline std::optional<Role> parse_role(std::string_view text) {
  if (text == "facilitator") return Role::facilitator;
  if (text == "decision_maker") return Role::decision_maker;
  return std::nullopt;
}

struct Participant {
  std::string id;
  std::string display_name;
  Role role = Role::decision_maker;
  std::string token;

  friend bool operator==(const Participant&, const Participant&) = default;
};

/// What a facilitator supplies when opening a session. An empty alternative
/// list is filled from the matrix rows.
struct SessionSpec {
  std::vector<Alternative> alternatives;
  std::vector<Criterion> criteria;
  std::optional<EvaluationMatrix> matrix;
};

struct Session {
  std::string id;
  Phase phase = Phase::setup;
  std::vector<Alternative> alternatives;
  std::vector<Criterion> criteria;
  std::optional<EvaluationMatrix> matrix;
  std::vector<Participant> participants;  // enrollment order
  std::map<std::string, Ranking> ballots;  // participant id -> ballot
  std::map<Method, VoteResult> results;
  std::string created_at;
  std::string updated_at;
  std::optional<std::string> cloned_from;

  std::vector<std::string> alternative_ids() const {
    std::vector<std::string> ids;
    ids.reserve(alternatives.size());
    for (const auto& a : alternatives) ids.push_back(a.id);
    return ids;
  }

  const Participant* find_participant(std::string_view pid) const {
    auto it = std::find_if(participants.begin(), participants.end(),
                           [&](const Participant& p) { return p.id == pid; });
    return it == participants.end() ? nullptr : &*it;
  }

  const Participant* find_by_token(std::string_view token) const {
    if (token.empty()) return nullptr;
    auto it = std::find_if(participants.begin(), participants.end(),
                           [&](const Participant& p) { return p.token == token; });
    return it == participants.end() ? nullptr : &*it;
  }

  const Participant& facilitator() const {
    for (const auto& p : participants) {
      if (p.role == Role::facilitator) return p;
    }
    fail(ErrorCode::domain_error, "session " + id + " has no facilitator");
  }

  friend bool operator==(const Session&, const Session&) = default;
};

namespace detail {

// ISO-8601 UTC timestamps are fixed width, so string order is time order.
inline void touch(Session& s, const std::string& now) {
  if (now > s.updated_at) s.updated_at = now;
}

inline void require_phase(const Session& s, Phase expected, std::string_view action) {
  if (s.phase != expected) {
    fail(ErrorCode::phase_error, std::string(action) + " requires phase " + std::string(to_string(expected)) +
                                     ", session is in " + std::string(to_string(s.phase)));
  }
}

inline std::vector<std::string> check_matrix_against(const std::vector<Alternative>& alternatives,
                                                     const std::vector<Criterion>& criteria,
                                                     const EvaluationMatrix& m) {
  std::vector<std::string> problems;
  if (criteria.empty()) problems.emplace_back("a matrix requires criteria definitions");
  std::vector<std::string> ids;
  for (const auto& a : alternatives) ids.push_back(a.id);
  if (ids != m.alternative_ids()) problems.emplace_back("matrix rows do not match the session alternatives");
  std::set<std::string> columns(m.criteria().begin(), m.criteria().end());
  std::set<std::string> defined;
  for (const auto& c : criteria) defined.insert(c.id);
  for (const auto& c : columns) {
    if (!defined.count(c)) problems.push_back("matrix column " + c + " has no criterion definition");
  }
  for (const auto& c : defined) {
    if (!columns.count(c)) problems.push_back("criterion " + c + " has no matrix column");
  }
  return problems;
}

inline Profile session_profile(const Session& s) {
  std::vector<Ballot> ballots;
  ballots.reserve(s.ballots.size());
  for (const auto& [pid, ranking] : s.ballots) ballots.push_back({pid, ranking});
  return Profile(s.alternative_ids(), std::move(ballots));
}

}  // namespace detail

inline Session create_session(SessionSpec spec, Participant facilitator, std::string id, const std::string& now) {
  if (spec.alternatives.empty() && spec.matrix) spec.alternatives = spec.matrix->alternatives();
  if (spec.alternatives.size() < 2) {
    fail(ErrorCode::domain_error, "a session needs at least 2 alternatives, got " +
                                      std::to_string(spec.alternatives.size()));
  }
  std::vector<std::string> problems;
  std::unordered_set<std::string> ids;
  for (auto& a : spec.alternatives) {
    if (a.id.empty()) problems.emplace_back("alternative with empty id");
    else if (!ids.insert(a.id).second) problems.push_back("duplicate alternative id: " + a.id);
    if (a.label.empty()) a.label = a.id;
  }
  if (!spec.criteria.empty()) {
    auto v = validate_criteria(spec.criteria);
    problems.insert(problems.end(), v.begin(), v.end());
  }
  if (spec.matrix) {
    auto v = detail::check_matrix_against(spec.alternatives, spec.criteria, *spec.matrix);
    problems.insert(problems.end(), v.begin(), v.end());
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
  if (spec.matrix) {
    spec.matrix = EvaluationMatrix(spec.alternatives, spec.matrix->criteria(), spec.matrix->values());
  }

  if (facilitator.id.empty()) fail(ErrorCode::validation_error, "facilitator needs an id");
  if (facilitator.role != Role::facilitator) fail(ErrorCode::role_error, "session creator must be a facilitator");
  if (facilitator.display_name.empty()) facilitator.display_name = facilitator.id;

  Session s;
  s.id = std::move(id);
  s.alternatives = std::move(spec.alternatives);
  s.criteria = std::move(spec.criteria);
  s.matrix = std::move(spec.matrix);
  s.participants.push_back(std::move(facilitator));
  s.created_at = now;
  s.updated_at = now;
  return s;
}

inline void add_participant(Session& s, Participant p, const std::string& now) {
  detail::require_phase(s, Phase::setup, "enrollment");
  if (p.id.empty()) fail(ErrorCode::validation_error, "participant needs an id");
  if (s.find_participant(p.id)) fail(ErrorCode::conflict, "participant " + p.id + " is already enrolled");
  if (p.role == Role::facilitator) {
    fail(ErrorCode::role_error, "session already has facilitator " + s.facilitator().id);
  }
  if (p.display_name.empty()) p.display_name = p.id;
  s.participants.push_back(std::move(p));
  detail::touch(s, now);
}

inline void open_balloting(Session& s, const std::string& now) {
  detail::require_phase(s, Phase::setup, "opening balloting");
  s.phase = Phase::balloting;
  detail::touch(s, now);
}

/// Freezes both methods' results together with the phase change.
inline void close_balloting(Session& s, const std::string& now) {
  detail::require_phase(s, Phase::balloting, "closing balloting");
  if (s.ballots.empty()) fail(ErrorCode::domain_error, "cannot close balloting with zero ballots");
  auto profile = detail::session_profile(s);
  std::map<Method, VoteResult> results;
  results.emplace(Method::borda, borda_result(profile));
  results.emplace(Method::condorcet, condorcet_result(profile));
  s.results = std::move(results);
  s.phase = Phase::results;
  detail::touch(s, now);
}

inline void close_session(Session& s, const std::string& now) {
  detail::require_phase(s, Phase::results, "closing the session");
  s.phase = Phase::closed;
  detail::touch(s, now);
}

/// Guarded single-step transition to `target`.
inline void advance_phase(Session& s, Phase target, const std::string& now) {
  switch (target) {
    case Phase::balloting: return open_balloting(s, now);
    case Phase::results: return close_balloting(s, now);
    case Phase::closed: return close_session(s, now);
    case Phase::setup: break;
  }
  fail(ErrorCode::phase_error, "cannot move session back to setup");
}

/// Stores the ballot; a resubmission replaces the participant's previous one.
inline void submit_ballot(Session& s, const std::string& participant, Ranking ranking, const std::string& now) {
  detail::require_phase(s, Phase::balloting, "ballot submission");
  const auto* p = s.find_participant(participant);
  if (!p) fail(ErrorCode::not_found, "participant " + participant + " is not enrolled");
  if (p->role != Role::decision_maker) fail(ErrorCode::role_error, "facilitators do not vote");
  auto ids = s.alternative_ids();
  if (auto problems = permutation_problems(ranking.ordered, ids); !problems.empty()) {
    throw ValidationError(std::move(problems));
  }
  ranking.strict = true;
  s.ballots[participant] = std::move(ranking);
  detail::touch(s, now);
}

struct Suggestion {
  ScoreVector scores;
  Ranking ranking;
};

/// Ranks the session matrix under personal weights. Nothing is stored.
inline Suggestion suggest_ballot(const Session& s, const std::map<std::string, double>& weights) {
  if (!s.matrix || s.criteria.empty()) {
    fail(ErrorCode::domain_error, "session " + s.id + " has no evaluation matrix");
  }
  for (const auto& [cid, w] : weights) {
    if (std::none_of(s.criteria.begin(), s.criteria.end(), [&](const Criterion& c) { return c.id == cid; })) {
      fail(ErrorCode::config_error, "unknown criterion " + cid);
    }
  }
  auto criteria = s.criteria;
  for (auto& c : criteria) {
    auto it = weights.find(c.id);
    if (it == weights.end()) fail(ErrorCode::config_error, "no weight given for criterion " + c.id);
    c.weight = it->second;
  }
  if (auto v = validate_criteria(criteria); !v.empty()) throw ValidationError(std::move(v));
  Suggestion out;
  out.scores = score_matrix(*s.matrix, criteria);
  out.ranking = derive_ranking(out.scores, *s.matrix);
  return out;
}

inline const VoteResult& get_results(const Session& s, Method method) {
  if (s.phase != Phase::results && s.phase != Phase::closed) {
    fail(ErrorCode::phase_error, "results are available once balloting closes; session is in " +
                                     std::string(to_string(s.phase)));
  }
  return s.results.at(method);
}

/// A fresh setup-phase copy for another round: same alternatives, criteria,
/// matrix and enrollment, no ballots.
inline Session clone_session(const Session& source, std::string id, const std::string& now) {
  Session s;
  s.id = std::move(id);
  s.alternatives = source.alternatives;
  s.criteria = source.criteria;
  s.matrix = source.matrix;
  s.participants = source.participants;
  s.created_at = now;
  s.updated_at = now;
  s.cloned_from = source.id;
  return s;
}

// ---- JSON ----

inline constexpr int kSessionSchema = 1;

inline Json matrix_to_json(const EvaluationMatrix& m) {
  Json rows = Json::array();
  for (std::size_t a = 0; a < m.rows(); ++a) rows.push_back(Json(std::vector<double>(m.row(a).begin(), m.row(a).end())));
  return Json{{"alternatives", m.alternative_ids()}, {"criteria", m.criteria()}, {"values", std::move(rows)}};
}

inline EvaluationMatrix matrix_from_json(const Json& j, const std::vector<Alternative>& alternatives) {
  auto ids = j.at("alternatives").get<std::vector<std::string>>();
  std::vector<Alternative> alts;
  for (const auto& id : ids) {
    auto it = std::find_if(alternatives.begin(), alternatives.end(), [&](const Alternative& a) { return a.id == id; });
    alts.push_back(it == alternatives.end() ? Alternative{id, id} : *it);
  }
  std::vector<double> values;
  for (const auto& row : j.at("values")) {
    for (const auto& v : row) values.push_back(v.get<double>());
  }
  return EvaluationMatrix(std::move(alts), j.at("criteria").get<std::vector<std::string>>(), std::move(values));
}

inline Json to_json(const Alternative& a) { return Json{{"id", a.id}, {"label", a.label}}; }

inline Json alternatives_to_json(const std::vector<Alternative>& alternatives) {
  Json arr = Json::array();
  for (const auto& a : alternatives) arr.push_back(to_json(a));
  return arr;
}

/// Accepts `["A", ...]` or `[{"id": "A", "label": "..."}, ...]`.
inline std::vector<Alternative> alternatives_from_json(const Json& j) {
  if (!j.is_array()) fail(ErrorCode::parse_error, "'alternatives' must be an array");
  std::vector<Alternative> out;
  for (const auto& item : j) {
    if (item.is_string()) {
      out.push_back({item.get<std::string>(), item.get<std::string>()});
    } else if (item.is_object() && item.contains("id") && item["id"].is_string()) {
      auto id = item["id"].get<std::string>();
      out.push_back({id, item.value("label", id)});
    } else {
      fail(ErrorCode::parse_error, "alternative entries must be strings or {id, label} objects");
    }
  }
  return out;
}

inline Json participant_to_json(const Participant& p, bool with_token) {
  Json j{{"id", p.id}, {"display_name", p.display_name}, {"role", to_string(p.role)}};
  if (with_token) j["token"] = p.token;
  return j;
}

/// Full persisted document, tokens and ballots included.
inline Json session_to_storage_json(const Session& s) {
  Json j;
  j["schema"] = kSessionSchema;
  j["id"] = s.id;
  j["phase"] = to_string(s.phase);
  j["created_at"] = s.created_at;
  j["updated_at"] = s.updated_at;
  j["cloned_from"] = s.cloned_from ? Json(*s.cloned_from) : Json(nullptr);
  j["alternatives"] = alternatives_to_json(s.alternatives);
  j["criteria"] = to_json(std::span<const Criterion>(s.criteria));
  j["matrix"] = s.matrix ? matrix_to_json(*s.matrix) : Json(nullptr);
  Json participants = Json::array();
  for (const auto& p : s.participants) participants.push_back(participant_to_json(p, true));
  j["participants"] = std::move(participants);
  Json ballots = Json::object();
  for (const auto& [pid, r] : s.ballots) ballots[pid] = r.ordered;
  j["ballots"] = std::move(ballots);
  Json results = Json::object();
  for (const auto& [m, r] : s.results) results[std::string(to_string(m))] = to_json(r);
  j["results"] = std::move(results);
  return j;
}

inline Session session_from_storage_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::parse_error, "session document must be an object");
  if (j.value("schema", 0) != kSessionSchema) {
    fail(ErrorCode::parse_error, "unsupported session schema " + j.value("schema", Json(nullptr)).dump());
  }
  try {
    Session s;
    s.id = j.at("id").get<std::string>();
    auto phase = parse_phase(j.at("phase").get<std::string>());
    if (!phase) fail(ErrorCode::parse_error, "unknown phase");
    s.phase = *phase;
    s.created_at = j.at("created_at").get<std::string>();
    s.updated_at = j.at("updated_at").get<std::string>();
    if (j.contains("cloned_from") && !j["cloned_from"].is_null()) s.cloned_from = j["cloned_from"].get<std::string>();
    s.alternatives = alternatives_from_json(j.at("alternatives"));
    s.criteria = criteria_from_json(j.at("criteria"));
    if (!j.at("matrix").is_null()) s.matrix = matrix_from_json(j["matrix"], s.alternatives);
    for (const auto& p : j.at("participants")) {
      auto role = parse_role(p.at("role").get<std::string>());
      if (!role) fail(ErrorCode::parse_error, "unknown role");
      s.participants.push_back({p.at("id").get<std::string>(), p.at("display_name").get<std::string>(), *role,
                                p.value("token", std::string{})});
    }
    for (const auto& [pid, r] : j.at("ballots").items()) {
      s.ballots[pid] = Ranking{r.get<std::vector<std::string>>(), true};
    }
    for (const auto& [m, r] : j.at("results").items()) {
      auto method = parse_method(m);
      if (!method) fail(ErrorCode::parse_error, "unknown result method " + m);
      s.results[*method] = vote_result_from_json(r);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse_error, std::string("malformed session document: ") + e.what());
  }
}

/// API representation. Tokens never appear; ballot contents only for the
/// facilitator, and a decision maker sees their own ballot.
inline Json session_view_json(const Session& s, const Participant* viewer) {
  Json j;
  j["id"] = s.id;
  j["phase"] = to_string(s.phase);
  j["created_at"] = s.created_at;
  j["updated_at"] = s.updated_at;
  j["cloned_from"] = s.cloned_from ? Json(*s.cloned_from) : Json(nullptr);
  j["alternatives"] = alternatives_to_json(s.alternatives);
  j["criteria"] = to_json(std::span<const Criterion>(s.criteria));
  j["matrix"] = s.matrix ? matrix_to_json(*s.matrix) : Json(nullptr);
  Json participants = Json::array();
  for (const auto& p : s.participants) participants.push_back(participant_to_json(p, false));
  j["participants"] = std::move(participants);
  std::size_t voters = 0;
  for (const auto& p : s.participants) voters += p.role == Role::decision_maker;
  j["decision_maker_count"] = voters;
  j["ballot_count"] = s.ballots.size();
  Json submitted = Json::array();
  for (const auto& [pid, r] : s.ballots) submitted.push_back(pid);
  j["ballots_submitted"] = std::move(submitted);
  if (viewer && viewer->role == Role::facilitator) {
    Json ballots = Json::object();
    for (const auto& [pid, r] : s.ballots) ballots[pid] = r.ordered;
    j["ballots"] = std::move(ballots);
  } else if (viewer) {
    auto it = s.ballots.find(viewer->id);
    j["my_ballot"] = it == s.ballots.end() ? Json(nullptr) : Json(it->second.ordered);
  }
  j["results_available"] = s.phase == Phase::results || s.phase == Phase::closed;
  return j;
}

}  // namespace consilium
