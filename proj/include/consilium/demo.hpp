#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "consilium/error.hpp"
#include "consilium/json_util.hpp"
#include "consilium/model.hpp"
#include "consilium/service.hpp"
#include "consilium/session.hpp"

namespace consilium::demo {

/// "ISA_2" -> "AIS 02"; other ids pass through.
inline std::string isa_label(const std::string& id) {
  constexpr std::string_view prefix = "ISA_";
  if (id.size() <= prefix.size() || id.compare(0, prefix.size(), prefix) != 0) return id;
  auto digits = id.substr(prefix.size());
  if (digits.find_first_not_of("0123456789") != std::string::npos) return id;
  char buf[32];
  std::snprintf(buf, sizeof buf, "AIS %02d", std::stoi(digits));
  return buf;
}

struct WeightPreset {
  std::string participant;
  std::string description;
  std::map<std::string, double> weights;
};

struct Options {
  bool unanimous = false;
  // Jitters the preset weights; tallying is unaffected.
  std::optional<std::uint64_t> seed;
};

/// Three decision-maker profiles over the six ISA criteria. The first uses
/// the published criteria weights as given.
inline std::vector<WeightPreset> presets(const std::vector<Criterion>& criteria, const Options& options) {
  std::map<std::string, double> published;
  for (const auto& c : criteria) published[c.id] = c.weight;

  std::vector<WeightPreset> out{
      {"DM1", "published criteria weights", published},
      {"DM2", "crime focus",
       {{"c1", 0.40}, {"c2", 0.10}, {"c3", 0.05}, {"c4", 0.05}, {"c5", 0.30}, {"c6", 0.10}}},
      {"DM3", "population and perceived risk",
       {{"c1", 0.20}, {"c2", 0.30}, {"c3", 0.05}, {"c4", 0.05}, {"c5", 0.10}, {"c6", 0.30}}},
  };
  if (options.unanimous) {
    for (auto& p : out) {
      p.description = "published criteria weights";
      p.weights = published;
    }
  }
  if (options.seed) {
    std::mt19937_64 rng(*options.seed);
    for (auto& p : out) {
      double total = 0.0;
      for (auto& [cid, w] : p.weights) {
        // uniform factor in [0.5, 1.5) from the top 53 bits; portable across standard libraries
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        w *= 0.5 + u;
        total += w;
      }
      for (auto& [cid, w] : p.weights) w /= total;
      p.description += " (jittered)";
    }
  }
  return out;
}

struct Outcome {
  Session session;
  std::vector<WeightPreset> presets;
};

/// Runs the whole workflow in memory: create, enroll three decision makers,
/// submit one weight-derived ballot each, close balloting.
inline Outcome run(const EvaluationMatrix& matrix, const std::vector<Criterion>& criteria, const Options& options) {
  SessionSpec spec;
  for (const auto& a : matrix.alternatives()) spec.alternatives.push_back({a.id, isa_label(a.id)});
  spec.criteria = criteria;
  spec.matrix = matrix;

  auto now = utc_now();
  Outcome out;
  out.session = create_session(std::move(spec), {"facilitator", "Facilitator", Role::facilitator, {}}, "demo", now);
  out.presets = presets(criteria, options);
  for (const auto& p : out.presets) {
    add_participant(out.session, {p.participant, p.participant, Role::decision_maker, {}}, now);
  }
  open_balloting(out.session, now);
  for (const auto& p : out.presets) {
    submit_ballot(out.session, p.participant, suggest_ballot(out.session, p.weights).ranking, now);
  }
  close_balloting(out.session, now);
  return out;
}

inline std::string label_of(const Session& s, const std::string& id) {
  for (const auto& a : s.alternatives) {
    if (a.id == id) return a.label;
  }
  return id;
}

/// Top-k in the two-column final-classification layout.
inline std::string render_top(const Session& s, const VoteResult& r, std::size_t k = 5) {
  std::ostringstream out;
  out << "Integrated Security Area | Final Classification\n";
  for (std::size_t i = 0; i < k && i < r.ranking.size(); ++i) {
    out << label_of(s, r.ranking.ordered[i]) << " | " << (i + 1) << "°\n";
  }
  return out.str();
}

inline std::string render(const Outcome& o) {
  const auto& s = o.session;
  std::ostringstream out;
  out << "Session: " << s.alternatives.size() << " alternatives, " << s.criteria.size() << " criteria, "
      << o.presets.size() << " decision makers\n";
  for (const auto& p : o.presets) {
    const auto& ballot = s.ballots.at(p.participant);
    out << "  " << p.participant << " (" << p.description << "): ballot top "
        << label_of(s, ballot.front()) << '\n';
  }
  const auto& borda = get_results(s, Method::borda);
  const auto& condorcet = get_results(s, Method::condorcet);
  out << "\nBorda count\n" << render_top(s, borda);
  out << "\nCondorcet (Copeland completion; ";
  if (condorcet.condorcet_winner) out << "Condorcet winner: " << label_of(s, *condorcet.condorcet_winner);
  else out << "no Condorcet winner";
  out << ")\n" << render_top(s, condorcet);
  return out.str();
}

inline Json to_json(const Outcome& o, std::size_t k = 5) {
  const auto& s = o.session;
  Json ballots = Json::array();
  for (const auto& p : o.presets) {
    Json weights = Json::object();
    for (const auto& [cid, w] : p.weights) weights[cid] = w;
    ballots.push_back(Json{{"participant", p.participant},
                           {"description", p.description},
                           {"weights", std::move(weights)},
                           {"ranking", s.ballots.at(p.participant).ordered}});
  }
  Json results = Json::object();
  Json top = Json::object();
  for (auto m : {Method::borda, Method::condorcet}) {
    const auto& r = get_results(s, m);
    results[std::string(to_string(m))] = consilium::to_json(r);
    Json labels = Json::array();
    for (std::size_t i = 0; i < k && i < r.ranking.size(); ++i) labels.push_back(label_of(s, r.ranking.ordered[i]));
    top[std::string(to_string(m))] = std::move(labels);
  }
  return Json{{"ballots", std::move(ballots)}, {"results", std::move(results)}, {"top5", std::move(top)}};
}

}  // namespace consilium::demo
