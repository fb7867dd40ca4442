// Scores a small matrix, turns three weightings into ballots, and tallies them.

#include <iostream>

#include "consilium/consilium.hpp"

int main() {
  using namespace consilium;

  auto matrix = load_matrix(
      "site,cost,coverage,risk\n"
      "north,120,0.62,7\n"
      "river,95,0.48,9\n"
      "hill,140,0.81,4\n"
      "port,110,0.55,8\n");

  const std::vector<std::vector<double>> weightings{{0.5, 0.3, 0.2}, {0.2, 0.6, 0.2}, {0.2, 0.2, 0.6}};
  std::vector<Ballot> ballots;
  for (std::size_t i = 0; i < weightings.size(); ++i) {
    const auto& w = weightings[i];
    std::vector<Criterion> criteria{{"cost", "cost", w[0], Direction::minimize, ""},
                                    {"coverage", "coverage", w[1], Direction::maximize, ""},
                                    {"risk", "risk", w[2], Direction::minimize, ""}};
    auto scores = score_matrix(matrix, criteria);
    ballots.push_back({"dm" + std::to_string(i + 1), derive_ranking(scores, matrix)});
  }

  Profile profile(matrix.alternative_ids(), ballots);
  for (auto method : {Method::borda, Method::condorcet}) {
    auto result = vote(profile, method);
    std::cout << to_string(method) << ":";
    for (const auto& id : result.ranking.ordered) std::cout << ' ' << id;
    if (result.condorcet_winner) std::cout << "  (Condorcet winner " << *result.condorcet_winner << ')';
    std::cout << '\n';
  }
}
