#pragma once

#include <string>
#include <vector>

#include "vanish/game.hpp"

namespace testing_support {

inline std::vector<std::string> names(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

/// Game whose rate matrix is the same for every action pair.
inline vanish::GameSpec game_with_common_rates(const std::vector<vanish::Matrix>& payoff, const vanish::Matrix& q,
                                               const vanish::Evaluation& k) {
  const std::size_t a = payoff.front().rows();
  const std::size_t b = payoff.front().cols();
  std::vector<vanish::RateMatrix> rates(a * b, vanish::RateMatrix(q));
  return vanish::GameSpec(names("s", payoff.size()), names("a", a), names("b", b), payoff, rates, k);
}

/// One state, no transitions.
inline vanish::GameSpec static_game(const vanish::Matrix& m, const vanish::Evaluation& k) {
  return game_with_common_rates({m}, vanish::Matrix(1, 1), k);
}

/// A = B = 1 chain with payoff g and generator q.
inline vanish::GameSpec chain(const vanish::Vector& g, const vanish::Matrix& q, const vanish::Evaluation& k) {
  std::vector<vanish::Matrix> payoff;
  for (double v : g) payoff.push_back(vanish::Matrix(1, 1, v));
  return game_with_common_rates(payoff, q, k);
}

/// Keeps the rates of `spec` and makes the payoff independent of the state.
inline vanish::GameSpec state_blind(const vanish::GameSpec& spec, const vanish::Matrix& m) {
  std::vector<vanish::Matrix> payoff(spec.num_states(), m);
  std::vector<vanish::RateMatrix> rates;
  for (std::size_t i = 0; i < spec.num_actions1(); ++i)
    for (std::size_t j = 0; j < spec.num_actions2(); ++j) rates.push_back(spec.rates(i, j));
  return vanish::GameSpec(spec.states(), spec.actions1(), spec.actions2(), payoff, rates, spec.evaluation());
}

/// Single-action chain taken from the (0, 0) generator and payoff of `spec`.
inline vanish::GameSpec uncontrolled(const vanish::GameSpec& spec) {
  vanish::Vector g;
  for (std::size_t z = 0; z < spec.num_states(); ++z) g.push_back(spec.payoff(z, 0, 0));
  return chain(g, spec.rates(0, 0).matrix(), spec.evaluation());
}

}  // namespace testing_support
