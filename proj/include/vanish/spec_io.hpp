#pragma once

#include <string>

#include "vanish/diffgame.hpp"
#include "vanish/game.hpp"
#include "vanish/linalg.hpp"

namespace vanish {

// Game files are YAML (JSON is accepted as a subset). Every rejection is a
// ValidationError whose message starts with "<source>:<line>: ".
//
//   states:   [s0, s1]
//   actions1: [a0, a1]
//   actions2: [b0, b1]
//   payoff:   S × A × B nested lists
//   rates:    A × B nested lists of S × S generators
//   evaluation: {kind: exponential, rho: 1.0}
//            or {kind: tabulated, knots: [...], densities: [...]}
//   (optional tail_tolerance in either evaluation)

GameSpec parse_game_spec(const std::string& text, const std::string& source = "<input>");
GameSpec load_game_spec(const std::string& path);

// Differential-game problems reuse actions1, actions2 and evaluation, and add
//
//   box: {lower: [...], upper: [...]}            (1 to 3 coordinates)
//   dynamics: {family: zero}
//           | {family: constant, b: A × B × d}
//           | {family: linear, a: A × B × d × d, b: A × B × d}
//           | {family: separable-control, drift: d × d, u: A × d, w: B × d}
//   payoff: A × B                                 (value at z = 0)
//   payoff_slope: A × B × d                       (optional gradient in z)
//
// Lipschitz bounds are derived from the family coefficients.

diffgame::DiffGameSpec parse_diffgame_spec(const std::string& text, const std::string& source = "<input>");
diffgame::DiffGameSpec load_diffgame_spec(const std::string& path);

/// A matrix as a nested list, either bare or under the key `matrix`.
Matrix parse_matrix(const std::string& text, const std::string& source = "<input>");
Matrix load_matrix(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace vanish
