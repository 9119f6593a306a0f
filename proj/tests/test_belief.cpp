#include <cmath>
#include <stdexcept>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "vanish/belief.hpp"
#include "vanish/kernel.hpp"
#include "vanish/matgame.hpp"
#include "vanish/observed.hpp"

using namespace vanish;

namespace {

Vector random_belief(std::mt19937_64& rng, std::size_t s) {
  std::exponential_distribution<double> e(1.0);
  Vector z(s);
  double total = 0.0;
  for (double& v : z) total += (v = e(rng));
  for (double& v : z) v /= total;
  return z;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("grid enumerates the lattice points of the simplex") {
  for (std::size_t s = 1; s <= belief::kMaxStates; ++s)
    for (std::size_t m : {1u, 2u, 5u, 9u}) {
      const belief::BeliefGrid grid(s, m);
      CHECK(grid.size() == binomial(m + s - 1, s - 1));
      for (std::size_t k = 0; k < grid.size(); ++k) {
        double total = 0.0;
        std::vector<std::size_t> counts;
        for (double v : grid.point(k)) {
          total += v;
          counts.push_back(static_cast<std::size_t>(std::llround(v * static_cast<double>(m))));
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
        CHECK(grid.index_of(counts) == k);
      }
    }
  CHECK_THROWS_AS(belief::BeliefGrid(5, 4), std::invalid_argument);
  CHECK_THROWS_AS(belief::BeliefGrid(2, 0), std::invalid_argument);
}

TEST_CASE("interpolation is exact on affine maps") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (std::size_t s = 2; s <= belief::kMaxStates; ++s) {
    const belief::BeliefGrid grid(s, 7);
    for (int trial = 0; trial < 20; ++trial) {
      Vector a(s);
      for (double& v : a) v = n(rng);
      const double c = n(rng);
      Vector values(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) values[k] = dot(a, grid.point(k)) + c;
      for (int probe = 0; probe < 20; ++probe) {
        const Vector z = random_belief(rng, s);
        CHECK(std::abs(grid.interpolate(values, z) - (dot(a, z) + c)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("interpolation weights are a convex combination") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t s = 1; s <= belief::kMaxStates; ++s) {
    const belief::BeliefGrid grid(s, 6);
    Vector values(grid.size());
    for (double& v : values) v = u(rng);
    const double lo = *std::min_element(values.begin(), values.end());
    const double hi = *std::max_element(values.begin(), values.end());
    for (int probe = 0; probe < 200; ++probe) {
      const Vector z = random_belief(rng, s);
      const auto w = grid.weights(z);
      double total = 0.0;
      for (std::size_t k = 0; k < w.count; ++k) {
        CHECK(w.weight[k] >= 0.0);
        total += w.weight[k];
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
      const double v = grid.interpolate(values, z);
      CHECK(v >= lo - 1e-12);
      CHECK(v <= hi + 1e-12);
    }
  }
}

TEST_CASE("interpolation reproduces grid values") {
  const belief::BeliefGrid grid(3, 4);
  Vector values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = std::sin(3.0 * static_cast<double>(k));
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(grid.interpolate(values, grid.point(k)) == doctest::Approx(values[k]).epsilon(1e-12));
}

TEST_CASE("belief step examples") {
  const GameSpec still = testing_support::chain({1.0, 2.0}, Matrix(2, 2), Evaluation::exponential(1.0));
  CHECK(belief::belief_step(still, Vector{0.3, 0.7}, 0, 0, 0.5) == Vector{0.3, 0.7});

  const GameSpec g = random_instance(2, 3, 2, 2, 1.0);
  const auto p = kernel::transition(g.rates(1, 0), 0.3);
  const Vector d = belief::belief_step(g, Vector{0.0, 1.0, 0.0}, 1, 0, 0.3);
  for (std::size_t c = 0; c < 3; ++c) CHECK(d[c] == doctest::Approx(p(1, c)).epsilon(1e-14));

  const GameSpec sym = testing_support::chain({0.0, 0.0}, Matrix::from_rows({{-1, 1}, {1, -1}}), Evaluation::exponential(1.0));
  const Vector half = belief::belief_step(sym, Vector{1.0, 0.0}, 0, 0, std::log(2.0) / 2.0);
  CHECK(half[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(half[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("general recursion examples") {
  SUBCASE("single state matches the observed solver") {
    const GameSpec g = testing_support::static_game(Matrix::from_rows({{3, 0}, {1, 2}}), Evaluation::exponential(1.0));
    const Partition p = uniform_partition(3.0, 30);
    const ValueTable b = belief::solve_belief_general(g, p, belief::BeliefGrid(1, 1));
    const ValueTable o = observed::solve_general(g, p);
    CHECK(std::abs(b.at(0)[0] - o.at(0)[0]) <= 1e-8);
  }
  SUBCASE("state-blind payoff") {
    const Matrix m = Matrix::from_rows({{3, 0}, {1, 2}});
    const GameSpec g = testing_support::state_blind(random_instance(4, 3, 2, 2, 1.0), m);
    const Partition p = uniform_partition(2.0, 20);
    const belief::BeliefGrid grid(3, 5);
    const ValueTable v = belief::solve_belief_general(g, p, grid);
    for (std::size_t n = 0; n < p.num_stages(); n += 4)
      for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(std::abs(v.at(n)[k] - 1.5 * g.evaluation().mass(p.time(n), 2.0)) <= 1e-7);
  }
  SUBCASE("uncontrolled chain is affine in the belief") {
    const GameSpec g = testing_support::uncontrolled(random_instance(5, 3, 2, 2, 1.0));
    const Partition p = uniform_partition(2.0, 20);
    const belief::BeliefGrid grid(3, 4);
    const ValueTable v = belief::solve_belief_general(g, p, grid);
    const ValueTable o = observed::solve_general(g, p);
    for (std::size_t n = 0; n < p.num_stages(); n += 5)
      for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(v.at(n)[k] - dot(grid.point(k), o.at(n))) <= 1e-7);
  }
}

TEST_CASE("stationary examples") {
  SUBCASE("single state") {
    const GameSpec g = testing_support::static_game(Matrix::from_rows({{3, 0}, {1, 2}}), Evaluation::exponential(1.0));
    const auto v = belief::solve_belief_stationary(g, 1.0, 0.1, belief::BeliefGrid(1, 1));
    CHECK(v.values[0] == doctest::Approx(1.5).epsilon(1e-9));
  }
  SUBCASE("uncontrolled chain") {
    const GameSpec g = testing_support::uncontrolled(random_instance(1, 3, 2, 2, 1.0));
    const double delta = 0.1;
    const belief::BeliefGrid grid(3, 6);
    const auto v = belief::solve_belief_stationary(g, 1.0, delta, grid);
    const auto nu = observed::solve_stationary_uniform(g, 1.0, delta);
    const auto w = observed::solve_limit_equation(g, 1.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(std::abs(v.values[k] - dot(grid.point(k), nu.w)) <= 1e-7);
      CHECK(std::abs(v.values[k] - dot(grid.point(k), w.w)) <= 1e-7);
    }
  }
  SUBCASE("bounded with controlled transitions") {
    const GameSpec g = random_instance(1, 2, 2, 2, 1.0);
    const belief::BeliefGrid grid(2, 32);
    const auto v = belief::solve_belief_stationary(g, 1.0, 0.1, grid);
    CHECK(norm_inf(v.values) <= g.payoff_norm());
    double quotient = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k)
      quotient = std::max(quotient, std::abs(v.values[k + 1] - v.values[k]) * 32.0);
    CHECK(quotient <= 10.0 * g.payoff_norm());
  }
}

TEST_CASE("belief operator is a contraction") {
  const GameSpec g = random_instance(3, 2, 2, 2, 1.0);
  const double rho = 1.0, delta = 0.1, beta = std::exp(-rho * delta);
  const belief::BeliefGrid grid(2, 16);
  const kernel::StageModel model(g, delta);
  const Matrix pay = model.payoffs_at(0.0);
  auto sweep = [&](const Vector& v) {
    Vector out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      Matrix m(2, 2);
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
          double stage = 0.0;
          for (std::size_t z = 0; z < 2; ++z) stage += grid.point(k)[z] * pay(z, i * 2 + j);
          m(i, j) = stage + beta * grid.interpolate(v, kernel::push_belief(grid.point(k), model.transition(i, j)));
        }
      out[k] = matgame::value(m);
    }
    return out;
  };
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Vector a(grid.size()), b(grid.size());
    for (double& x : a) x = u(rng);
    for (double& x : b) x = u(rng);
    CHECK(distance_inf(sweep(a), sweep(b)) <= beta * distance_inf(a, b) + 1e-14);
  }
  const auto fixed = belief::solve_belief_stationary(g, rho, delta, grid);
  CHECK(distance_inf(sweep(fixed.values), fixed.values) <= 1e-9);
}

TEST_CASE("vertex gaps against the observed value are finite") {
  const GameSpec g = random_instance(1, 2, 2, 2, 1.0);
  const belief::BeliefGrid grid(2, 32);
  const auto v = belief::solve_belief_stationary(g, 1.0, 0.05, grid);
  const auto w = observed::solve_limit_equation(g, 1.0);
  const std::size_t vertices[2] = {grid.index_of(std::vector<std::size_t>{32, 0}),
                                   grid.index_of(std::vector<std::size_t>{0, 32})};
  for (std::size_t z = 0; z < 2; ++z) {
    const double gap = v.values[vertices[z]] - w.w[z];
    CHECK(std::isfinite(gap));
    CHECK(std::abs(gap) <= 2.0 * g.payoff_norm());
  }
}

TEST_CASE("refinement examples") {
  SUBCASE("uncontrolled levels differ only by discretization in time") {
    const GameSpec g = testing_support::uncontrolled(random_instance(2, 3, 2, 2, 1.0));
    const std::vector<double> deltas{0.1, 0.1};
    const std::vector<std::size_t> ms{4, 8};
    const auto levels = belief::refine_and_compare(g, 1.0, deltas, ms);
    REQUIRE(levels.size() == 2);
    CHECK(levels[0].cauchy_gap == 0.0);
    CHECK(levels[1].cauchy_gap <= 1e-7);
  }
  SUBCASE("single state") {
    const GameSpec g = testing_support::static_game(Matrix::from_rows({{1, -1}, {-1, 1}}), Evaluation::exponential(1.0));
    const std::vector<double> deltas{0.2, 0.1, 0.05};
    const std::vector<std::size_t> ms{1, 1, 1};
    for (const auto& l : belief::refine_and_compare(g, 1.0, deltas, ms)) CHECK(l.cauchy_gap <= 1e-9);
  }
  SUBCASE("seeded instance with joint refinement") {
    const GameSpec g = random_instance(1, 2, 2, 2, 1.0);
    const std::vector<double> deltas{0.1, 0.05, 0.025};
    const std::vector<std::size_t> ms{16, 32, 64};
    const auto levels = belief::refine_and_compare(g, 1.0, deltas, ms);
    REQUIRE(levels.size() == 3);
    CHECK(levels[1].cauchy_gap > 0.0);
    CHECK(levels[2].cauchy_gap < levels[1].cauchy_gap);
  }
  SUBCASE("cartesian ordering") {
    const GameSpec g = random_instance(1, 2, 2, 2, 1.0);
    const std::vector<double> deltas{0.1, 0.2};
    const std::vector<std::size_t> ms{8, 4, 6};
    const auto levels = belief::refine_and_compare(g, 1.0, deltas, ms);
    REQUIRE(levels.size() == 6);
    CHECK(levels[0].delta == 0.2);
    CHECK(levels[0].resolution == 4);
    CHECK(levels[2].resolution == 8);
    CHECK(levels[3].delta == 0.1);
  }
}
