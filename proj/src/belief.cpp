#include "vanish/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "vanish/errors.hpp"
#include "vanish/matgame.hpp"

namespace vanish::belief {

BeliefGrid::BeliefGrid(std::size_t num_states, std::size_t resolution)
    : num_states_(num_states), resolution_(resolution) {
  if (num_states_ == 0 || num_states_ > kMaxStates) throw std::invalid_argument("BeliefGrid: need 1 to 4 states");
  if (resolution_ == 0) throw std::invalid_argument("BeliefGrid: resolution must be positive");
  const std::size_t d = num_states_ - 1;
  const std::size_t side = resolution_ + 1;
  std::size_t cells = 1;
  for (std::size_t k = 0; k < d; ++k) cells *= side;
  lookup_.assign(cells, 0);
  const double m = static_cast<double>(resolution_);
  std::array<std::size_t, kMaxStates> y{};
  std::uint32_t count = 0;
  for (std::size_t flat = 0; flat < cells; ++flat) {
    std::size_t rest = flat;
    bool ordered = true;
    for (std::size_t k = 0; k < d; ++k) {
      y[k] = rest % side;
      rest /= side;
      if (k > 0 && y[k] > y[k - 1]) ordered = false;
    }
    if (!ordered) {
      lookup_[flat] = std::numeric_limits<std::uint32_t>::max();
      continue;
    }
    lookup_[flat] = count++;
    double upper = m;
    for (std::size_t k = 0; k < d; ++k) {
      points_.push_back((upper - static_cast<double>(y[k])) / m);
      upper = static_cast<double>(y[k]);
    }
    points_.push_back(upper / m);
  }
  for (auto& v : lookup_) {
    if (v == std::numeric_limits<std::uint32_t>::max()) v = count;
  }
}

std::size_t BeliefGrid::index_of(std::span<const std::size_t> counts) const {
  if (counts.size() != num_states_) return size();
  std::size_t flat = 0;
  std::size_t stride = 1;
  std::size_t suffix = 0;
  for (std::size_t l = num_states_; l-- > 1;) suffix += counts[l];
  if (suffix + counts[0] != resolution_) return size();
  // y_k = Σ_{l>=k} counts_l for k = 1 … S−1.
  std::size_t y = suffix;
  for (std::size_t k = 1; k < num_states_; ++k) {
    flat += y * stride;
    stride *= resolution_ + 1;
    y -= counts[k];
  }
  return lookup_[flat];
}

BeliefGrid::Weights BeliefGrid::weights(std::span<const double> belief) const {
  Weights w;
  const std::size_t d = num_states_ - 1;
  if (d == 0) {
    w.index[0] = 0;
    w.weight[0] = 1.0;
    w.count = 1;
    return w;
  }
  const double m = static_cast<double>(resolution_);
  std::array<double, kMaxStates> y{};
  std::array<std::size_t, kMaxStates> base{};
  std::array<double, kMaxStates> frac{};
  double suffix = 0.0;
  for (std::size_t l = num_states_; l-- > 1;) {
    suffix += belief[l];
    y[l - 1] = std::clamp(m * suffix, 0.0, m);
  }
  for (std::size_t k = 1; k < d; ++k) y[k] = std::min(y[k], y[k - 1]);
  for (std::size_t k = 0; k < d; ++k) {
    base[k] = std::min(static_cast<std::size_t>(std::floor(y[k])), resolution_ - 1);
    frac[k] = y[k] - static_cast<double>(base[k]);
  }
  std::array<std::size_t, kMaxStates> order{};
  std::iota(order.begin(), order.begin() + d, 0);
  std::stable_sort(order.begin(), order.begin() + d, [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });

  const std::size_t side = resolution_ + 1;
  std::array<std::size_t, kMaxStates> stride{};
  stride[0] = 1;
  for (std::size_t k = 1; k < d; ++k) stride[k] = stride[k - 1] * side;
  std::size_t flat = 0;
  for (std::size_t k = 0; k < d; ++k) flat += base[k] * stride[k];

  auto add = [&](std::size_t flat_index, double weight) {
    if (weight <= 0.0) return;
    const std::uint32_t idx = lookup_[flat_index];
    if (idx >= size()) throw std::logic_error("BeliefGrid: simplex vertex outside the grid");
    w.index[w.count] = idx;
    w.weight[w.count] = weight;
    ++w.count;
  };
  add(flat, 1.0 - frac[order[0]]);
  for (std::size_t k = 0; k < d; ++k) {
    flat += stride[order[k]];
    add(flat, k + 1 < d ? frac[order[k]] - frac[order[k + 1]] : frac[order[k]]);
  }
  return w;
}

double apply_weights(const BeliefGrid::Weights& w, std::span<const double> values) {
  double v = 0.0;
  for (std::size_t c = 0; c < w.count; ++c) v += w.weight[c] * values[w.index[c]];
  return v;
}

double BeliefGrid::interpolate(std::span<const double> values, std::span<const double> belief) const {
  return apply_weights(weights(belief), values);
}

Vector belief_step(const GameSpec& spec, std::span<const double> belief, std::size_t i, std::size_t j, double delta) {
  return kernel::push_belief(belief, kernel::transition(spec.rates(i, j), delta));
}

namespace {

// Interpolation weights of every pushed grid belief, [point][pair].
std::vector<BeliefGrid::Weights> pushed_weights(const kernel::StageModel& model, const BeliefGrid& grid) {
  const std::size_t pairs = model.num_actions1() * model.num_actions2();
  std::vector<BeliefGrid::Weights> out(grid.size() * pairs);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t p = 0; p < pairs; ++p) {
      const Vector pushed =
          kernel::push_belief(grid.point(k), model.transition(p / model.num_actions2(), p % model.num_actions2()));
      out[k * pairs + p] = grid.weights(pushed);
    }
  }
  return out;
}

// ⟨ζ, payoffs[:, p]⟩ for every grid point, [point][pair].
std::vector<double> belief_payoffs(const Matrix& payoffs, const BeliefGrid& grid) {
  std::vector<double> out(grid.size() * payoffs.cols(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto zeta = grid.point(k);
    for (std::size_t p = 0; p < payoffs.cols(); ++p) {
      double v = 0.0;
      for (std::size_t z = 0; z < zeta.size(); ++z) v += zeta[z] * payoffs(z, p);
      out[k * payoffs.cols() + p] = v;
    }
  }
  return out;
}

void check_grid(const GameSpec& spec, const BeliefGrid& grid) {
  if (grid.num_states() != spec.num_states()) throw std::invalid_argument("belief grid does not match the game's states");
}

}  // namespace

ValueTable solve_belief_general(const GameSpec& spec, const Partition& partition, const BeliefGrid& grid,
                                kernel::PayoffMode mode) {
  check_grid(spec, grid);
  struct Cache {
    kernel::StageModel model;
    std::vector<BeliefGrid::Weights> next;
  };
  std::map<std::int64_t, Cache> caches;
  const std::size_t b = spec.num_actions2();
  const std::size_t pairs = spec.num_actions1() * b;
  ValueTable table(partition.knots(), grid.size());
  Matrix m(spec.num_actions1(), b);
  for (std::size_t n = partition.num_stages(); n-- > 0;) {
    const double delta = partition.duration(n);
    const auto key = std::llround(delta * 1e12);
    auto it = caches.find(key);
    if (it == caches.end()) {
      kernel::StageModel model(spec, delta, mode);
      auto next = pushed_weights(model, grid);
      it = caches.emplace(key, Cache{std::move(model), std::move(next)}).first;
    }
    const Cache& cache = it->second;
    const std::vector<double> stage = belief_payoffs(cache.model.payoffs_at(partition.time(n)), grid);
    const auto next = table.at(n + 1);
    auto current = table.at(n);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      for (std::size_t p = 0; p < pairs; ++p) {
        m(p / b, p % b) = stage[k * pairs + p] + apply_weights(cache.next[k * pairs + p], next);
      }
      current[k] = matgame::value(m);
    }
  }
  return table;
}

BeliefStationary solve_belief_stationary(const GameSpec& spec, double rho, double delta, const BeliefGrid& grid,
                                         const observed::IterationOptions& options) {
  check_grid(spec, grid);
  if (!(rho > 0.0) || !(delta > 0.0)) throw std::invalid_argument("solve_belief_stationary: rho and delta must be positive");
  const GameSpec discounted = spec.with_evaluation(Evaluation::exponential(rho));
  const kernel::StageModel model(discounted, delta);
  const std::vector<BeliefGrid::Weights> next = pushed_weights(model, grid);
  const std::vector<double> stage = belief_payoffs(model.payoffs_at(0.0), grid);
  const double beta = std::exp(-rho * delta);
  const double threshold = options.tolerance * (1.0 - beta) / beta;
  const std::size_t b = spec.num_actions2();
  const std::size_t pairs = spec.num_actions1() * b;

  BeliefStationary out;
  out.rho = rho;
  out.delta = delta;
  out.resolution = grid.resolution();
  out.values.assign(grid.size(), 0.0);
  Vector updated(grid.size());
  Matrix m(spec.num_actions1(), b);
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      for (std::size_t p = 0; p < pairs; ++p) {
        m(p / b, p % b) = stage[k * pairs + p] + beta * apply_weights(next[k * pairs + p], out.values);
      }
      updated[k] = matgame::value(m);
    }
    const double step = distance_inf(updated, out.values);
    std::swap(updated, out.values);
    if (step <= threshold) {
      out.iterations = it;
      return out;
    }
  }
  throw ConvergenceError("solve_belief_stationary: iteration cap exceeded");
}

std::vector<RefinementLevel> refine_and_compare(const GameSpec& spec, double rho, std::span<const double> deltas,
                                                std::span<const std::size_t> resolutions,
                                                const observed::IterationOptions& options) {
  std::vector<std::pair<double, std::size_t>> ladder;
  if (deltas.size() == resolutions.size()) {
    for (std::size_t k = 0; k < deltas.size(); ++k) ladder.emplace_back(deltas[k], resolutions[k]);
  } else {
    for (double d : deltas) {
      for (std::size_t m : resolutions) ladder.emplace_back(d, m);
    }
    std::stable_sort(ladder.begin(), ladder.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
  }
  std::vector<RefinementLevel> levels;
  std::vector<BeliefGrid> grids;
  for (const auto& [delta, m] : ladder) {
    grids.emplace_back(spec.num_states(), m);
    RefinementLevel level{delta, m, solve_belief_stationary(spec, rho, delta, grids.back(), options), 0.0};
    if (!levels.empty()) {
      const BeliefGrid& previous = grids[grids.size() - 2];
      const BeliefGrid& current = grids.back();
      for (std::size_t k = 0; k < current.size(); ++k) {
        const double coarse = previous.interpolate(levels.back().solution.values, current.point(k));
        level.cauchy_gap = std::max(level.cauchy_gap, std::abs(coarse - level.solution.values[k]));
      }
    }
    levels.push_back(std::move(level));
  }
  return levels;
}

}  // namespace vanish::belief
