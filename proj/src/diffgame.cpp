#include "vanish/diffgame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

#include "vanish/errors.hpp"
#include "vanish/matgame.hpp"
#include "vanish/quadrature.hpp"

namespace vanish::diffgame {

namespace {

// RK4 local error scales like (L h)^5 / 120; L h <= 0.06 keeps it near 1e-8.
constexpr double kStepTimesLipschitz = 0.02;

State axpy(const State& z, double a, const State& k) {
  State out;
  for (std::size_t d = 0; d < kMaxDim; ++d) out[d] = z[d] + a * k[d];
  return out;
}

double sup_distance(const State& a, const State& b, std::size_t dim) {
  double m = 0.0;
  for (std::size_t d = 0; d < dim; ++d) m = std::max(m, std::abs(a[d] - b[d]));
  return m;
}

double max_substep(const DiffGameSpec& spec) {
  const double lip = spec.lipschitz_dynamics();
  return lip > 0.0 ? kStepTimesLipschitz / lip : std::numeric_limits<double>::infinity();
}

template <class Field>
State rk4(const Field& field, State z, double h, double h_max) {
  if (h <= 0.0) return z;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(h / h_max)));
  const double dt = h / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const State k1 = field(z);
    const State k2 = field(axpy(z, 0.5 * dt, k1));
    const State k3 = field(axpy(z, 0.5 * dt, k2));
    const State k4 = field(axpy(z, dt, k3));
    for (std::size_t d = 0; d < kMaxDim; ++d) z[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
  }
  return z;
}

// Integrates the field over [0, h], recording the state at each (increasing)
// quadrature node; returns the unclamped end state.
template <class Field>
State trajectory(const Field& field, const State& z0, double h, const QuadratureRule& rule, double h_max,
                 std::span<State> at_nodes) {
  State z = z0;
  double s = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    z = rk4(field, z, rule.nodes[q] - s, h_max);
    s = rule.nodes[q];
    at_nodes[q] = z;
  }
  return rk4(field, z, h - s, h_max);
}

std::int64_t duration_key(double delta) { return std::llround(delta * 1e12); }

// Per-duration cache for pure-action stages: g along each pure flow at the
// quadrature nodes, and the interpolation stencil of each flow's end point.
struct PureStageCache {
  QuadratureRule rule;
  std::vector<double> payoff_at_nodes;  // [node][pair][q]
  std::vector<StateGrid::Stencil> next;  // [node][pair]
};

PureStageCache build_pure_cache(const DiffGameSpec& spec, const StateGrid& grid, double delta,
                                FlowDiagnostics* diagnostics) {
  PureStageCache cache;
  cache.rule = gauss_legendre8(0.0, delta, 1);
  const std::size_t pairs = spec.num_actions1() * spec.num_actions2();
  const std::size_t nq = cache.rule.nodes.size();
  cache.payoff_at_nodes.resize(grid.size() * pairs * nq);
  cache.next.resize(grid.size() * pairs);
  const double h_max = max_substep(spec);
  std::vector<State> at_nodes(nq);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const State z0 = grid.node(k);
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::size_t i = p / spec.num_actions2();
      const std::size_t j = p % spec.num_actions2();
      auto field = [&](const State& z) { return spec.dynamics(z, i, j); };
      State end = trajectory(field, z0, delta, cache.rule, h_max, at_nodes);
      for (std::size_t q = 0; q < nq; ++q) {
        cache.payoff_at_nodes[(k * pairs + p) * nq + q] = spec.payoff(at_nodes[q], i, j);
      }
      if (spec.box().clamp(end) && diagnostics) ++diagnostics->clamped;
      cache.next[k * pairs + p] = grid.stencil(end);
    }
  }
  return cache;
}

class PureCacheStore {
 public:
  PureCacheStore(const DiffGameSpec& spec, const StateGrid& grid, FlowDiagnostics* diagnostics)
      : spec_(spec), grid_(grid), diagnostics_(diagnostics) {}

  const PureStageCache& get(double delta) {
    const auto key = duration_key(delta);
    auto it = caches_.find(key);
    if (it == caches_.end()) {
      it = caches_.emplace(key, build_pure_cache(spec_, grid_, delta, diagnostics_)).first;
    }
    return it->second;
  }

 private:
  const DiffGameSpec& spec_;
  const StateGrid& grid_;
  FlowDiagnostics* diagnostics_;
  std::map<std::int64_t, PureStageCache> caches_;
};

std::vector<double> weighted_density(const Evaluation& k, const QuadratureRule& rule, double t) {
  std::vector<double> w(rule.nodes.size());
  for (std::size_t q = 0; q < w.size(); ++q) w[q] = rule.weights[q] * k.density(t + rule.nodes[q]);
  return w;
}

// Backward induction over pure-action stage matrices; `stage_value` maps the
// A×B matrix of a node to its value.
template <class StageValue>
ValueTable backward_pure(const DiffGameSpec& spec, const Partition& partition, const StateGrid& grid,
                         FlowDiagnostics* diagnostics, StageValue stage_value) {
  if (grid.dim() != spec.dim()) throw std::invalid_argument("diffgame: grid and spec dimensions differ");
  ValueTable table(partition.knots(), grid.size());
  PureCacheStore store(spec, grid, diagnostics);
  const std::size_t a = spec.num_actions1();
  const std::size_t b = spec.num_actions2();
  const std::size_t pairs = a * b;
  Matrix m(a, b);
  for (std::size_t n = partition.num_stages(); n-- > 0;) {
    const PureStageCache& cache = store.get(partition.duration(n));
    const std::vector<double> kw = weighted_density(spec.evaluation(), cache.rule, partition.time(n));
    const std::size_t nq = kw.size();
    const auto next = table.at(n + 1);
    auto current = table.at(n);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      for (std::size_t p = 0; p < pairs; ++p) {
        const double* gq = &cache.payoff_at_nodes[(k * pairs + p) * nq];
        double stage = 0.0;
        for (std::size_t q = 0; q < nq; ++q) stage += kw[q] * gq[q];
        m(p / b, p % b) = stage + apply_stencil(cache.next[k * pairs + p], next);
      }
      current[k] = stage_value(m);
    }
  }
  return table;
}

// Pattern search on the probability simplex: moves mass between coordinate
// pairs with a step that halves once no move improves, down to `resolution`.
struct SearchResult {
  Vector point;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool capped = false;
};

template <class Objective>
SearchResult simplex_search(std::size_t n, const std::vector<Vector>& starts, const Objective& objective,
                            bool maximize, double resolution, std::size_t cap) {
  SearchResult best;
  auto better = [&](double candidate, double incumbent) {
    return maximize ? candidate > incumbent + 1e-15 : candidate < incumbent - 1e-15;
  };
  for (const Vector& s : starts) {
    const double v = objective(s);
    ++best.evaluations;
    if (best.point.empty() || better(v, best.value)) {
      best.point = s;
      best.value = v;
    }
  }
  if (n < 2) return best;
  Vector candidate(n);
  for (double step = 0.25;; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t to = 0; to < n; ++to) {
        for (std::size_t from = 0; from < n; ++from) {
          if (from == to || best.point[from] <= 0.0) continue;
          const double move = std::min(step, best.point[from]);
          candidate = best.point;
          candidate[to] += move;
          candidate[from] -= move;
          if (candidate[from] < 1e-15) candidate[from] = 0.0;
          const double v = objective(candidate);
          if (++best.evaluations > cap) {
            best.capped = true;
            return best;
          }
          if (better(v, best.value)) {
            best.point = candidate;
            best.value = v;
            improved = true;
          }
        }
      }
    }
    if (step <= resolution) break;
  }
  return best;
}

std::vector<Vector> vertices(std::size_t n) {
  std::vector<Vector> out;
  for (std::size_t k = 0; k < n; ++k) {
    Vector e(n, 0.0);
    e[k] = 1.0;
    out.push_back(std::move(e));
  }
  return out;
}

State averaged_field(const DiffGameSpec& spec, const State& z, std::span<const double> x,
                     std::span<const double> y) {
  State out{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double w = x[i] * y[j];
      if (w == 0.0) continue;
      const State f = spec.dynamics(z, i, j);
      for (std::size_t d = 0; d < kMaxDim; ++d) out[d] += w * f[d];
    }
  }
  return out;
}

double averaged_payoff(const DiffGameSpec& spec, const State& z, std::span<const double> x,
                       std::span<const double> y) {
  double out = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double w = x[i] * y[j];
      if (w != 0.0) out += w * spec.payoff(z, i, j);
    }
  }
  return out;
}

}  // namespace

bool Box::contains(const State& z, double tol) const {
  for (std::size_t d = 0; d < dim(); ++d) {
    if (z[d] < lower[d] - tol || z[d] > upper[d] + tol) return false;
  }
  return true;
}

bool Box::clamp(State& z) const {
  bool moved = false;
  for (std::size_t d = 0; d < dim(); ++d) {
    if (z[d] < lower[d]) {
      z[d] = lower[d];
      moved = true;
    } else if (z[d] > upper[d]) {
      z[d] = upper[d];
      moved = true;
    }
  }
  return moved;
}

DiffGameSpec::DiffGameSpec(Box box, std::size_t num_actions1, std::size_t num_actions2, Dynamics dynamics,
                           PayoffFlow payoff, double lipschitz_dynamics, double lipschitz_payoff,
                           Evaluation evaluation, std::string family)
    : box_(std::move(box)),
      num_actions1_(num_actions1),
      num_actions2_(num_actions2),
      dynamics_(std::move(dynamics)),
      payoff_(std::move(payoff)),
      lipschitz_dynamics_(lipschitz_dynamics),
      lipschitz_payoff_(lipschitz_payoff),
      evaluation_(std::move(evaluation)),
      family_(std::move(family)) {
  if (box_.dim() == 0 || box_.dim() > kMaxDim || box_.upper.size() != box_.dim()) {
    throw ValidationError("diffgame: box dimension must be between 1 and 3");
  }
  for (std::size_t d = 0; d < box_.dim(); ++d) {
    if (!(box_.upper[d] > box_.lower[d])) throw ValidationError("diffgame: box bounds must satisfy lower < upper");
  }
  if (num_actions1_ == 0 || num_actions2_ == 0) throw ValidationError("diffgame: action sets must be nonempty");
  if (!dynamics_ || !payoff_) throw ValidationError("diffgame: dynamics and payoff are required");
  if (!(lipschitz_dynamics_ >= 0.0) || !(lipschitz_payoff_ >= 0.0)) {
    throw ValidationError("diffgame: Lipschitz bounds must be nonnegative");
  }
}

DiffGameSpec DiffGameSpec::with_evaluation(Evaluation evaluation) const {
  return DiffGameSpec(box_, num_actions1_, num_actions2_, dynamics_, payoff_, lipschitz_dynamics_,
                      lipschitz_payoff_, std::move(evaluation), family_);
}

std::optional<Violation> validate(const DiffGameSpec& spec, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t dim = spec.dim();
  auto random_state = [&] {
    State z{};
    for (std::size_t d = 0; d < dim; ++d) {
      z[d] = spec.box().lower[d] + unit(rng) * (spec.box().upper[d] - spec.box().lower[d]);
    }
    return z;
  };
  double worst_f = 0.0;
  double worst_g = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const State z = random_state();
    State w = random_state();
    if (s % 2 == 0) {
      // Nearby pair: probes local slopes.
      for (std::size_t d = 0; d < dim; ++d) {
        const double width = spec.box().upper[d] - spec.box().lower[d];
        w[d] = std::clamp(z[d] + 1e-3 * width * (2.0 * unit(rng) - 1.0), spec.box().lower[d], spec.box().upper[d]);
      }
    }
    const double dz = sup_distance(z, w, dim);
    for (std::size_t i = 0; i < spec.num_actions1(); ++i) {
      for (std::size_t j = 0; j < spec.num_actions2(); ++j) {
        const State fz = spec.dynamics(z, i, j);
        const State fw = spec.dynamics(w, i, j);
        const double gz = spec.payoff(z, i, j);
        const double gw = spec.payoff(w, i, j);
        for (std::size_t d = 0; d < dim; ++d) {
          if (!std::isfinite(fz[d]) || !std::isfinite(fw[d])) return Violation{"dynamics is not finite on the box"};
        }
        if (!std::isfinite(gz) || !std::isfinite(gw)) return Violation{"payoff is not finite on the box"};
        if (dz <= 0.0) continue;
        worst_f = std::max(worst_f, sup_distance(fz, fw, dim) / dz);
        worst_g = std::max(worst_g, std::abs(gz - gw) / dz);
      }
    }
  }
  if (worst_f > 1.01 * spec.lipschitz_dynamics() + 1e-12) {
    std::ostringstream msg;
    msg << "dynamics difference quotient " << worst_f << " exceeds declared Lipschitz bound "
        << spec.lipschitz_dynamics();
    return Violation{msg.str()};
  }
  if (worst_g > 1.01 * spec.lipschitz_payoff() + 1e-12) {
    std::ostringstream msg;
    msg << "payoff difference quotient " << worst_g << " exceeds declared Lipschitz bound "
        << spec.lipschitz_payoff();
    return Violation{msg.str()};
  }
  return std::nullopt;
}

Dynamics zero_dynamics() {
  return [](const State&, std::size_t, std::size_t) { return State{}; };
}

Dynamics constant_dynamics(std::vector<std::vector<State>> b) {
  return [b = std::move(b)](const State&, std::size_t i, std::size_t j) { return b[i][j]; };
}

Dynamics linear_dynamics(std::vector<std::vector<Matrix>> a, std::vector<std::vector<State>> b) {
  return [a = std::move(a), b = std::move(b)](const State& z, std::size_t i, std::size_t j) {
    const Matrix& m = a[i][j];
    State out = b[i][j];
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) out[r] += m(r, c) * z[c];
    }
    return out;
  };
}

Dynamics separable_control_dynamics(Matrix drift, std::vector<State> u, std::vector<State> w) {
  return [drift = std::move(drift), u = std::move(u), w = std::move(w)](const State& z, std::size_t i,
                                                                       std::size_t j) {
    State out{};
    for (std::size_t r = 0; r < drift.rows(); ++r) {
      for (std::size_t c = 0; c < drift.cols(); ++c) out[r] += drift(r, c) * z[c];
    }
    for (std::size_t d = 0; d < kMaxDim; ++d) out[d] += u[i][d] + w[j][d];
    return out;
  };
}

PayoffFlow affine_payoff(Matrix base, std::vector<std::vector<State>> slope) {
  return [base = std::move(base), slope = std::move(slope)](const State& z, std::size_t i, std::size_t j) {
    double v = base(i, j);
    if (!slope.empty()) {
      for (std::size_t d = 0; d < kMaxDim; ++d) v += slope[i][j][d] * z[d];
    }
    return v;
  };
}

double lipschitz_linear(const std::vector<std::vector<Matrix>>& a) {
  double lip = 0.0;
  for (const auto& row : a) {
    for (const Matrix& m : row) lip = std::max(lip, norm_inf(m));
  }
  return lip;
}

double lipschitz_affine_payoff(const std::vector<std::vector<State>>& slope) {
  double lip = 0.0;
  for (const auto& row : slope) {
    for (const State& s : row) {
      double l1 = 0.0;
      for (double v : s) l1 += std::abs(v);
      lip = std::max(lip, l1);
    }
  }
  return lip;
}

StateGrid::StateGrid(Box box, std::vector<std::size_t> nodes_per_axis)
    : box_(std::move(box)), nodes_(std::move(nodes_per_axis)) {
  if (nodes_.size() != box_.dim()) throw std::invalid_argument("StateGrid: one node count per axis");
  strides_.resize(nodes_.size());
  for (std::size_t d = 0; d < nodes_.size(); ++d) {
    if (nodes_[d] < 2) throw std::invalid_argument("StateGrid: need at least two nodes per axis");
    spacing_.push_back((box_.upper[d] - box_.lower[d]) / static_cast<double>(nodes_[d] - 1));
    strides_[d] = size_;
    size_ *= nodes_[d];
  }
}

StateGrid StateGrid::uniform(const Box& box, std::size_t cells) {
  return StateGrid(box, std::vector<std::size_t>(box.dim(), cells + 1));
}

State StateGrid::node(std::size_t k) const {
  State z{};
  for (std::size_t d = 0; d < dim(); ++d) {
    const std::size_t idx = (k / strides_[d]) % nodes_[d];
    z[d] = idx + 1 == nodes_[d] ? box_.upper[d] : box_.lower[d] + spacing_[d] * static_cast<double>(idx);
  }
  return z;
}

StateGrid::Stencil StateGrid::stencil(const State& z) const {
  const std::size_t d_count = dim();
  std::array<std::size_t, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (std::size_t d = 0; d < d_count; ++d) {
    double u = (std::clamp(z[d], box_.lower[d], box_.upper[d]) - box_.lower[d]) / spacing_[d];
    auto cell = static_cast<std::size_t>(std::floor(u));
    if (cell >= nodes_[d] - 1) cell = nodes_[d] - 2;
    base[d] = cell;
    frac[d] = std::clamp(u - static_cast<double>(cell), 0.0, 1.0);
  }
  Stencil s;
  const std::size_t corners = std::size_t{1} << d_count;
  for (std::size_t c = 0; c < corners; ++c) {
    std::size_t index = 0;
    double w = 1.0;
    for (std::size_t d = 0; d < d_count; ++d) {
      const bool up = (c >> d) & 1u;
      index += (base[d] + (up ? 1 : 0)) * strides_[d];
      w *= up ? frac[d] : 1.0 - frac[d];
    }
    s.index[c] = static_cast<std::uint32_t>(index);
    s.weight[c] = w;
  }
  s.count = static_cast<std::uint8_t>(corners);
  return s;
}

double apply_stencil(const StateGrid::Stencil& s, std::span<const double> values) {
  double v = 0.0;
  for (std::size_t c = 0; c < s.count; ++c) v += s.weight[c] * values[s.index[c]];
  return v;
}

double StateGrid::interpolate(std::span<const double> values, const State& z) const {
  return apply_stencil(stencil(z), values);
}

State flow(const DiffGameSpec& spec, const State& z, std::size_t i, std::size_t j, double h,
           FlowDiagnostics* diagnostics) {
  auto field = [&](const State& s) { return spec.dynamics(s, i, j); };
  State end = rk4(field, z, h, max_substep(spec));
  if (spec.box().clamp(end) && diagnostics) ++diagnostics->clamped;
  return end;
}

State flow_relaxed(const DiffGameSpec& spec, const State& z, std::span<const double> x,
                   std::span<const double> y, double h, FlowDiagnostics* diagnostics) {
  auto field = [&](const State& s) { return averaged_field(spec, s, x, y); };
  State end = rk4(field, z, h, max_substep(spec));
  if (spec.box().clamp(end) && diagnostics) ++diagnostics->clamped;
  return end;
}

ValueTable solve_pure(const DiffGameSpec& spec, const Partition& partition, const StateGrid& grid, Side side,
                      FlowDiagnostics* diagnostics) {
  if (side == Side::maxmin) {
    return backward_pure(spec, partition, grid, diagnostics, [](const Matrix& m) { return matgame::lower_pure_value(m); });
  }
  return backward_pure(spec, partition, grid, diagnostics, [](const Matrix& m) { return matgame::upper_pure_value(m); });
}

ValueTable solve_random(const DiffGameSpec& spec, const Partition& partition, const StateGrid& grid,
                        FlowDiagnostics* diagnostics) {
  return backward_pure(spec, partition, grid, diagnostics, [](const Matrix& m) { return matgame::value(m); });
}

double RelaxedValue::side_gap() const {
  double gap = 0.0;
  for (std::size_t n = 0; n < lower.num_times(); ++n) gap = std::max(gap, distance_inf(lower.at(n), upper.at(n)));
  return gap;
}

ValueTable RelaxedValue::midpoint() const {
  ValueTable mid(lower.knots(), lower.width());
  for (std::size_t n = 0; n < lower.num_times(); ++n) {
    for (std::size_t k = 0; k < lower.width(); ++k) mid.at(n)[k] = 0.5 * (lower.at(n)[k] + upper.at(n)[k]);
  }
  return mid;
}

RelaxedValue solve_relaxed(const DiffGameSpec& spec, const Partition& partition, const StateGrid& grid,
                           const RelaxedOptions& options, FlowDiagnostics* diagnostics) {
  if (grid.dim() != spec.dim()) throw std::invalid_argument("diffgame: grid and spec dimensions differ");
  const std::size_t a = spec.num_actions1();
  const std::size_t b = spec.num_actions2();
  RelaxedValue out{ValueTable(partition.knots(), grid.size()), ValueTable(partition.knots(), grid.size()), 0};
  PureCacheStore store(spec, grid, diagnostics);
  const double h_max = max_substep(spec);
  const std::vector<Vector> vertices_x = vertices(a);
  const std::vector<Vector> vertices_y = vertices(b);
  std::vector<State> at_nodes(8);
  Matrix m(a, b);

  for (std::size_t n = partition.num_stages(); n-- > 0;) {
    const double delta = partition.duration(n);
    const PureStageCache& cache = store.get(delta);
    const std::vector<double> kw = weighted_density(spec.evaluation(), cache.rule, partition.time(n));
    const std::size_t nq = kw.size();
    for (int s = 0; s < 2; ++s) {
      const bool lower_side = s == 0;
      ValueTable& table = lower_side ? out.lower : out.upper;
      const auto next = table.at(n + 1);
      auto current = table.at(n);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const State z0 = grid.node(k);
        auto objective = [&](const Vector& x, const Vector& y) {
          auto field = [&](const State& z) { return averaged_field(spec, z, x, y); };
          State end = trajectory(field, z0, delta, cache.rule, h_max, at_nodes);
          double stage = 0.0;
          for (std::size_t q = 0; q < nq; ++q) {
            if (kw[q] != 0.0) stage += kw[q] * averaged_payoff(spec, at_nodes[q], x, y);
          }
          if (spec.box().clamp(end) && diagnostics) ++diagnostics->clamped;
          return stage + grid.interpolate(next, end);
        };
        // Warm start: matrix game of the pure-action stage.
        const std::size_t pairs = a * b;
        for (std::size_t p = 0; p < pairs; ++p) {
          const double* gq = &cache.payoff_at_nodes[(k * pairs + p) * nq];
          double stage = 0.0;
          for (std::size_t q = 0; q < nq; ++q) stage += kw[q] * gq[q];
          m(p / b, p % b) = stage + apply_stencil(cache.next[k * pairs + p], next);
        }
        const matgame::MatrixGameSolution warm = matgame::solve(m);
        std::vector<Vector> starts_x = vertices_x;
        starts_x.insert(starts_x.begin(), warm.x);
        std::vector<Vector> starts_y = vertices_y;
        starts_y.insert(starts_y.begin(), warm.y);

        bool capped = false;
        SearchResult result;
        if (lower_side) {
          auto inner = [&](const Vector& x) {
            auto obj = [&](const Vector& y) { return objective(x, y); };
            SearchResult r = simplex_search(b, starts_y, obj, false, options.strategy_resolution,
                                            options.evaluation_cap);
            capped = capped || r.capped;
            return r.value;
          };
          result = simplex_search(a, starts_x, inner, true, options.strategy_resolution, options.evaluation_cap);
        } else {
          auto inner = [&](const Vector& y) {
            auto obj = [&](const Vector& x) { return objective(x, y); };
            SearchResult r = simplex_search(a, starts_x, obj, true, options.strategy_resolution,
                                            options.evaluation_cap);
            capped = capped || r.capped;
            return r.value;
          };
          result = simplex_search(b, starts_y, inner, false, options.strategy_resolution, options.evaluation_cap);
        }
        if (capped || result.capped) ++out.flagged_cells;
        current[k] = result.value;
      }
    }
  }
  return out;
}

std::vector<IsaacsSample> isaacs_samples(const DiffGameSpec& spec, std::size_t count, std::uint64_t seed,
                                         double t_max, double p_scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<IsaacsSample> out(count);
  for (auto& s : out) {
    s.t = t_max * unit(rng);
    for (std::size_t d = 0; d < spec.dim(); ++d) {
      s.z[d] = spec.box().lower[d] + unit(rng) * (spec.box().upper[d] - spec.box().lower[d]);
      s.p[d] = p_scale * (2.0 * unit(rng) - 1.0);
    }
  }
  return out;
}

namespace {

Matrix hamiltonian_matrix(const DiffGameSpec& spec, double t, const State& z, const State& p) {
  const double kt = spec.evaluation().density(t);
  Matrix m(spec.num_actions1(), spec.num_actions2());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const State f = spec.dynamics(z, i, j);
      double v = spec.payoff(z, i, j) * kt;
      for (std::size_t d = 0; d < spec.dim(); ++d) v += f[d] * p[d];
      m(i, j) = v;
    }
  }
  return m;
}

}  // namespace

IsaacsReport isaacs_check(const DiffGameSpec& spec, std::span<const IsaacsSample> samples) {
  IsaacsReport report;
  for (const IsaacsSample& s : samples) {
    const Matrix m = hamiltonian_matrix(spec, s.t, s.z, s.p);
    const double pure_gap = matgame::upper_pure_value(m) - matgame::lower_pure_value(m);
    const matgame::MatrixGameSolution sol = matgame::solve(m);
    const double mixed_gap = matgame::conceded_by_column(m, sol.y) - matgame::guaranteed_by_row(m, sol.x);
    report.pure_gaps.push_back(pure_gap);
    report.mixed_gaps.push_back(mixed_gap);
    report.max_pure_gap = std::max(report.max_pure_gap, pure_gap);
    report.max_mixed_gap = std::max(report.max_mixed_gap, mixed_gap);
  }
  return report;
}

HjiResidual hji_residual(const ValueTable& table, const StateGrid& grid, const DiffGameSpec& spec, double t,
                         const State& z, double hessian_threshold) {
  const auto& knots = table.knots();
  const auto it = std::lower_bound(knots.begin(), knots.end(), t - 1e-12);
  if (it == knots.begin() || it == knots.end() || it + 1 == knots.end()) {
    throw std::invalid_argument("hji_residual: t must be an interior partition time");
  }
  const std::size_t n = static_cast<std::size_t>(it - knots.begin());
  if (std::abs(knots[n] - t) > 1e-9) throw std::invalid_argument("hji_residual: t is not a partition time");
  for (std::size_t d = 0; d < spec.dim(); ++d) {
    if (z[d] - grid.spacing(d) < grid.box().lower[d] - 1e-12 || z[d] + grid.spacing(d) > grid.box().upper[d] + 1e-12) {
      throw std::invalid_argument("hji_residual: z is a boundary point of the grid");
    }
  }
  auto value_at = [&](std::size_t slice, const State& p) { return grid.interpolate(table.at(slice), p); };
  const double dt = (value_at(n + 1, z) - value_at(n - 1, z)) / (knots[n + 1] - knots[n - 1]);

  HjiResidual out;
  State grad{};
  const double center = value_at(n, z);
  for (std::size_t d = 0; d < spec.dim(); ++d) {
    const double h = grid.spacing(d);
    State up = z;
    State down = z;
    up[d] += h;
    down[d] -= h;
    const double vu = value_at(n, up);
    const double vd = value_at(n, down);
    grad[d] = (vu - vd) / (2.0 * h);
    out.hessian_bound = std::max(out.hessian_bound, std::abs(vu - 2.0 * center + vd) / (h * h));
  }
  const Matrix m = hamiltonian_matrix(spec, t, z, grad);
  out.residual = std::abs(dt + matgame::value(m));
  out.smooth = out.hessian_bound <= hessian_threshold;
  return out;
}

std::vector<std::size_t> decode_profile(std::size_t code, std::size_t radix, std::size_t states) {
  std::vector<std::size_t> out(states);
  for (std::size_t w = 0; w < states; ++w) {
    out[w] = code % radix;
    code /= radix;
  }
  return out;
}

DiffGameSpec lift_observed_game(const GameSpec& spec) {
  const std::size_t s = spec.num_states();
  if (s > kMaxDim) throw std::invalid_argument("lift_observed_game: at most 3 states");
  const std::size_t a = spec.num_actions1();
  const std::size_t b = spec.num_actions2();
  std::size_t profiles1 = 1;
  std::size_t profiles2 = 1;
  for (std::size_t w = 0; w < s; ++w) {
    profiles1 *= a;
    profiles2 *= b;
  }
  // Precomputed per profile pair: rows q(i(ω), j(ω))[ω, ·] and payoffs g(ω, i(ω), j(ω)).
  struct Lifted {
    std::vector<Matrix> generator;  // [pair] S×S, row ω taken from q(i(ω), j(ω))
    std::vector<Vector> payoff;     // [pair] S
    std::size_t profiles2;
  };
  auto data = std::make_shared<Lifted>();
  data->profiles2 = profiles2;
  double lip_f = 0.0;
  double lip_g = 0.0;
  for (std::size_t ci = 0; ci < profiles1; ++ci) {
    const auto ip = decode_profile(ci, a, s);
    for (std::size_t cj = 0; cj < profiles2; ++cj) {
      const auto jp = decode_profile(cj, b, s);
      Matrix gen(s, s);
      Vector pay(s);
      for (std::size_t w = 0; w < s; ++w) {
        const Matrix& q = spec.rates(ip[w], jp[w]).matrix();
        for (std::size_t z = 0; z < s; ++z) gen(w, z) = q(w, z);
        pay[w] = spec.payoff(w, ip[w], jp[w]);
      }
      // Sup-norm Lipschitz constant of ζ ↦ ζᵀ gen is the max column abs sum.
      for (std::size_t z = 0; z < s; ++z) {
        double col = 0.0;
        for (std::size_t w = 0; w < s; ++w) col += std::abs(gen(w, z));
        lip_f = std::max(lip_f, col);
      }
      double l1 = 0.0;
      for (double v : pay) l1 += std::abs(v);
      lip_g = std::max(lip_g, l1);
      data->generator.push_back(std::move(gen));
      data->payoff.push_back(std::move(pay));
    }
  }
  Dynamics f = [data, s](const State& zeta, std::size_t i, std::size_t j) {
    const Matrix& gen = data->generator[i * data->profiles2 + j];
    State out{};
    for (std::size_t w = 0; w < s; ++w) {
      if (zeta[w] == 0.0) continue;
      for (std::size_t z = 0; z < s; ++z) out[z] += zeta[w] * gen(w, z);
    }
    return out;
  };
  PayoffFlow g = [data, s](const State& zeta, std::size_t i, std::size_t j) {
    const Vector& pay = data->payoff[i * data->profiles2 + j];
    double v = 0.0;
    for (std::size_t w = 0; w < s; ++w) v += zeta[w] * pay[w];
    return v;
  };
  Box box{std::vector<double>(s, 0.0), std::vector<double>(s, 1.0)};
  return DiffGameSpec(std::move(box), profiles1, profiles2, std::move(f), std::move(g), lip_f, lip_g,
                      spec.evaluation(), "lifted");
}

}  // namespace vanish::diffgame
