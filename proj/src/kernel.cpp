#include "vanish/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vanish::kernel {

namespace {

constexpr double kPoissonTail = 1e-13;
constexpr double kSimplexTol = 1e-10;
constexpr double kMaxCondition = 1e12;

Vector payoff_column(const GameSpec& spec, std::size_t i, std::size_t j) {
  Vector g(spec.num_states());
  for (std::size_t z = 0; z < g.size(); ++z) g[z] = spec.payoff(z, i, j);
  return g;
}

// ρ (ρ Id − q)^{−1} (Id − e^{−ρδ} P^δ) g: the stage payoff of a stage starting at t = 0.
Vector exponential_stage_vector(const RateMatrix& q, const StochasticMatrix& p, double rho, double delta,
                                const Vector& g) {
  const std::size_t n = g.size();
  Matrix shifted = rho * Matrix::identity(n) - q.matrix();
  LuDecomposition lu(shifted);
  const double cond = lu.condition_number();
  if (!(cond <= kMaxCondition)) {
    std::ostringstream msg;
    msg << "stage_payoff: rho*Id - q is ill-conditioned (condition " << cond << ")";
    throw std::runtime_error(msg.str());
  }
  const Vector pg = matvec(p.matrix(), g);
  const double decay = std::exp(-rho * delta);
  Vector rhs(n);
  for (std::size_t z = 0; z < n; ++z) rhs[z] = rho * (g[z] - decay * pg[z]);
  return lu.solve(rhs);
}

std::vector<Vector> propagated_payoffs(const RateMatrix& q, const QuadratureRule& rule, const Vector& g) {
  std::vector<Vector> out;
  out.reserve(rule.nodes.size());
  for (double s : rule.nodes) out.push_back(matvec(transition(q, s).matrix(), g));
  return out;
}

}  // namespace

StochasticMatrix transition(const RateMatrix& q, double h) {
  if (!(h >= 0.0)) throw std::invalid_argument("transition: negative horizon");
  const std::size_t n = q.size();
  const double lambda = q.uniformization_rate();
  if (lambda == 0.0 || h == 0.0) return StochasticMatrix(Matrix::identity(n), h);

  Matrix jump = Matrix::identity(n);
  jump += (1.0 / lambda) * q.matrix();
  // Uniformized jump chain; clip round-off below zero on the diagonal.
  for (std::size_t z = 0; z < n; ++z) jump(z, z) = std::max(jump(z, z), 0.0);

  const double a = lambda * h;
  const double log_a = std::log(a);
  Matrix power = Matrix::identity(n);
  Matrix sum(n, n);
  double cumulative = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double kd = static_cast<double>(k);
    const double weight = std::exp(-a + kd * log_a - std::lgamma(kd + 1.0));
    if (weight > 0.0) sum += weight * power;
    cumulative += weight;
    if (kd > a && 1.0 - cumulative <= kPoissonTail) break;
    if (k > 100 + static_cast<std::size_t>(a + 40.0 * std::sqrt(a + 1.0))) break;
    power = power * jump;
  }
  return StochasticMatrix(std::move(sum), h);
}

Vector push_belief(std::span<const double> belief, const StochasticMatrix& p) {
  double total = 0.0;
  for (double v : belief) {
    if (v < -kSimplexTol) throw std::invalid_argument("push_belief: belief has a negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexTol) throw std::invalid_argument("push_belief: belief does not sum to 1");
  Vector out = vecmat(belief, p.matrix());
  for (double& v : out) v = std::max(v, 0.0);
  return out;
}

Vector act_on_function(const StochasticMatrix& p, std::span<const double> f) { return matvec(p.matrix(), f); }

Vector act_on_function(const RateMatrix& q, std::span<const double> f) { return matvec(q.matrix(), f); }

double stage_payoff(const GameSpec& spec, std::size_t z, std::size_t i, std::size_t j, double t_n,
                    double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("stage_payoff: duration must be positive");
  const Evaluation& k = spec.evaluation();
  const RateMatrix& q = spec.rates(i, j);
  const Vector g = payoff_column(spec, i, j);
  if (k.is_exponential()) {
    const Vector base = exponential_stage_vector(q, transition(q, delta), k.rho(), delta, g);
    return std::exp(-k.rho() * t_n) * base[z];
  }
  const QuadratureRule rule = gauss_legendre8(0.0, delta, 4);
  double s = 0.0;
  for (std::size_t n = 0; n < rule.nodes.size(); ++n) {
    const double kv = k.density(t_n + rule.nodes[n]);
    if (kv == 0.0) continue;
    s += rule.weights[n] * kv * dot(transition(q, rule.nodes[n]).matrix().row(z), g);
  }
  return s;
}

double stage_payoff_frozen(const GameSpec& spec, std::size_t z, std::size_t i, std::size_t j, double t_n,
                           double delta) {
  return spec.payoff(z, i, j) * spec.evaluation().mass(t_n, t_n + delta);
}

StageModel::StageModel(const GameSpec& spec, double delta, PayoffMode mode)
    : spec_(&spec),
      delta_(delta),
      mode_(mode),
      num_states_(spec.num_states()),
      num_actions1_(spec.num_actions1()),
      num_actions2_(spec.num_actions2()) {
  if (!(delta > 0.0)) throw std::invalid_argument("StageModel: duration must be positive");
  const Evaluation& k = spec.evaluation();
  const bool exponential = k.is_exponential();
  if (mode_ == PayoffMode::flow && !exponential) rule_ = gauss_legendre8(0.0, delta, 4);
  for (std::size_t i = 0; i < num_actions1_; ++i) {
    for (std::size_t j = 0; j < num_actions2_; ++j) {
      const RateMatrix& q = spec.rates(i, j);
      transitions_.push_back(kernel::transition(q, delta));
      if (mode_ == PayoffMode::frozen) continue;
      const Vector g = payoff_column(spec, i, j);
      if (exponential) {
        base_payoff_.push_back(exponential_stage_vector(q, transitions_.back(), k.rho(), delta, g));
      } else {
        propagated_payoff_.push_back(propagated_payoffs(q, rule_, g));
      }
    }
  }
}

Matrix StageModel::payoffs_at(double t) const {
  const std::size_t pairs = num_actions1_ * num_actions2_;
  Matrix out(num_states_, pairs);
  const Evaluation& k = spec_->evaluation();
  if (mode_ == PayoffMode::frozen) {
    const double mass = k.mass(t, t + delta_);
    for (std::size_t z = 0; z < num_states_; ++z) {
      for (std::size_t p = 0; p < pairs; ++p) {
        out(z, p) = spec_->payoff(z, p / num_actions2_, p % num_actions2_) * mass;
      }
    }
    return out;
  }
  if (k.is_exponential()) {
    const double scale = std::exp(-k.rho() * t);
    for (std::size_t p = 0; p < pairs; ++p) {
      for (std::size_t z = 0; z < num_states_; ++z) out(z, p) = scale * base_payoff_[p][z];
    }
    return out;
  }
  std::vector<double> wk(rule_.nodes.size());
  for (std::size_t n = 0; n < wk.size(); ++n) wk[n] = rule_.weights[n] * k.density(t + rule_.nodes[n]);
  for (std::size_t p = 0; p < pairs; ++p) {
    for (std::size_t n = 0; n < wk.size(); ++n) {
      if (wk[n] == 0.0) continue;
      const Vector& h = propagated_payoff_[p][n];
      for (std::size_t z = 0; z < num_states_; ++z) out(z, p) += wk[n] * h[z];
    }
  }
  return out;
}

}  // namespace vanish::kernel
