#include "vanish/game.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "vanish/errors.hpp"

namespace vanish {

double RateMatrix::uniformization_rate() const {
  double lambda = 0.0;
  for (std::size_t z = 0; z < entries_.rows(); ++z) lambda = std::max(lambda, std::abs(entries_(z, z)));
  return lambda;
}

std::optional<std::string> check_rate_matrix(const RateMatrix& q, double row_sum_tol) {
  const Matrix& m = q.matrix();
  if (m.rows() != m.cols()) return "rate matrix is not square";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "entry (" << r << "," << c << ") is not finite";
        return msg.str();
      }
      if (r != c && v < 0.0) {
        std::ostringstream msg;
        msg << "negative off-diagonal at (" << r << "," << c << "): " << v;
        return msg.str();
      }
      sum += v;
    }
    if (std::abs(sum) > row_sum_tol) {
      std::ostringstream msg;
      msg << "row " << r << " sums to " << sum;
      return msg.str();
    }
  }
  return std::nullopt;
}

GameSpec::GameSpec(std::vector<std::string> states, std::vector<std::string> actions1,
                   std::vector<std::string> actions2, std::vector<Matrix> payoff,
                   std::vector<RateMatrix> rates, Evaluation evaluation)
    : states_(std::move(states)),
      actions1_(std::move(actions1)),
      actions2_(std::move(actions2)),
      payoff_(std::move(payoff)),
      rates_(std::move(rates)),
      evaluation_(std::move(evaluation)) {
  const std::size_t s = states_.size();
  const std::size_t a = actions1_.size();
  const std::size_t b = actions2_.size();
  if (s == 0 || a == 0 || b == 0) throw ValidationError("game: states and action sets must be nonempty");
  if (payoff_.size() != s) throw ValidationError("game: payoff needs one A×B matrix per state");
  for (std::size_t z = 0; z < s; ++z) {
    if (payoff_[z].rows() != a || payoff_[z].cols() != b) {
      std::ostringstream msg;
      msg << "game: payoff matrix of state " << z << " is not " << a << "x" << b;
      throw ValidationError(msg.str());
    }
    for (double v : payoff_[z].data()) {
      if (std::isfinite(v)) payoff_norm_ = std::max(payoff_norm_, std::abs(v));
    }
  }
  if (rates_.size() != a * b) throw ValidationError("game: rates need one S×S matrix per action pair");
  for (std::size_t k = 0; k < rates_.size(); ++k) {
    if (rates_[k].matrix().rows() != s || rates_[k].matrix().cols() != s) {
      std::ostringstream msg;
      msg << "game: rate matrix for pair (" << k / b << "," << k % b << ") is not " << s << "x" << s;
      throw ValidationError(msg.str());
    }
  }
}

double GameSpec::rate_norm() const {
  double lambda = 0.0;
  for (const auto& q : rates_) lambda = std::max(lambda, q.uniformization_rate());
  return lambda;
}

GameSpec GameSpec::with_evaluation(Evaluation evaluation) const {
  return GameSpec(states_, actions1_, actions2_, payoff_, rates_, std::move(evaluation));
}

GameSpec GameSpec::with_payoff_shift(double c) const {
  std::vector<Matrix> shifted = payoff_;
  for (auto& m : shifted) m += Matrix(m.rows(), m.cols(), c);
  return GameSpec(states_, actions1_, actions2_, std::move(shifted), rates_, evaluation_);
}

std::optional<Violation> validate(const GameSpec& spec) {
  for (std::size_t z = 0; z < spec.num_states(); ++z) {
    for (std::size_t i = 0; i < spec.num_actions1(); ++i) {
      for (std::size_t j = 0; j < spec.num_actions2(); ++j) {
        if (!std::isfinite(spec.payoff(z, i, j))) {
          std::ostringstream msg;
          msg << "payoff g(" << z << "," << i << "," << j << ") is not finite";
          return Violation{msg.str()};
        }
      }
    }
  }
  for (std::size_t i = 0; i < spec.num_actions1(); ++i) {
    for (std::size_t j = 0; j < spec.num_actions2(); ++j) {
      if (auto err = check_rate_matrix(spec.rates(i, j))) {
        std::ostringstream msg;
        msg << "rates q(" << i << "," << j << "): " << *err;
        return Violation{msg.str()};
      }
    }
  }
  return std::nullopt;
}

Partition::Partition(std::vector<double> times, double horizon)
    : times_(std::move(times)), horizon_(horizon) {
  if (times_.empty() || times_.front() != 0.0) {
    throw std::invalid_argument("partition: first decision time must be 0");
  }
  for (std::size_t n = 0; n < times_.size(); ++n) {
    const double next = n + 1 < times_.size() ? times_[n + 1] : horizon_;
    if (!(next > times_[n]) || !std::isfinite(next)) {
      std::ostringstream msg;
      msg << "partition: stage " << n << " has nonpositive duration";
      throw std::invalid_argument(msg.str());
    }
    mesh_ = std::max(mesh_, next - times_[n]);
  }
}

std::vector<double> Partition::knots() const {
  std::vector<double> k = times_;
  k.push_back(horizon_);
  return k;
}

Partition uniform_partition(double horizon, std::size_t n) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("uniform_partition: horizon must be positive");
  }
  if (n == 0) throw std::invalid_argument("uniform_partition: need at least one stage");
  std::vector<double> times(n);
  for (std::size_t k = 0; k < n; ++k) times[k] = horizon * static_cast<double>(k) / static_cast<double>(n);
  return Partition(std::move(times), horizon);
}

Partition uniform_partition_with_mesh(double delta, double min_horizon) {
  if (!(delta > 0.0)) throw std::invalid_argument("uniform_partition_with_mesh: delta must be positive");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(min_horizon / delta - 1e-9)));
  std::vector<double> times(n);
  for (std::size_t k = 0; k < n; ++k) times[k] = delta * static_cast<double>(k);
  return Partition(std::move(times), delta * static_cast<double>(n));
}

ValueTable::ValueTable(std::vector<double> knots, std::size_t width)
    : knots_(std::move(knots)), width_(width), values_(knots_.size() * width, 0.0) {}

double ValueTable::value(double t, std::size_t k) const {
  if (knots_.empty() || t >= knots_.back()) return 0.0;
  if (t <= knots_.front()) return at(0)[k];
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const std::size_t n = static_cast<std::size_t>(it - knots_.begin());
  const double w = (t - knots_[n - 1]) / (knots_[n] - knots_[n - 1]);
  return (1.0 - w) * at(n - 1)[k] + w * at(n)[k];
}

Vector ValueTable::slice(double t) const {
  Vector out(width_);
  for (std::size_t k = 0; k < width_; ++k) out[k] = value(t, k);
  return out;
}

double ValueTable::sup_norm() const { return norm_inf(values_); }

double ValueTable::max_time_quotient() const {
  double q = 0.0;
  for (std::size_t n = 0; n + 1 < knots_.size(); ++n) {
    const double h = knots_[n + 1] - knots_[n];
    q = std::max(q, distance_inf(at(n), at(n + 1)) / h);
  }
  return q;
}

GameSpec random_instance(std::uint64_t seed, std::size_t num_states, std::size_t num_actions1,
                         std::size_t num_actions2, double rate_scale, const Evaluation& evaluation) {
  if (num_states == 0 || num_actions1 == 0 || num_actions2 == 0) {
    throw std::invalid_argument("random_instance: sizes must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto names = [](char prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(prefix + std::to_string(k));
    return out;
  };
  std::vector<Matrix> payoff;
  for (std::size_t z = 0; z < num_states; ++z) {
    Matrix m(num_actions1, num_actions2);
    for (std::size_t i = 0; i < num_actions1; ++i) {
      for (std::size_t j = 0; j < num_actions2; ++j) m(i, j) = 2.0 * unit(rng) - 1.0;
    }
    payoff.push_back(std::move(m));
  }
  std::vector<RateMatrix> rates;
  for (std::size_t k = 0; k < num_actions1 * num_actions2; ++k) {
    Matrix q(num_states, num_states);
    for (std::size_t r = 0; r < num_states; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < num_states; ++c) {
        if (c == r) continue;
        q(r, c) = rate_scale * unit(rng);
        sum += q(r, c);
      }
      q(r, r) = -sum;
    }
    rates.emplace_back(std::move(q));
  }
  return GameSpec(names('s', num_states), names('a', num_actions1), names('b', num_actions2),
                  std::move(payoff), std::move(rates), evaluation);
}

}  // namespace vanish
