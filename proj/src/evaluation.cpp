#include "vanish/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vanish/errors.hpp"

namespace vanish {

namespace {

void check_tail_tolerance(double tol) {
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw ValidationError("evaluation: tail tolerance must be positive");
  }
}

// Integral of the linear interpolant between (x0, y0) and (x1, y1) over [a, b] ⊂ [x0, x1].
double segment_mass(double x0, double y0, double x1, double y1, double a, double b) {
  const double slope = (y1 - y0) / (x1 - x0);
  const double ya = y0 + slope * (a - x0);
  const double yb = y0 + slope * (b - x0);
  return 0.5 * (ya + yb) * (b - a);
}

}  // namespace

Evaluation Evaluation::exponential(double rho, double tail_tolerance) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ValidationError("evaluation: exponential rate rho must be positive");
  }
  check_tail_tolerance(tail_tolerance);
  return Evaluation(Exponential{rho}, tail_tolerance);
}

Evaluation Evaluation::tabulated(std::vector<double> knots, std::vector<double> densities,
                                 double tail_tolerance) {
  check_tail_tolerance(tail_tolerance);
  if (knots.size() < 2 || knots.size() != densities.size()) {
    throw ValidationError("evaluation: tabulated density needs >= 2 knots and one density per knot");
  }
  if (knots.front() != 0.0) throw ValidationError("evaluation: first knot must be 0");
  double lipschitz = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < knots.size(); ++k) {
    if (!std::isfinite(densities[k]) || densities[k] < 0.0) {
      std::ostringstream msg;
      msg << "evaluation: density at knot " << k << " is negative or not finite";
      throw ValidationError(msg.str());
    }
    if (k == 0) continue;
    if (!(knots[k] > knots[k - 1])) {
      std::ostringstream msg;
      msg << "evaluation: knots must increase strictly (knot " << k << ")";
      throw ValidationError(msg.str());
    }
    const double h = knots[k] - knots[k - 1];
    lipschitz = std::max(lipschitz, std::abs(densities[k] - densities[k - 1]) / h);
    total += 0.5 * (densities[k] + densities[k - 1]) * h;
  }
  // A density that does not vanish at the end of its support jumps to zero there.
  if (densities.back() != 0.0) {
    throw ValidationError("evaluation: tabulated density must vanish at the last knot");
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "evaluation: tabulated density integrates to " << total << ", expected 1";
    throw ValidationError(msg.str());
  }
  return Evaluation(Tabulated{std::move(knots), std::move(densities), lipschitz}, tail_tolerance);
}

double Evaluation::rho() const {
  if (const auto* e = std::get_if<Exponential>(&kind_)) return e->rho;
  throw std::logic_error("Evaluation::rho: not an exponential evaluation");
}

double Evaluation::density(double t) const {
  if (t < 0.0) return 0.0;
  if (const auto* e = std::get_if<Exponential>(&kind_)) return e->rho * std::exp(-e->rho * t);
  const auto& tab = std::get<Tabulated>(kind_);
  if (t >= tab.knots.back()) return 0.0;
  const auto it = std::upper_bound(tab.knots.begin(), tab.knots.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - tab.knots.begin());
  const double x0 = tab.knots[k - 1];
  const double x1 = tab.knots[k];
  const double w = (t - x0) / (x1 - x0);
  return (1.0 - w) * tab.densities[k - 1] + w * tab.densities[k];
}

double Evaluation::mass(double a, double b) const {
  a = std::max(a, 0.0);
  if (b <= a) return 0.0;
  if (const auto* e = std::get_if<Exponential>(&kind_)) {
    // e^{-ρa}(1 - e^{-ρ(b-a)}) keeps precision for short intervals.
    return std::exp(-e->rho * a) * -std::expm1(-e->rho * (b - a));
  }
  const auto& tab = std::get<Tabulated>(kind_);
  double total = 0.0;
  for (std::size_t k = 1; k < tab.knots.size(); ++k) {
    const double lo = std::max(a, tab.knots[k - 1]);
    const double hi = std::min(b, tab.knots[k]);
    if (hi <= lo) continue;
    total += segment_mass(tab.knots[k - 1], tab.densities[k - 1], tab.knots[k], tab.densities[k],
                          lo, hi);
  }
  return total;
}

double Evaluation::tail(double horizon) const {
  if (const auto* e = std::get_if<Exponential>(&kind_)) {
    return std::exp(-e->rho * std::max(horizon, 0.0));
  }
  const auto& tab = std::get<Tabulated>(kind_);
  return mass(horizon, tab.knots.back());
}

double Evaluation::truncation_horizon() const {
  if (const auto* e = std::get_if<Exponential>(&kind_)) {
    return std::log(1.0 / tail_tolerance_) / e->rho;
  }
  return std::get<Tabulated>(kind_).knots.back();
}

double Evaluation::lipschitz() const {
  if (const auto* e = std::get_if<Exponential>(&kind_)) return e->rho * e->rho;
  return std::get<Tabulated>(kind_).lipschitz_bound;
}

Evaluation Evaluation::with_tail_tolerance(double tail_tolerance) const {
  check_tail_tolerance(tail_tolerance);
  return Evaluation(kind_, tail_tolerance);
}

}  // namespace vanish
