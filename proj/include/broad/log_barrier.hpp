#pragma once

// Log-barrier regularizer on the probability simplex: its Bregman divergence
// and the constrained mirror-descent step
//
//   argmin_{w in simplex}  <w, x> + sum_i (1/eta_i) h(w_i / w'_i),
//   h(y) = y - 1 - ln y,
//
// solved through the scalar Lagrange multiplier of the normalization
// constraint.

#include "broad/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace broad {

template <typename Scalar>
Scalar simplex_tolerance() {
  return std::max<Scalar>(Scalar(1e-9), Scalar(100) * std::numeric_limits<Scalar>::epsilon());
}

/// Strictly positive probability vector.
template <typename Scalar>
class SimplexPoint {
 public:
  explicit SimplexPoint(Vector<Scalar> weights) : w_(std::move(weights)) {
    if (w_.size() == 0) throw DomainError("SimplexPoint: empty weight vector");
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
      if (!(w_[i] > Scalar(0)) || !std::isfinite(static_cast<double>(w_[i]))) {
        std::ostringstream os;
        os << "SimplexPoint: weight " << i << " = " << w_[i] << " is not strictly positive";
        throw DomainError(os.str());
      }
    }
    const Scalar total = w_.sum();
    if (std::abs(total - Scalar(1)) > simplex_tolerance<Scalar>()) {
      std::ostringstream os;
      os << "SimplexPoint: weights sum to " << total;
      throw DomainError(os.str());
    }
  }

  static SimplexPoint uniform(Eigen::Index k) {
    return SimplexPoint(Vector<Scalar>::Constant(k, Scalar(1) / Scalar(k)));
  }

  const Vector<Scalar>& weights() const { return w_; }
  Eigen::Index size() const { return w_.size(); }
  Scalar operator[](Eigen::Index i) const { return w_[i]; }

  friend bool operator==(const SimplexPoint& a, const SimplexPoint& b) {
    return a.w_.size() == b.w_.size() && a.w_ == b.w_;
  }

 private:
  Vector<Scalar> w_;
};

/// Per-arm learning rates of the barrier sum_i (1/eta_i) ln(1/w_i). The cap is
/// informational: within_cap() reports whether every rate respects it.
template <typename Scalar>
class LearningRates {
 public:
  explicit LearningRates(Vector<Scalar> rates,
                         Scalar cap = std::numeric_limits<Scalar>::infinity())
      : rates_(std::move(rates)), cap_(cap) {
    if (rates_.size() == 0) throw DomainError("LearningRates: empty rate vector");
    for (Eigen::Index i = 0; i < rates_.size(); ++i) {
      if (!(rates_[i] > Scalar(0)) || !std::isfinite(static_cast<double>(rates_[i])))
        throw DomainError("LearningRates: every rate must be positive and finite");
    }
    if (!(cap_ > Scalar(0))) throw DomainError("LearningRates: cap must be positive");
  }

  static LearningRates uniform(Eigen::Index k, Scalar eta,
                               Scalar cap = std::numeric_limits<Scalar>::infinity()) {
    return LearningRates(Vector<Scalar>::Constant(k, eta), cap);
  }

  const Vector<Scalar>& rates() const { return rates_; }
  Eigen::Index size() const { return rates_.size(); }
  Scalar operator[](Eigen::Index i) const { return rates_[i]; }
  Scalar cap() const { return cap_; }
  bool within_cap() const { return rates_.maxCoeff() <= cap_; }

  void multiply(Eigen::Index i, Scalar factor) {
    if (!(factor > Scalar(0))) throw DomainError("LearningRates: factor must be positive");
    rates_[i] *= factor;
  }

 private:
  Vector<Scalar> rates_;
  Scalar cap_;
};

/// The objective <w, x> + D_psi(w, prev) of one mirror-descent step.
template <typename Scalar>
struct BarrierObjective {
  BarrierObjective(SimplexPoint<Scalar> prev_point, Vector<Scalar> linear_term,
                   LearningRates<Scalar> learning_rates)
      : prev(std::move(prev_point)), linear(std::move(linear_term)),
        rates(std::move(learning_rates)) {
    if (linear.size() != prev.size() || rates.size() != prev.size())
      throw DomainError("BarrierObjective: dimension mismatch");
    if (!linear.allFinite()) throw DomainError("BarrierObjective: non-finite linear term");
  }

  Scalar value(const Vector<Scalar>& w) const;

  SimplexPoint<Scalar> prev;
  Vector<Scalar> linear;
  LearningRates<Scalar> rates;
};

/// h(y) = y - 1 - ln y.
template <typename Scalar>
Scalar barrier_h(Scalar y) {
  if (!(y > Scalar(0))) throw DomainError("barrier_h: argument must be positive");
  using std::log;
  return y - Scalar(1) - log(y);
}

template <typename Scalar>
Scalar bregman(const Vector<Scalar>& u, const Vector<Scalar>& v, const Vector<Scalar>& rates) {
  if (u.size() != v.size() || u.size() != rates.size())
    throw DomainError("bregman: dimension mismatch");
  Scalar total(0);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!(u[i] > Scalar(0)) || !(v[i] > Scalar(0)))
      throw DomainError("bregman: coordinates must be strictly positive");
    total += barrier_h(u[i] / v[i]) / rates[i];
  }
  return total;
}

template <typename Scalar>
Scalar bregman(const SimplexPoint<Scalar>& u, const SimplexPoint<Scalar>& v,
               const LearningRates<Scalar>& rates) {
  return bregman<Scalar>(u.weights(), v.weights(), rates.rates());
}

template <typename Scalar>
Scalar BarrierObjective<Scalar>::value(const Vector<Scalar>& w) const {
  return w.dot(linear) + bregman<Scalar>(w, prev.weights(), rates.rates());
}

template <typename Scalar>
struct OmdSolution {
  SimplexPoint<Scalar> point;
  Scalar multiplier;
  int iterations;
};

namespace detail {

template <typename Scalar>
Scalar stationary_mass(const BarrierObjective<Scalar>& obj, Scalar lambda) {
  const auto& wp = obj.prev.weights();
  const auto& eta = obj.rates.rates();
  Scalar mass(0);
  for (Eigen::Index i = 0; i < wp.size(); ++i)
    mass += Scalar(1) / (eta[i] * (obj.linear[i] + lambda) + Scalar(1) / wp[i]);
  return mass;
}

template <typename Scalar>
std::string describe(const BarrierObjective<Scalar>& obj) {
  std::ostringstream os;
  os.precision(17);
  os << "x=[" << obj.linear.transpose() << "] eta=[" << obj.rates.rates().transpose()
     << "] w'=[" << obj.prev.weights().transpose() << "]";
  return os.str();
}

}  // namespace detail

/// Solves the mirror-descent step by bisection on the multiplier. The
/// stationary point is w_i(lambda) = 1 / (eta_i (x_i + lambda) + 1/w'_i) and
/// sum_i w_i(lambda) is strictly decreasing to the right of the largest pole.
template <typename Scalar>
OmdSolution<Scalar> solve_omd(const BarrierObjective<Scalar>& obj) {
  constexpr int kMaxDoublings = 200;
  constexpr int kMaxIterations = 500;
  const Scalar tol = std::max<Scalar>(Scalar(1e-12), Scalar(16) * std::numeric_limits<Scalar>::epsilon());

  const auto& wp = obj.prev.weights();
  const auto& eta = obj.rates.rates();
  const Eigen::Index k = wp.size();
  if (k == 1) return {SimplexPoint<Scalar>(Vector<Scalar>::Ones(1)), Scalar(0), 0};
  // A constant linear term is absorbed entirely by the multiplier.
  if (obj.linear.maxCoeff() == obj.linear.minCoeff()) return {obj.prev, -obj.linear[0], 0};

  Eigen::Index pole_arm = 0;
  Scalar lambda_min = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < k; ++i) {
    const Scalar pole = -obj.linear[i] - Scalar(1) / (eta[i] * wp[i]);
    if (pole > lambda_min) {
      lambda_min = pole;
      pole_arm = i;
    }
  }

  // At lambda_min + 1/eta_j the pole arm alone carries mass ~1.
  Scalar offset = Scalar(1) / eta[pole_arm];
  Scalar lo = lambda_min + offset;
  Scalar mass_lo = detail::stationary_mass(obj, lo);
  for (int n = 0; mass_lo < Scalar(1); ++n) {
    if (n == kMaxDoublings)
      throw NumericalError("omd_step: failed to bracket from below; " + detail::describe(obj));
    offset /= Scalar(2);
    lo = lambda_min + offset;
    mass_lo = detail::stationary_mass(obj, lo);
  }

  Scalar span = Scalar(2) * offset;
  Scalar hi = lambda_min + span;
  Scalar mass_hi = detail::stationary_mass(obj, hi);
  for (int n = 0; mass_hi >= Scalar(1); ++n) {
    if (n == kMaxDoublings)
      throw NumericalError("omd_step: failed to bracket after 200 doublings; " +
                           detail::describe(obj));
    span *= Scalar(2);
    hi = lambda_min + span;
    mass_hi = detail::stationary_mass(obj, hi);
  }

  Scalar lambda = lo;
  Scalar mass = mass_lo;
  int it = 0;
  while (std::abs(mass - Scalar(1)) > tol && it < kMaxIterations) {
    ++it;
    const Scalar mid = lo + (hi - lo) / Scalar(2);
    if (mid <= lo || mid >= hi) break;  // bracket exhausted at this precision
    const Scalar m = detail::stationary_mass(obj, mid);
    if (m > mass_lo || m < mass_hi)
      throw NumericalError("omd_step: normalization mass not monotone in the multiplier; " +
                           detail::describe(obj));
    lambda = mid;
    mass = m;
    if (m > Scalar(1)) {
      lo = mid;
      mass_lo = m;
    } else {
      hi = mid;
      mass_hi = m;
    }
  }
  // Pick the better endpoint if bisection stalled before reaching tol.
  if (std::abs(mass - Scalar(1)) > tol) {
    if (std::abs(mass_lo - Scalar(1)) < std::abs(mass - Scalar(1))) {
      lambda = lo;
      mass = mass_lo;
    }
    if (std::abs(mass_hi - Scalar(1)) < std::abs(mass - Scalar(1))) {
      lambda = hi;
      mass = mass_hi;
    }
  }
  if (std::abs(mass - Scalar(1)) > simplex_tolerance<Scalar>())
    throw NumericalError("omd_step: bisection did not converge; " + detail::describe(obj));

  Vector<Scalar> w(k);
  for (Eigen::Index i = 0; i < k; ++i)
    w[i] = Scalar(1) / (eta[i] * (obj.linear[i] + lambda) + Scalar(1) / wp[i]);
  return {SimplexPoint<Scalar>(std::move(w)), lambda, it};
}

template <typename Scalar>
SimplexPoint<Scalar> omd_step(const BarrierObjective<Scalar>& obj) {
  return solve_omd(obj).point;
}

/// First-order optimality residual of a candidate w for obj: the spread of
/// the objective gradient across coordinates (zero when a single multiplier
/// balances every coordinate), combined with the normalization error
/// scaled by kkt_normalization_weight().
/// Maps the solver's 1e-12 normalization tolerance onto a residual of 1e-6.
template <typename Scalar>
Scalar kkt_normalization_weight() {
  return Scalar(1e6);
}

template <typename Scalar>
Scalar kkt_residual(const Vector<Scalar>& w, const BarrierObjective<Scalar>& obj) {
  const auto& wp = obj.prev.weights();
  const auto& eta = obj.rates.rates();
  if (w.size() != wp.size()) throw DomainError("kkt_residual: dimension mismatch");
  Vector<Scalar> grad(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w[i] > Scalar(0))) throw DomainError("kkt_residual: w must be strictly positive");
    grad[i] = obj.linear[i] + Scalar(1) / (eta[i] * wp[i]) - Scalar(1) / (eta[i] * w[i]);
  }
  const Scalar multiplier = -grad.mean();
  const Scalar stationarity = (grad.array() + multiplier).abs().maxCoeff();
  const Scalar normalization = std::abs(w.sum() - Scalar(1)) * kkt_normalization_weight<Scalar>();
  return std::max(stationarity, normalization);
}

template <typename Scalar>
Scalar kkt_residual(const SimplexPoint<Scalar>& w, const BarrierObjective<Scalar>& obj) {
  return kkt_residual<Scalar>(w.weights(), obj);
}

/// (1 - 1/T) w + 1/(K T): every coordinate is at least 1/(K T).
template <typename Scalar>
SimplexPoint<Scalar> mix_uniform(const SimplexPoint<Scalar>& w, long horizon) {
  if (horizon < 2) throw DomainError("mix_uniform: horizon must be at least 2");
  const Scalar t = static_cast<Scalar>(horizon);
  const Scalar k = static_cast<Scalar>(w.size());
  Vector<Scalar> mixed = (Scalar(1) - Scalar(1) / t) * w.weights();
  mixed.array() += Scalar(1) / (k * t);
  return SimplexPoint<Scalar>(std::move(mixed));
}

/// Minimizer of sum_i (1/eta_i) ln(1/w_i) over the simplex: w_i proportional
/// to 1/eta_i.
template <typename Scalar>
SimplexPoint<Scalar> init_point(const LearningRates<Scalar>& rates) {
  Vector<Scalar> w = rates.rates().cwiseInverse();
  w /= w.sum();
  return SimplexPoint<Scalar>(std::move(w));
}

}  // namespace broad
