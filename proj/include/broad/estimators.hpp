#pragma once

// Loss estimators from one-arm feedback, optimistic predictors, the
// comparator-dependent correction term, and the per-round stability
// conditions that the log-barrier analysis needs.

#include "broad/core.hpp"
#include "broad/log_barrier.hpp"
#include "broad/rng.hpp"

#include <optional>
#include <vector>

namespace broad {

using Simplex = SimplexPoint<double>;
using Rates = LearningRates<double>;

/// Step-size ceiling under which the stability conditions are proven.
inline constexpr double kRateCap = 1.0 / 162.0;
inline constexpr double kMagnitudeBound = 3.0;
inline constexpr double kSecondMomentBound = 1.0 / 18.0;

struct LossEstimate {
  Vec values;
  Eigen::Index chosen = 0;
};

/// Predicted loss vector, every coordinate in [-1, 1].
class Prediction {
 public:
  explicit Prediction(Vec values);
  const Vec& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Vec values_;
};

struct Correction {
  Vec values;
};

/// (loss - m_chosen)/p_chosen + m_chosen on the chosen arm, m elsewhere.
LossEstimate estimate_vr(double observed_loss, Eigen::Index chosen, const Simplex& prob,
                         const Prediction& m);

/// loss/p_chosen on the chosen arm, zero elsewhere.
LossEstimate estimate_plain(double observed_loss, Eigen::Index chosen, const Simplex& prob);

/// a_i = 6 eta_i w_i (est_i - m_i)^2.
Correction correction_option_i(const Rates& rates, const Simplex& w, const LossEstimate& est,
                               const Prediction& m);

struct ConditionReport {
  double max_rate = 0.0;          // (i)   max_i eta_i
  double max_scaled_error = 0.0;  // (ii)  max_i w_i |est_i - m_i|
  double second_moment = 0.0;     // (iii) sum_i eta_i w_i^2 (est_i - m_i)^2
  bool rate_ok = true;
  bool magnitude_ok = true;
  bool second_moment_ok = true;

  bool all() const { return rate_ok && magnitude_ok && second_moment_ok; }
};

/// Evaluates the three stability conditions. `rate_cap` defaults to 1/162;
/// pass infinity to skip condition (i).
ConditionReport check_conditions(const Rates& rates, const Simplex& w, const LossEstimate& est,
                                 const Prediction& m, double rate_cap = kRateCap);

Prediction predictor_zero(Eigen::Index k);

/// Constant prediction equal to the realized loss of the drawn arm. Only
/// meaningful when the playing point ignores m (identical coordinates).
Prediction predictor_realized(double observed_loss, Eigen::Index k);

/// Most recent observed loss of each arm, 0 before the first observation.
class LastObservedState {
 public:
  explicit LastObservedState(Eigen::Index k);

  void feed_observation(long round, Eigen::Index chosen, double loss);
  void reset();

  const Vec& last_loss() const { return last_; }
  /// Round of the most recent pick of arm i, 0 if never picked.
  long last_round(Eigen::Index i) const { return rounds_[static_cast<std::size_t>(i)]; }
  Eigen::Index size() const { return last_.size(); }

 private:
  Vec last_;
  std::vector<long> rounds_;
};

Prediction predictor_last_observed(const LastObservedState& state);

/// Per-arm size-M uniform reservoirs over each arm's exploration stream.
class ReservoirState {
 public:
  ReservoirState(Eigen::Index k, std::size_t capacity);

  /// Standard reservoir sampling: the n-th observation of the arm enters
  /// with probability M/n, replacing a uniformly chosen slot.
  void offer(Eigen::Index arm, double loss, Rng& rng);

  std::size_t capacity() const { return capacity_; }
  Eigen::Index arms() const { return static_cast<Eigen::Index>(buffers_.size()); }
  const std::vector<double>& buffer(Eigen::Index arm) const {
    return buffers_[static_cast<std::size_t>(arm)];
  }
  long stream_count(Eigen::Index arm) const { return counts_[static_cast<std::size_t>(arm)]; }

  friend bool operator==(const ReservoirState&, const ReservoirState&) = default;

 private:
  std::size_t capacity_;
  std::vector<std::vector<double>> buffers_;
  std::vector<long> counts_;
};

/// Capacity max(1, ceil(ln T)).
std::size_t reservoir_capacity(long horizon);

Prediction predictor_reservoir(const ReservoirState& state);

struct ExplorationDecision {
  bool explore = false;
  std::optional<Eigen::Index> arm;
};

/// Explores with probability min(1, M K / t) and then picks a uniform arm.
/// The caller feeds the observed loss back through ReservoirState::offer.
ExplorationDecision reservoir_schedule(const ReservoirState& state, long round, Rng& rng);

double exploration_probability(std::size_t capacity, Eigen::Index k, long round);

}  // namespace broad
