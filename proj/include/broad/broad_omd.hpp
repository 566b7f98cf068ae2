#pragma once

// Log-barrier optimistic mirror descent for adversarial bandits.
//
// Each round plays w_t = argmin <w, m_t> + D(w, w'_t), samples an arm, builds
// an unbiased loss estimate and moves the auxiliary point with
// w'_{t+1} = argmin <w, est_t + a_t> + D(w, w'_t). The correction a_t is
// either 6 eta_i w_i (est_i - m_i)^2 ("option I") or zero ("option II").
// Optional layers: uniform mixing with increasing per-arm rates, a doubling
// restart wrapper, and reservoir exploration rounds feeding a running-mean
// predictor.

#include "broad/estimators.hpp"
#include "broad/learner.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace broad {

enum class CorrectionOption { kOptionI, kOptionII };
enum class PredictorKind { kZero, kLastObserved, kReservoir, kRealized };
enum class EstimatorKind { kVarianceReduced, kPlain };

/// The four shipped configurations.
enum class TableRow { kVariance, kPathPlus, kPathSum, kBestOfBoth };

std::string to_string(TableRow row);
TableRow parse_table_row(const std::string& name);

struct LearnerConfig {
  Eigen::Index arms = 2;
  long horizon = 3;
  CorrectionOption option = CorrectionOption::kOptionII;
  PredictorKind predictor = PredictorKind::kZero;
  EstimatorKind estimator = EstimatorKind::kVarianceReduced;
  double eta = kRateCap;
  /// Sample from (1 - 1/T) w + 1/(KT) instead of w.
  bool mixing = false;
  /// Multiply eta_i by kappa whenever 1/wbar_i crosses its threshold.
  bool increasing_rates = false;
  /// Halve eta and restart when the second-order statistic crosses its threshold.
  bool doubling = false;
  /// Reservoir exploration rounds (requires the reservoir predictor).
  bool exploration = false;
  std::size_t reservoir_size = 1;
  /// Ceiling used by condition (i); infinity skips that condition.
  double rate_cap = kRateCap;
  bool strict = false;
  /// First auxiliary point; empty selects init_point(rates). Restarts always
  /// use init_point.
  std::optional<Vec> initial_point;
};

/// Fully wires one of the four rows for K arms and horizon T. An empty eta
/// selects the doubling wrapper (only for the two option-II rows).
LearnerConfig configure(TableRow row, Eigen::Index arms, long horizon,
                        std::optional<double> eta, bool strict);

/// Option-II path-length learner with eta = (M+N)^{-1/4} T^{-1/4}, used by
/// both seats of the self-play experiment. Condition (i) is not enforced.
LearnerConfig configure_game_player(Eigen::Index arms, Eigen::Index total_actions, long horizon,
                                    bool strict);

double game_learning_rate(Eigen::Index total_actions, long horizon);

struct RateSchedule {
  Vec thresholds;
  double kappa = 1.0;
  std::vector<int> increases;
};

/// thresholds 2K, kappa = exp(1 / ln T).
RateSchedule make_rate_schedule(Eigen::Index arms, long horizon);

/// For every arm with 1/wbar_i > rho_i: rho_i <- 2/wbar_i, eta_i <- kappa eta_i.
void rate_schedule_update(RateSchedule& schedule, Rates& rates, const Simplex& sampled);

struct EpochState {
  int epoch = 0;
  double eta = kRateCap;
  double statistic = 0.0;
  long start_round = 0;
};

/// K ln T / (3 eta^2).
double doubling_threshold(Eigen::Index arms, long horizon, double eta);

/// Adds the round's sum_i w_i^2 (est_i - m_i)^2 and reports whether the
/// learner must restart; on restart eta is halved and the statistic cleared.
bool doubling_step(EpochState& epoch, double increment, Eigen::Index arms, long horizon,
                   long round);

struct RoundRecord {
  long round = 0;
  Eigen::Index chosen = 0;
  double loss = 0.0;
  bool exploration = false;
  Vec play_point;      // w_t
  Vec sampled;         // distribution the arm was drawn from
  Vec estimate;        // loss estimate (empty on exploration rounds)
  Vec prediction;      // m_t (empty on exploration rounds)
  Vec aux_next;        // w'_{t+1}
  ConditionReport conditions;
  double sandwich_min = 1.0;  // min_i w'_{t+1,i} / w_{t,i}
  double sandwich_max = 1.0;
  double stability_lhs = 0.0;  // <w_t - w'_{t+1}, est - m + a>
  double stability_rhs = 0.0;  // <w_t, a>
  double doubling_increment = 0.0;
  int epoch = 0;
  bool restarted = false;
  double max_rate = 0.0;
  int max_increases = 0;
};

class BroadOmd : public BanditLearner {
 public:
  explicit BroadOmd(LearnerConfig config);

  Eigen::Index arms() const override { return config_.arms; }

  /// Decides the round: a reservoir exploration arm, or a draw from the
  /// playing distribution using one uniform variate.
  Eigen::Index act(Rng& rng) override;
  /// Non-exploration draw with an explicit uniform variate in [0, 1).
  Eigen::Index act_with_draw(double u);

  const Vec& strategy() const override { return sampled_; }

  void observe(double loss, Rng& rng) override { update(loss, rng); }
  RoundRecord update(double loss, Rng& rng);

  /// act + feedback + update in one call.
  RoundRecord play_round(const std::function<double(Eigen::Index)>& feedback, Rng& rng);

  const LearnerConfig& config() const { return config_; }
  const Simplex& aux_point() const { return aux_; }
  const Rates& rates() const { return rates_; }
  const Vec& initial_rates() const { return initial_rates_; }
  long round() const { return round_; }
  const RateSchedule& schedule() const { return schedule_; }
  const EpochState& epoch() const { return epoch_; }
  int restarts() const { return epoch_.epoch; }
  const LastObservedState& last_observed() const { return last_; }
  const std::optional<ReservoirState>& reservoir() const { return reservoir_; }

 private:
  Prediction current_prediction() const;
  [[noreturn]] void fail(const std::string& what, const RoundRecord& rec) const;

  LearnerConfig config_;
  Rates rates_;
  Vec initial_rates_;
  Simplex aux_;
  long round_ = 0;
  RateSchedule schedule_;
  EpochState epoch_;
  LastObservedState last_;
  std::optional<ReservoirState> reservoir_;

  // Pending decision between act() and update().
  bool pending_ = false;
  bool pending_exploration_ = false;
  Eigen::Index pending_arm_ = 0;
  std::optional<Simplex> play_;
  std::optional<Simplex> sampling_;
  std::optional<Prediction> prediction_;
  Vec sampled_;
};

/// Inverse-CDF sampling with one uniform draw; ties go to the lower index.
Eigen::Index sample_index(const Vec& probabilities, double u);

}  // namespace broad
