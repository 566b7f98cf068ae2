#include "broad/broad_omd.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace broad {

std::string to_string(TableRow row) {
  switch (row) {
    case TableRow::kVariance: return "variance";
    case TableRow::kPathPlus: return "path_plus";
    case TableRow::kPathSum: return "path_sum";
    case TableRow::kBestOfBoth: return "best_of_both";
  }
  return "unknown";
}

TableRow parse_table_row(const std::string& name) {
  if (name == "variance") return TableRow::kVariance;
  if (name == "path_plus") return TableRow::kPathPlus;
  if (name == "path_sum") return TableRow::kPathSum;
  if (name == "best_of_both") return TableRow::kBestOfBoth;
  throw ConfigError("unknown algorithm row '" + name + "'");
}

LearnerConfig configure(TableRow row, Eigen::Index arms, long horizon,
                        std::optional<double> eta, bool strict) {
  if (arms < 1) throw ConfigError("arms must be positive");
  if (horizon < 3) throw ConfigError("horizon must be at least 3");
  if (eta && !(*eta > 0.0)) throw ConfigError("eta must be positive");

  LearnerConfig cfg;
  cfg.arms = arms;
  cfg.horizon = horizon;
  cfg.strict = strict;
  cfg.rate_cap = kRateCap;

  const bool doubling_row = row == TableRow::kPathSum || row == TableRow::kBestOfBoth;
  if (!eta && !doubling_row)
    throw ConfigError("eta = auto is only available for path_sum and best_of_both");
  if (eta && strict && *eta > kRateCap)
    throw ConfigError("eta exceeds 1/162 in strict mode");

  switch (row) {
    case TableRow::kVariance:
      cfg.option = CorrectionOption::kOptionI;
      cfg.predictor = PredictorKind::kReservoir;
      cfg.estimator = EstimatorKind::kVarianceReduced;
      cfg.exploration = true;
      cfg.reservoir_size = reservoir_capacity(horizon);
      break;
    case TableRow::kPathPlus:
      if (strict && *eta > 1.0 / 810.0)
        throw ConfigError("path_plus requires eta <= 1/810 in strict mode");
      cfg.option = CorrectionOption::kOptionI;
      cfg.predictor = PredictorKind::kLastObserved;
      cfg.estimator = EstimatorKind::kVarianceReduced;
      cfg.mixing = true;
      cfg.increasing_rates = true;
      break;
    case TableRow::kPathSum:
      cfg.option = CorrectionOption::kOptionII;
      cfg.predictor = PredictorKind::kLastObserved;
      cfg.estimator = EstimatorKind::kVarianceReduced;
      break;
    case TableRow::kBestOfBoth:
      cfg.option = CorrectionOption::kOptionII;
      cfg.predictor = PredictorKind::kRealized;
      cfg.estimator = EstimatorKind::kPlain;
      break;
  }
  cfg.doubling = !eta.has_value();
  cfg.eta = eta.value_or(kRateCap);
  return cfg;
}

double game_learning_rate(Eigen::Index total_actions, long horizon) {
  return std::pow(static_cast<double>(total_actions), -0.25) *
         std::pow(static_cast<double>(horizon), -0.25);
}

LearnerConfig configure_game_player(Eigen::Index arms, Eigen::Index total_actions, long horizon,
                                    bool strict) {
  LearnerConfig cfg = configure(TableRow::kPathSum, arms, horizon, kRateCap, false);
  cfg.eta = game_learning_rate(total_actions, horizon);
  cfg.rate_cap = std::numeric_limits<double>::infinity();
  cfg.strict = strict;
  return cfg;
}

RateSchedule make_rate_schedule(Eigen::Index arms, long horizon) {
  if (horizon < 2) throw ConfigError("increasing rates need a horizon of at least 2");
  RateSchedule s;
  s.thresholds = Vec::Constant(arms, 2.0 * static_cast<double>(arms));
  s.kappa = std::exp(1.0 / std::log(static_cast<double>(horizon)));
  s.increases.assign(static_cast<std::size_t>(arms), 0);
  return s;
}

void rate_schedule_update(RateSchedule& schedule, Rates& rates, const Simplex& sampled) {
  for (Eigen::Index i = 0; i < sampled.size(); ++i) {
    const double inv = 1.0 / sampled[i];
    if (inv > schedule.thresholds[i]) {
      schedule.thresholds[i] = 2.0 * inv;
      rates.multiply(i, schedule.kappa);
      ++schedule.increases[static_cast<std::size_t>(i)];
    }
  }
}

double doubling_threshold(Eigen::Index arms, long horizon, double eta) {
  return static_cast<double>(arms) * std::log(static_cast<double>(horizon)) / (3.0 * eta * eta);
}

bool doubling_step(EpochState& epoch, double increment, Eigen::Index arms, long horizon,
                   long round) {
  if (!(increment >= 0.0)) throw DomainError("doubling increment must be non-negative");
  epoch.statistic += increment;
  if (epoch.statistic < doubling_threshold(arms, horizon, epoch.eta)) return false;
  epoch.eta /= 2.0;
  ++epoch.epoch;
  epoch.statistic = 0.0;
  epoch.start_round = round;
  return true;
}

Eigen::Index sample_index(const Vec& probabilities, double u) {
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  // Rounding left u above the total: take the last arm with positive mass.
  for (Eigen::Index i = probabilities.size() - 1; i > 0; --i)
    if (probabilities[i] > 0.0) return i;
  return 0;
}

namespace {

void validate(const LearnerConfig& c) {
  if (c.arms < 1) throw ConfigError("arms must be positive");
  if (c.horizon < 1) throw ConfigError("horizon must be positive");
  if (!(c.eta > 0.0)) throw ConfigError("eta must be positive");
  if (c.exploration && c.predictor != PredictorKind::kReservoir)
    throw ConfigError("exploration rounds require the reservoir predictor");
  if (c.mixing && c.horizon < 2) throw ConfigError("mixing needs a horizon of at least 2");
  if (c.predictor == PredictorKind::kReservoir && c.reservoir_size == 0)
    throw ConfigError("reservoir size must be positive");
  if (c.initial_point && c.initial_point->size() != c.arms)
    throw ConfigError("initial point has the wrong dimension");
}

}  // namespace

BroadOmd::BroadOmd(LearnerConfig config)
    : config_((validate(config), std::move(config))),
      rates_(Rates::uniform(config_.arms, config_.eta, config_.rate_cap)),
      initial_rates_(rates_.rates()),
      aux_(config_.initial_point ? Simplex(*config_.initial_point) : init_point(rates_)),
      last_(config_.arms),
      sampled_(Vec::Constant(config_.arms, 1.0 / static_cast<double>(config_.arms))) {
  if (config_.increasing_rates) schedule_ = make_rate_schedule(config_.arms, config_.horizon);
  epoch_.eta = config_.eta;
  if (config_.predictor == PredictorKind::kReservoir)
    reservoir_.emplace(config_.arms, config_.reservoir_size);
}

Prediction BroadOmd::current_prediction() const {
  switch (config_.predictor) {
    case PredictorKind::kZero: return predictor_zero(config_.arms);
    case PredictorKind::kLastObserved: return predictor_last_observed(last_);
    case PredictorKind::kReservoir: return predictor_reservoir(*reservoir_);
    case PredictorKind::kRealized: break;
  }
  throw std::logic_error("realized prediction is only known after the draw");
}

Eigen::Index BroadOmd::act(Rng& rng) {
  if (pending_) throw std::logic_error("act() called twice without update()");
  if (config_.exploration) {
    const ExplorationDecision d = reservoir_schedule(*reservoir_, round_ + 1, rng);
    if (d.explore) {
      pending_ = true;
      pending_exploration_ = true;
      pending_arm_ = *d.arm;
      sampled_.setConstant(1.0 / static_cast<double>(config_.arms));
      return pending_arm_;
    }
  }
  return act_with_draw(rng.uniform());
}

Eigen::Index BroadOmd::act_with_draw(double u) {
  if (pending_) throw std::logic_error("act() called twice without update()");
  if (config_.predictor == PredictorKind::kRealized) {
    // m_t has identical coordinates, so w_t = w'_t whatever its value.
    prediction_.reset();
    play_.emplace(aux_);
  } else {
    prediction_.emplace(current_prediction());
    play_.emplace(omd_step(BarrierObjective<double>(aux_, prediction_->values(), rates_)));
  }
  sampling_.emplace(config_.mixing ? mix_uniform(*play_, config_.horizon) : *play_);
  sampled_ = sampling_->weights();
  pending_arm_ = sample_index(sampled_, u);
  pending_exploration_ = false;
  pending_ = true;
  return pending_arm_;
}

void BroadOmd::fail(const std::string& what, const RoundRecord& rec) const {
  std::ostringstream os;
  os.precision(17);
  os << "strict-mode violation at round " << rec.round << ": " << what << " | chosen="
     << rec.chosen << " loss=" << rec.loss << " w=[" << rec.play_point.transpose()
     << "] sampled=[" << rec.sampled.transpose() << "] w'=[" << aux_.weights().transpose()
     << "] w'_next=[" << rec.aux_next.transpose() << "] est=[" << rec.estimate.transpose()
     << "] m=[" << rec.prediction.transpose() << "] eta=[" << rates_.rates().transpose()
     << "] (i)=" << rec.conditions.max_rate << " (ii)=" << rec.conditions.max_scaled_error
     << " (iii)=" << rec.conditions.second_moment;
  throw InvariantViolation(os.str());
}

RoundRecord BroadOmd::update(double loss, Rng& rng) {
  if (!pending_) throw std::logic_error("update() called without act()");
  const long t = round_ + 1;
  const Eigen::Index k = config_.arms;

  RoundRecord rec;
  rec.round = t;
  rec.chosen = pending_arm_;
  rec.loss = loss;
  rec.sampled = sampled_;
  rec.epoch = epoch_.epoch;

  if (pending_exploration_) {
    // Exploration rounds only feed the reservoir; the learner state is frozen.
    reservoir_->offer(pending_arm_, loss, rng);
    rec.exploration = true;
    rec.max_rate = rates_.rates().maxCoeff();
    round_ = t;
    pending_ = false;
    return rec;
  }

  const Simplex& w = *play_;
  const Simplex& p = *sampling_;
  const Prediction m = prediction_ ? *prediction_ : predictor_realized(loss, k);
  const LossEstimate est = config_.estimator == EstimatorKind::kVarianceReduced
                               ? estimate_vr(loss, pending_arm_, p, m)
                               : estimate_plain(loss, pending_arm_, p);
  const Vec correction = config_.option == CorrectionOption::kOptionI
                             ? correction_option_i(rates_, w, est, m).values
                             : Vec::Zero(k);
  Simplex next = omd_step(BarrierObjective<double>(aux_, est.values + correction, rates_));

  rec.play_point = w.weights();
  rec.estimate = est.values;
  rec.prediction = m.values();
  rec.aux_next = next.weights();
  rec.conditions = check_conditions(rates_, w, est, m, config_.rate_cap);
  const Vec ratio = next.weights().cwiseQuotient(w.weights());
  rec.sandwich_min = ratio.minCoeff();
  rec.sandwich_max = ratio.maxCoeff();
  const Vec innovation = est.values - m.values();
  const Vec drift = innovation + correction;
  const Vec step = w.weights() - next.weights();
  rec.stability_lhs = step.dot(drift);
  rec.stability_rhs = w.weights().dot(correction);
  rec.doubling_increment = w.weights().cwiseProduct(innovation).squaredNorm();

  if (config_.strict) {
    if (!rec.conditions.rate_ok) fail("condition (i) max eta exceeds the cap", rec);
    if (!rec.conditions.magnitude_ok) fail("condition (ii) w|est - m| exceeds 3", rec);
    if (!rec.conditions.second_moment_ok) fail("condition (iii) exceeds 1/18", rec);
    constexpr double kSlack = 1e-12;
    if (rec.sandwich_min < 0.5 - kSlack || rec.sandwich_max > 1.5 + kSlack)
      fail("w'_{t+1} / w_t left [0.5, 1.5]", rec);
    if (config_.option == CorrectionOption::kOptionI) {
      const double scale = std::max(
          1.0, std::abs(rec.stability_rhs) + step.cwiseAbs().dot(drift.cwiseAbs()));
      if (rec.stability_lhs > rec.stability_rhs + 1e-8 * scale)
        fail("<w - w'_next, est - m + a> exceeds <w, a>", rec);
    }
  }

  aux_ = std::move(next);
  last_.feed_observation(t, pending_arm_, loss);

  if (config_.increasing_rates) {
    rate_schedule_update(schedule_, rates_, p);
    if (config_.strict) {
      const int bound = static_cast<int>(std::floor(std::log2(static_cast<double>(config_.horizon))));
      for (Eigen::Index i = 0; i < k; ++i) {
        if (schedule_.increases[static_cast<std::size_t>(i)] > bound)
          fail("rate increased more than floor(log2 T) times", rec);
        if (rates_[i] > 5.0 * initial_rates_[i] * (1.0 + 1e-12))
          fail("rate grew beyond 5x its initial value", rec);
      }
    }
  }

  if (config_.doubling &&
      doubling_step(epoch_, rec.doubling_increment, k, config_.horizon, t)) {
    rates_ = Rates::uniform(k, epoch_.eta, config_.rate_cap);
    aux_ = init_point(rates_);
    last_.reset();
    rec.restarted = true;
  }

  rec.max_rate = rates_.rates().maxCoeff();
  if (config_.increasing_rates) {
    for (int n : schedule_.increases) rec.max_increases = std::max(rec.max_increases, n);
  }
  round_ = t;
  pending_ = false;
  return rec;
}

RoundRecord BroadOmd::play_round(const std::function<double(Eigen::Index)>& feedback, Rng& rng) {
  const Eigen::Index arm = act(rng);
  return update(feedback(arm), rng);
}

}  // namespace broad
