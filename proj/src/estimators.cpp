#include "broad/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace broad {

namespace {

void require_arm(Eigen::Index chosen, Eigen::Index k) {
  if (chosen < 0 || chosen >= k) throw DomainError("chosen arm out of range");
}

void require_loss(double loss) {
  if (!(loss >= -1.0 && loss <= 1.0)) throw DomainError("observed loss outside [-1, 1]");
}

}  // namespace

Prediction::Prediction(Vec values) : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= -1.0 && values_[i] <= 1.0))
      throw DomainError("Prediction: coordinate outside [-1, 1]");
  }
}

LossEstimate estimate_vr(double observed_loss, Eigen::Index chosen, const Simplex& prob,
                         const Prediction& m) {
  require_loss(observed_loss);
  require_arm(chosen, prob.size());
  if (m.size() != prob.size()) throw DomainError("estimate_vr: dimension mismatch");
  LossEstimate est{m.values(), chosen};
  est.values[chosen] = (observed_loss - m[chosen]) / prob[chosen] + m[chosen];
  return est;
}

LossEstimate estimate_plain(double observed_loss, Eigen::Index chosen, const Simplex& prob) {
  require_loss(observed_loss);
  require_arm(chosen, prob.size());
  LossEstimate est{Vec::Zero(prob.size()), chosen};
  est.values[chosen] = observed_loss / prob[chosen];
  return est;
}

Correction correction_option_i(const Rates& rates, const Simplex& w, const LossEstimate& est,
                               const Prediction& m) {
  const Vec diff = est.values - m.values();
  return {6.0 * rates.rates().cwiseProduct(w.weights()).cwiseProduct(diff.cwiseAbs2())};
}

ConditionReport check_conditions(const Rates& rates, const Simplex& w, const LossEstimate& est,
                                 const Prediction& m, double rate_cap) {
  const Vec scaled = w.weights().cwiseProduct(est.values - m.values());
  ConditionReport report;
  report.max_rate = rates.rates().maxCoeff();
  report.max_scaled_error = scaled.cwiseAbs().maxCoeff();
  report.second_moment = rates.rates().dot(scaled.cwiseAbs2());
  report.rate_ok = report.max_rate <= rate_cap;
  report.magnitude_ok = report.max_scaled_error <= kMagnitudeBound;
  report.second_moment_ok = report.second_moment <= kSecondMomentBound;
  return report;
}

Prediction predictor_zero(Eigen::Index k) { return Prediction(Vec::Zero(k)); }

Prediction predictor_realized(double observed_loss, Eigen::Index k) {
  return Prediction(Vec::Constant(k, observed_loss));
}

LastObservedState::LastObservedState(Eigen::Index k)
    : last_(Vec::Zero(k)), rounds_(static_cast<std::size_t>(k), 0) {}

void LastObservedState::feed_observation(long round, Eigen::Index chosen, double loss) {
  require_arm(chosen, last_.size());
  require_loss(loss);
  last_[chosen] = loss;
  rounds_[static_cast<std::size_t>(chosen)] = round;
}

void LastObservedState::reset() {
  last_.setZero();
  std::fill(rounds_.begin(), rounds_.end(), 0);
}

Prediction predictor_last_observed(const LastObservedState& state) {
  return Prediction(state.last_loss());
}

ReservoirState::ReservoirState(Eigen::Index k, std::size_t capacity)
    : capacity_(capacity), buffers_(static_cast<std::size_t>(k)),
      counts_(static_cast<std::size_t>(k), 0) {
  if (capacity_ == 0) throw ConfigError("reservoir capacity must be positive");
}

void ReservoirState::offer(Eigen::Index arm, double loss, Rng& rng) {
  require_arm(arm, arms());
  require_loss(loss);
  auto& buf = buffers_[static_cast<std::size_t>(arm)];
  const long n = ++counts_[static_cast<std::size_t>(arm)];
  if (buf.size() < capacity_) {
    buf.push_back(loss);
    return;
  }
  const std::size_t slot = rng.index(static_cast<std::size_t>(n));
  if (slot < capacity_) buf[slot] = loss;
}

std::size_t reservoir_capacity(long horizon) {
  if (horizon < 1) throw ConfigError("horizon must be positive");
  const double m = std::ceil(std::log(static_cast<double>(horizon)));
  return std::max<std::size_t>(1, static_cast<std::size_t>(m));
}

Prediction predictor_reservoir(const ReservoirState& state) {
  Vec m = Vec::Zero(state.arms());
  for (Eigen::Index i = 0; i < state.arms(); ++i) {
    const auto& buf = state.buffer(i);
    if (buf.empty()) continue;
    double sum = 0.0;
    for (double v : buf) sum += v;
    m[i] = std::clamp(sum / static_cast<double>(buf.size()), -1.0, 1.0);
  }
  return Prediction(std::move(m));
}

double exploration_probability(std::size_t capacity, Eigen::Index k, long round) {
  if (round < 1) throw DomainError("round must be at least 1");
  return std::min(1.0, static_cast<double>(capacity) * static_cast<double>(k) /
                           static_cast<double>(round));
}

ExplorationDecision reservoir_schedule(const ReservoirState& state, long round, Rng& rng) {
  const double p = exploration_probability(state.capacity(), state.arms(), round);
  ExplorationDecision decision;
  // The coin is always drawn so the stream position does not depend on p.
  const double coin = rng.uniform();
  if (coin < p) {
    decision.explore = true;
    decision.arm = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(state.arms())));
  }
  return decision;
}

}  // namespace broad
