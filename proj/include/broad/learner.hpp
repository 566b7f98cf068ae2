#pragma once

#include "broad/core.hpp"
#include "broad/rng.hpp"

namespace broad {

/// Two-phase bandit protocol: act() commits to a distribution and draws an
/// arm, observe() receives the loss of that arm only.
class BanditLearner {
 public:
  virtual ~BanditLearner() = default;

  virtual Eigen::Index arms() const = 0;
  virtual Eigen::Index act(Rng& rng) = 0;
  /// Distribution the most recent act() sampled from.
  virtual const Vec& strategy() const = 0;
  virtual void observe(double loss, Rng& rng) = 0;
};

}  // namespace broad
