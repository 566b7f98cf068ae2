#pragma once

// Independent reference computations: a brute-force grid minimizer for the
// mirror-descent step, the Exp3 baseline, and regret / loss-sequence
// statistics.

#include "broad/environments.hpp"
#include "broad/estimators.hpp"
#include "broad/learner.hpp"

#include <optional>
#include <vector>

namespace broad {

struct GridSpec {
  double resolution = 1e-3;
};

/// Minimizes <w, x> + D(w, prev) over the interior grid {w : w_i = n_i r,
/// n_i >= 1}. K = 2 is exhaustive; K = 3 runs an exhaustive coarse lattice
/// followed by exhaustive windows on successively finer lattices down to
/// `grid.resolution` (valid because the objective is convex).
Simplex grid_search_omd(const Simplex& prev, const Vec& x, const Rates& rates,
                        const GridSpec& grid);

/// Exponential weights over importance-weighted loss estimates.
class Exp3 : public BanditLearner {
 public:
  Exp3(Eigen::Index arms, double eta);
  /// Starts from the interior distribution `initial` instead of uniform.
  Exp3(const Simplex& initial, double eta);

  /// sqrt(ln K / (T K)).
  static double default_rate(Eigen::Index arms, long horizon);

  Eigen::Index arms() const override { return cumulative_.size(); }
  Eigen::Index act(Rng& rng) override;
  Eigen::Index act_with_draw(double u);
  const Vec& strategy() const override { return probabilities_; }
  void observe(double loss, Rng& rng) override;
  /// Feedback for an explicitly given arm (used by tests and by observe()).
  void exp3_round(Eigen::Index chosen, double loss);

  const Vec& probabilities() const { return probabilities_; }
  double eta() const { return eta_; }

 private:
  void refresh();

  double eta_;
  Vec cumulative_;
  Vec probabilities_;
  Eigen::Index pending_ = -1;
};

/// Lowest-index argmin.
Eigen::Index best_arm(const Vec& cumulative_losses);

struct RegretPoint {
  long checkpoint = 0;
  double regret = 0.0;              // against the best arm of the whole horizon
  double regret_prefix_best = 0.0;  // against the best arm of rounds 1..checkpoint
};

/// Regret at each checkpoint of the played arms `chosen` (round t at index
/// t-1) on `losses`. The horizon is chosen.size(); `comparator` overrides the
/// full-horizon best arm.
std::vector<RegretPoint> regret_of_trace(const std::vector<Eigen::Index>& chosen,
                                         const LossMatrix& losses,
                                         const std::vector<long>& checkpoints,
                                         std::optional<Eigen::Index> comparator = std::nullopt);

/// sum_t |l_{t,i} - l_{t-1,i}| with l_0 = 0.
double path_length(const LossMatrix& losses, Eigen::Index arm);

/// sum_t (l_{t,i} - mean_i)^2 over the whole horizon (two-pass).
double variance_stat(const LossMatrix& losses, Eigen::Index arm);

/// Row-at-a-time path length and Welford variance for every arm.
class StreamingArmStats {
 public:
  explicit StreamingArmStats(Eigen::Index arms);
  void push(const Vec& row);

  const Vec& path_lengths() const { return path_; }
  const Vec& variances() const { return m2_; }
  long count() const { return n_; }

 private:
  long n_ = 0;
  Vec previous_;
  Vec path_;
  Vec mean_;
  Vec m2_;
};

}  // namespace broad
