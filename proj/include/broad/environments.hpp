#pragma once

// Loss sources: oblivious loss matrices (played back or generated), the
// stochastic constant-gap environment, piecewise-constant switching losses,
// and two-player zero-sum self-play with expected-loss feedback.

#include "broad/core.hpp"
#include "broad/learner.hpp"
#include "broad/log_barrier.hpp"
#include "broad/rng.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace broad {

/// T x K losses in [-1, 1], row t-1 holding round t.
class LossMatrix {
 public:
  explicit LossMatrix(Mat entries);

  long rounds() const { return static_cast<long>(entries_.rows()); }
  Eigen::Index arms() const { return entries_.cols(); }
  const Mat& entries() const { return entries_; }

  /// Loss vector of round t, 1 <= t <= T.
  Vec env_playback(long t) const;
  double loss(long t, Eigen::Index arm) const;

  bool non_negative() const { return entries_.minCoeff() >= 0.0; }

 private:
  Mat entries_;
};

/// CSV with one row per round and K columns. A header line starting with
/// "round" is skipped; a leading round column is dropped when the header
/// names one.
LossMatrix read_loss_csv(std::istream& in);
LossMatrix read_loss_csv_file(const std::string& path);
void write_loss_csv(std::ostream& out, const LossMatrix& matrix);

enum class GapFamily { kBernoulli, kMarkov };

/// Arm `best_arm` has conditional mean loss exactly `gap` below every other
/// arm at every round. kBernoulli: independent Bernoulli(mean - gap) and
/// Bernoulli(mean). kMarkov: the base mean follows a two-state chain
/// (mean - spread, mean + spread) flipping with probability `flip`, so losses
/// are neither independent nor identically distributed.
struct GapEnvironment {
  Eigen::Index arms = 2;
  Eigen::Index best_arm = 0;
  double gap = 0.1;
  double base_mean = 0.5;
  GapFamily family = GapFamily::kBernoulli;
  double spread = 0.2;
  double flip = 0.01;
};

void validate(const GapEnvironment& env);

/// Stateful sampler; each call produces the loss vector of the next round.
class GapSampler {
 public:
  explicit GapSampler(GapEnvironment env);

  /// Conditional mean loss of every arm given the current hidden state.
  Vec conditional_means() const;
  Vec env_gap_sample(Rng& rng);

 private:
  GapEnvironment env_;
  int state_ = 0;
  bool started_ = false;
};

LossMatrix materialize_gap(const GapEnvironment& env, long horizon, Rng& rng);

struct SwitchingInstance {
  LossMatrix matrix;
  std::vector<long> change_points;
  Vec path_lengths;  // per-arm V_{T,i}, with the round-0 loss taken as 0
};

/// Piecewise-constant losses in [0, 1] with `switches` change points placed
/// uniformly among rounds 2..T.
SwitchingInstance env_switching(Eigen::Index arms, long horizon, long switches, Rng& rng);

/// Zero-sum game: G(i, j) is the row player's loss and the column player's
/// reward.
class GameMatrix {
 public:
  explicit GameMatrix(Mat g);
  static GameMatrix matching_pennies();

  const Mat& matrix() const { return g_; }
  Eigen::Index rows() const { return g_.rows(); }
  Eigen::Index cols() const { return g_.cols(); }

 private:
  Mat g_;
};

GameMatrix read_game_csv_file(const std::string& path);

struct DualityGap {
  double upper = 0.0;  // max_j (x^T G)_j
  double lower = 0.0;  // min_i (G y)_i
  double gap = 0.0;
};

DualityGap duality_gap(const Vec& x, const Vec& y, const GameMatrix& g);

/// Self-play starting point: a flat-Dirichlet draw averaged with the uniform
/// point, so every coordinate is at least 1/(2K).
SimplexPoint<double> random_interior_point(Eigen::Index arms, Rng& rng);

struct SelfPlayStep {
  Vec x;
  Eigen::Index row = 0;
  Vec y;
  Eigen::Index col = 0;
  double row_loss = 0.0;  // e_i^T G y
  double col_loss = 0.0;  // -x^T G e_j
};

struct SelfPlayResult {
  Vec x_bar;
  Vec y_bar;
  std::vector<long> checkpoints;
  std::vector<double> checkpoint_gaps;  // duality gap of the running averages
  std::vector<SelfPlayStep> trace;      // filled only when requested
};

/// Both players commit, draw independently, then receive the expected loss
/// of their own realized action over the opponent's mixed strategy. The
/// column player minimizes the negated reward.
SelfPlayResult self_play(const GameMatrix& g, BanditLearner& row_player,
                         BanditLearner& col_player, long horizon, Rng& row_rng, Rng& col_rng,
                         const std::vector<long>& checkpoints = {}, bool keep_trace = false);

}  // namespace broad
