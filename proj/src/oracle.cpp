#include "broad/oracle.hpp"

#include "broad/broad_omd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace broad {

namespace {

struct GridBest {
  long a = 0;
  long b = 0;
  double value = std::numeric_limits<double>::infinity();
};

double objective(const Vec& w, const Simplex& prev, const Vec& x, const Rates& rates) {
  double v = w.dot(x);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double y = w[i] / prev[i];
    v += (y - 1.0 - std::log(y)) / rates[i];
  }
  return v;
}

// Exhaustive search over lattice points (a/n, b/n, 1 - (a+b)/n) with every
// coordinate >= 1/n, restricted to a in [a_lo, a_hi], b in [b_lo, b_hi].
GridBest search_window(long n, long a_lo, long a_hi, long b_lo, long b_hi, const Simplex& prev,
                       const Vec& x, const Rates& rates) {
  GridBest best;
  Vec w(3);
  a_lo = std::max(a_lo, 1L);
  b_lo = std::max(b_lo, 1L);
  for (long a = a_lo; a <= a_hi; ++a) {
    for (long b = b_lo; b <= b_hi && a + b <= n - 1; ++b) {
      w << static_cast<double>(a) / static_cast<double>(n),
          static_cast<double>(b) / static_cast<double>(n),
          static_cast<double>(n - a - b) / static_cast<double>(n);
      const double v = objective(w, prev, x, rates);
      if (v < best.value) best = {a, b, v};
    }
  }
  return best;
}

}  // namespace

Simplex grid_search_omd(const Simplex& prev, const Vec& x, const Rates& rates,
                        const GridSpec& grid) {
  const Eigen::Index k = prev.size();
  if (k > 3) throw ConfigError("grid_search_omd supports K <= 3 only");
  if (x.size() != k || rates.size() != k) throw DomainError("grid_search_omd: dimension mismatch");
  if (!(grid.resolution > 0.0 && grid.resolution < 0.5))
    throw ConfigError("grid resolution must lie in (0, 0.5)");
  if (k == 1) return Simplex(Vec::Ones(1));

  const long n = std::lround(1.0 / grid.resolution);
  if (k == 2) {
    long best_a = 1;
    double best_v = std::numeric_limits<double>::infinity();
    Vec w(2);
    for (long a = 1; a <= n - 1; ++a) {
      w << static_cast<double>(a) / static_cast<double>(n),
          static_cast<double>(n - a) / static_cast<double>(n);
      const double v = objective(w, prev, x, rates);
      if (v < best_v) {
        best_v = v;
        best_a = a;
      }
    }
    Vec out(2);
    out << static_cast<double>(best_a) / static_cast<double>(n),
        static_cast<double>(n - best_a) / static_cast<double>(n);
    return Simplex(out);
  }

  constexpr long kCoarse = 100;
  constexpr long kHalfWindow = 10;  // in cells of the previous lattice
  long level_n = std::min(n, kCoarse);
  GridBest best = search_window(level_n, 1, level_n, 1, level_n, prev, x, rates);
  while (level_n < n) {
    const long next_n = std::min(n, level_n * 10);
    const double ratio = static_cast<double>(next_n) / static_cast<double>(level_n);
    const long half = static_cast<long>(std::ceil(kHalfWindow * ratio));
    long ca = std::lround(static_cast<double>(best.a) * ratio);
    long cb = std::lround(static_cast<double>(best.b) * ratio);
    // Re-center while the minimizer sits on an interior window edge.
    for (int attempt = 0; attempt < 50; ++attempt) {
      best = search_window(next_n, ca - half, ca + half, cb - half, cb + half, prev, x, rates);
      const bool edge_a = (best.a == ca - half && ca - half > 1) || best.a == ca + half;
      const bool edge_b = (best.b == cb - half && cb - half > 1) || best.b == cb + half;
      if (!edge_a && !edge_b) break;
      ca = best.a;
      cb = best.b;
    }
    level_n = next_n;
  }
  Vec out(3);
  out << static_cast<double>(best.a) / static_cast<double>(n),
      static_cast<double>(best.b) / static_cast<double>(n),
      static_cast<double>(n - best.a - best.b) / static_cast<double>(n);
  return Simplex(out);
}

Exp3::Exp3(Eigen::Index arms, double eta)
    : eta_(eta), cumulative_(Vec::Zero(arms)), probabilities_(Vec::Zero(arms)) {
  if (arms < 1) throw ConfigError("Exp3 needs at least one arm");
  if (!(eta > 0.0)) throw ConfigError("Exp3 rate must be positive");
  refresh();
}

Exp3::Exp3(const Simplex& initial, double eta) : Exp3(initial.size(), eta) {
  cumulative_ = -initial.weights().array().log().matrix() / eta;
  refresh();
}

double Exp3::default_rate(Eigen::Index arms, long horizon) {
  const double k = static_cast<double>(arms);
  return std::sqrt(std::log(k) / (static_cast<double>(horizon) * k));
}

void Exp3::refresh() {
  const double lowest = cumulative_.minCoeff();
  probabilities_ = (-eta_ * (cumulative_.array() - lowest)).exp().matrix();
  probabilities_ /= probabilities_.sum();
}

Eigen::Index Exp3::act(Rng& rng) { return act_with_draw(rng.uniform()); }

Eigen::Index Exp3::act_with_draw(double u) {
  pending_ = sample_index(probabilities_, u);
  return pending_;
}

void Exp3::observe(double loss, Rng&) {
  if (pending_ < 0) throw std::logic_error("Exp3::observe called without act()");
  const Eigen::Index arm = pending_;
  pending_ = -1;
  exp3_round(arm, loss);
}

void Exp3::exp3_round(Eigen::Index chosen, double loss) {
  if (chosen < 0 || chosen >= arms()) throw DomainError("Exp3: arm out of range");
  cumulative_[chosen] += loss / probabilities_[chosen];
  refresh();
}

Eigen::Index best_arm(const Vec& cumulative_losses) {
  if (cumulative_losses.size() == 0) throw DomainError("best_arm: empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < cumulative_losses.size(); ++i)
    if (cumulative_losses[i] < cumulative_losses[best]) best = i;
  return best;
}

std::vector<RegretPoint> regret_of_trace(const std::vector<Eigen::Index>& chosen,
                                         const LossMatrix& losses,
                                         const std::vector<long>& checkpoints,
                                         std::optional<Eigen::Index> comparator) {
  const long horizon = static_cast<long>(chosen.size());
  if (horizon > losses.rounds()) throw DomainError("trace longer than the loss matrix");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw DomainError("checkpoints must be sorted");
  if (!checkpoints.empty() && (checkpoints.front() < 1 || checkpoints.back() > horizon))
    throw DomainError("checkpoint outside the trace");

  const Mat& m = losses.entries();
  const Eigen::Index target =
      comparator.value_or(best_arm(m.topRows(horizon).colwise().sum().transpose()));

  std::vector<RegretPoint> out;
  out.reserve(checkpoints.size());
  Vec column_sums = Vec::Zero(losses.arms());
  double realized = 0.0;
  std::size_t next = 0;
  for (long t = 1; t <= horizon && next < checkpoints.size(); ++t) {
    const Eigen::Index arm = chosen[static_cast<std::size_t>(t - 1)];
    realized += m(t - 1, arm);
    column_sums += m.row(t - 1).transpose();
    while (next < checkpoints.size() && checkpoints[next] == t) {
      out.push_back({t, realized - column_sums[target], realized - column_sums.minCoeff()});
      ++next;
    }
  }
  return out;
}

double path_length(const LossMatrix& losses, Eigen::Index arm) {
  if (arm < 0 || arm >= losses.arms()) throw DomainError("arm out of range");
  double total = 0.0;
  double previous = 0.0;
  for (long t = 0; t < losses.rounds(); ++t) {
    const double v = losses.entries()(t, arm);
    total += std::abs(v - previous);
    previous = v;
  }
  return total;
}

double variance_stat(const LossMatrix& losses, Eigen::Index arm) {
  if (arm < 0 || arm >= losses.arms()) throw DomainError("arm out of range");
  const auto column = losses.entries().col(arm);
  const double mean = column.mean();
  return (column.array() - mean).square().sum();
}

StreamingArmStats::StreamingArmStats(Eigen::Index arms)
    : previous_(Vec::Zero(arms)), path_(Vec::Zero(arms)), mean_(Vec::Zero(arms)),
      m2_(Vec::Zero(arms)) {}

void StreamingArmStats::push(const Vec& row) {
  if (row.size() != path_.size()) throw DomainError("StreamingArmStats: row width mismatch");
  ++n_;
  path_ += (row - previous_).cwiseAbs();
  previous_ = row;
  const Vec delta = row - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta.cwiseProduct(row - mean_);
}

}  // namespace broad
