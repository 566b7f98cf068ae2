// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "broad/broad_omd.hpp"
#include "broad/environments.hpp"
#include "broad/estimators.hpp"
#include "broad/harness.hpp"
#include "broad/log_barrier.hpp"
#include "broad/oracle.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace broad;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "broad_acceptance";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<std::uint64_t> seeds(int n) {
  std::vector<std::uint64_t> s;
  for (int i = 1; i <= n; ++i) s.push_back(static_cast<std::uint64_t>(i));
  return s;
}

const AggregatePoint& at(const ExperimentResult& r, long checkpoint) {
  for (const auto& p : r.aggregate)
    if (p.checkpoint == checkpoint) return p;
  throw DomainError("missing checkpoint " + std::to_string(checkpoint));
}

Outcome solver_correctness() {
  Rng rng(101);
  double worst_gap = 0.0;
  double worst_kkt = 0.0;
  constexpr double kResolution = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index k = trial % 2 == 0 ? 2 : 3;
    Vec p(k), x(k), eta(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      p[i] = 0.05 + rng.uniform();
      x[i] = -5.0 + 10.0 * rng.uniform();
      eta[i] = 1e-3 + 5e-3 * rng.uniform();
    }
    const Simplex prev(p / p.sum());
    const Rates rates(eta);
    const BarrierObjective<double> obj(prev, x, rates);
    const Simplex w = omd_step(obj);
    const Simplex g = grid_search_omd(prev, x, rates, {kResolution});
    worst_gap = std::max(worst_gap, (w.weights() - g.weights()).cwiseAbs().maxCoeff());
    worst_kkt = std::max(worst_kkt, kkt_residual(w, obj));
  }
  return {worst_gap <= 2.0 * kResolution && worst_kkt <= 1e-6,
          "max L_inf gap " + fmt(worst_gap) + ", max KKT residual " + fmt(worst_kkt)};
}

Outcome estimator_unbiasedness() {
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng.uniform() * 7.0);
    const Simplex w = random_interior_point(k, rng);
    Vec loss(k), m(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      loss[i] = 2.0 * rng.uniform() - 1.0;
      m[i] = 2.0 * rng.uniform() - 1.0;
    }
    const Prediction pred(m);
    Vec vr = Vec::Zero(k), plain = Vec::Zero(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      vr += w[i] * estimate_vr(loss[i], i, w, pred).values;
      plain += w[i] * estimate_plain(loss[i], i, w).values;
    }
    worst = std::max({worst, (vr - loss).cwiseAbs().maxCoeff(), (plain - loss).cwiseAbs().maxCoeff()});
  }
  return {worst <= 1e-12, "max deviation " + fmt(worst) + " over 1000 triples"};
}

Outcome inequality_suite() {
  constexpr Eigen::Index kArms = 5;
  constexpr long kHorizon = 10000;
  long violations = 0;
  long rounds = 0;
  std::string first;
  const auto note = [&](const std::string& what) {
    ++violations;
    if (first.empty()) first = what;
  };
  for (TableRow row : {TableRow::kVariance, TableRow::kPathPlus, TableRow::kPathSum,
                       TableRow::kBestOfBoth}) {
    std::optional<double> eta;
    if (row == TableRow::kVariance) eta = kRateCap;
    if (row == TableRow::kPathPlus) eta = 1.0 / 810.0;
    for (EnvKind kind : {EnvKind::kGap, EnvKind::kSwitching}) {
      ExperimentConfig c;
      c.algorithm = to_string(row);
      c.arms = kArms;
      c.horizon = kHorizon;
      c.env.kind = kind;
      c.env.gap = 0.1;
      c.env.switches = 20;
      for (std::uint64_t seed : seeds(5)) {
        const LossMatrix losses = build_environment(c, seed);
        BroadOmd learner(configure(row, kArms, kHorizon, eta, true));
        Rng rng = rng_stream(c.master_seed, seed, Substream::kLearner);
        const std::string tag = to_string(row) + "/" + (kind == EnvKind::kGap ? "gap" : "switching") +
                                "/seed " + std::to_string(seed);
        try {
          for (long t = 1; t <= kHorizon; ++t) {
            const Eigen::Index arm = learner.act(rng);
            const RoundRecord r = learner.update(losses.loss(t, arm), rng);
            ++rounds;
            if (!r.conditions.all()) note(tag + ": condition at round " + std::to_string(t));
            if (r.sandwich_min < 0.5 || r.sandwich_max > 1.5)
              note(tag + ": sandwich at round " + std::to_string(t));
            if (learner.config().option == CorrectionOption::kOptionI && !r.exploration) {
              const double scale = std::max(1.0, std::abs(r.stability_rhs));
              if (r.stability_lhs > r.stability_rhs + 1e-8 * scale)
                note(tag + ": stability inequality at round " + std::to_string(t));
            }
          }
          if (learner.config().increasing_rates) {
            const int bound = static_cast<int>(std::floor(std::log2(static_cast<double>(kHorizon))));
            for (Eigen::Index i = 0; i < kArms; ++i) {
              if (learner.schedule().increases[static_cast<std::size_t>(i)] > bound)
                note(tag + ": too many rate increases");
              if (learner.rates()[i] > 5.0 * learner.initial_rates()[i] * (1.0 + 1e-12))
                note(tag + ": rate above 5x initial");
            }
          }
        } catch (const InvariantViolation& e) {
          note(tag + ": " + e.what());
        }
      }
    }
  }
  return {violations == 0, std::to_string(rounds) + " rounds checked, " + std::to_string(violations) +
                               " violations" + (first.empty() ? "" : " (first: " + first + ")")};
}

Outcome best_of_both_stochastic() {
  ExperimentConfig c;
  c.algorithm = "best_of_both";
  c.arms = 8;
  c.horizon = 100000;
  c.env.kind = EnvKind::kGap;
  c.env.gap = 0.2;
  c.seeds = seeds(10);
  c.checkpoints = {10000, 100000};
  const ExperimentResult r = run_experiment(c);
  const double tenth = at(r, 10000).mean_prefix;
  const double full = at(r, 100000).mean_prefix;
  const double ratio = full / tenth;
  const double bound = 100.0 * 8 * std::log(100000.0) / 0.2;
  return {ratio <= 2.0 && full <= bound,
          "regret(1e4) " + fmt(tenth) + ", regret(1e5) " + fmt(full) + ", ratio " + fmt(ratio) +
              " (limit 2), bound " + fmt(bound)};
}

Outcome best_of_both_small_loss() {
  constexpr long kHorizon = 100000;
  constexpr Eigen::Index kArms = 5;
  Rng gen(505);
  Mat m(kHorizon, kArms);
  for (long t = 0; t < kHorizon; ++t) {
    m(t, 0) = 0.0;
    for (Eigen::Index i = 1; i < kArms; ++i) m(t, i) = gen.uniform() < 0.5 ? 1.0 : 0.0;
  }
  const auto path = scratch_dir() / "small_loss.csv";
  {
    std::ofstream out(path);
    write_loss_csv(out, LossMatrix(m));
  }
  ExperimentConfig c;
  c.algorithm = "best_of_both";
  c.arms = kArms;
  c.horizon = kHorizon;
  c.env.kind = EnvKind::kPlayback;
  c.env.path = path.string();
  c.seeds = seeds(10);
  c.checkpoints = {10000, 100000};
  const ExperimentResult r = run_experiment(c);
  const double tenth = at(r, 10000).mean_prefix;
  const double full = at(r, 100000).mean_prefix;
  const double ratio = full / tenth;
  const double bound = 100.0 * kArms * std::log(static_cast<double>(kHorizon));
  return {full <= bound && ratio <= 2.5, "regret(1e4) " + fmt(tenth) + ", regret(1e5) " + fmt(full) +
                                             ", ratio " + fmt(ratio) + " (limit 2.5), bound " +
                                             fmt(bound)};
}

double switching_regret(long switches, long horizon, const std::string& output = {}) {
  ExperimentConfig c;
  c.algorithm = "path_sum";
  c.arms = 5;
  c.horizon = horizon;
  c.env.kind = EnvKind::kSwitching;
  c.env.switches = switches;
  c.seeds = seeds(10);
  c.checkpoints = {horizon};
  c.output = output;
  return run_experiment(c).aggregate.back().mean;
}

Outcome path_length_sensitivity() {
  const double s1 = switching_regret(1, 100000);
  const double s100 = switching_regret(100, 100000);
  const double s1_short = switching_regret(1, 10000, (scratch_dir() / "switching_a.csv").string());
  const double slope = std::log10(s1 / s1_short);
  return {s100 > s1 && slope < 0.4,
          "regret S=1 " + fmt(s1) + ", S=100 " + fmt(s100) + " (must increase with S); slope at S=1 " +
              fmt(slope) + " (limit 0.4)"};
}

Outcome variance_configuration() {
  constexpr long kHorizon = 100000;
  constexpr Eigen::Index kArms = 5;
  Vec level(kArms);
  level << 0.6, 0.45, 0.3, 0.75, 0.9;
  Mat m(kHorizon, kArms);
  for (long t = 0; t < kHorizon; ++t) m.row(t) = level.transpose();
  const auto path = scratch_dir() / "constant.csv";
  {
    std::ofstream out(path);
    write_loss_csv(out, LossMatrix(m));
  }
  ExperimentConfig c;
  c.algorithm = "variance";
  c.arms = kArms;
  c.horizon = kHorizon;
  c.eta_mode = EtaMode::kOracle;
  c.env.kind = EnvKind::kPlayback;
  c.env.path = path.string();
  c.seeds = seeds(10);
  c.checkpoints = {kHorizon};
  const double regret = run_experiment(c).aggregate.back().mean;
  const double log_t = std::log(static_cast<double>(kHorizon));
  const double bound = 100.0 * kArms * log_t * log_t;
  return {regret <= bound, "regret(1e5) " + fmt(regret) + ", bound " + fmt(bound)};
}

double game_gap(const std::string& algorithm, long horizon, const std::string& output = {}) {
  ExperimentConfig c;
  c.algorithm = algorithm;
  c.horizon = horizon;
  c.env.kind = EnvKind::kGame;
  c.seeds = seeds(10);
  c.checkpoints = {horizon};
  c.output = output;
  return run_game(c).aggregate.back().mean;
}

Outcome game_convergence() {
  const double early = game_gap("path_sum", 5000, (scratch_dir() / "game_a.csv").string());
  const double late = game_gap("path_sum", 50000);
  const double exp3 = game_gap("exp3", 50000);
  return {late < early && late < exp3, "gap(5e3) " + fmt(early) + ", gap(5e4) " + fmt(late) +
                                           ", Exp3 gap(5e4) " + fmt(exp3)};
}

Outcome doubling_mechanics() {
  std::vector<std::string> problems;
  const double threshold = doubling_threshold(3, 100, 1.0 / 162.0);
  if (std::abs(threshold - 120862.1) > 1e-4 * 120862.1) problems.push_back("threshold value");

  EpochState e;
  e.eta = 1.0 / 162.0;
  const bool fired = doubling_step(e, threshold, 3, 100, 7);
  if (!fired || e.eta != 1.0 / 324.0 || e.statistic != 0.0 || e.epoch != 1)
    problems.push_back("halving or reset");

  LearnerConfig lc = configure(TableRow::kPathSum, 2, 3, std::nullopt, false);
  lc.eta = 0.5;
  BroadOmd small(lc);
  Rng rng(909);
  bool reset_ok = false;
  for (int t = 0; t < 50 && !reset_ok; ++t) {
    const double sign = t % 2 == 0 ? 1.0 : -1.0;
    const RoundRecord rec = small.play_round([&](Eigen::Index) { return sign; }, rng);
    if (rec.restarted)
      reset_ok = small.rates()[0] == 0.25 && small.aux_point() == Simplex::uniform(2) &&
                 small.last_observed().last_loss().isZero() && small.epoch().statistic == 0.0;
  }
  if (!reset_ok) problems.push_back("learner reset");

  constexpr long kHorizon = 100000;
  const int limit = static_cast<int>(std::ceil(std::log2(std::sqrt(static_cast<double>(kHorizon))))) + 2;
  int worst = 0;
  for (const std::string algorithm : {"path_sum", "best_of_both"}) {
    ExperimentConfig c;
    c.algorithm = algorithm;
    c.arms = 5;
    c.horizon = kHorizon;
    c.env.kind = EnvKind::kSwitching;
    c.env.switches = 1000;
    c.seeds = seeds(3);
    c.checkpoints = {kHorizon};
    for (const SeedTrace& s : run_experiment(c).per_seed) worst = std::max(worst, s.restarts);
  }
  if (worst > limit) problems.push_back("too many restarts");
  std::string detail = "threshold " + fmt(threshold) + ", max restarts " + std::to_string(worst) +
                       " (limit " + std::to_string(limit) + ")";
  for (const auto& p : problems) detail += "; failed: " + p;
  return {problems.empty(), detail};
}

Outcome determinism() {
  const auto dir = scratch_dir();
  switching_regret(1, 10000, (dir / "switching_b.csv").string());
  game_gap("path_sum", 5000, (dir / "game_b.csv").string());
  const bool regret_same = slurp(dir / "switching_a.csv") == slurp(dir / "switching_b.csv");
  const bool game_same = slurp(dir / "game_a.csv") == slurp(dir / "game_b.csv");
  const bool non_empty = !slurp(dir / "switching_a.csv").empty() && !slurp(dir / "game_a.csv").empty();
  return {regret_same && game_same && non_empty,
          std::string("regret CSV ") + (regret_same ? "identical" : "differs") + ", game CSV " +
              (game_same ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, solver_correctness},      {2, estimator_unbiasedness}, {3, inequality_suite},
      {4, best_of_both_stochastic}, {5, best_of_both_small_loss}, {6, path_length_sensitivity},
      {7, variance_configuration},  {8, game_convergence},       {9, doubling_mechanics},
      {10, determinism}};
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail
              << " [" << fmt(seconds) << " s]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
