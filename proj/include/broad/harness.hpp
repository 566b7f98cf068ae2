#pragma once

// Experiment orchestration: configuration, seeded replications, regret and
// duality-gap aggregation, and CSV emission.

#include "broad/broad_omd.hpp"
#include "broad/environments.hpp"
#include "broad/oracle.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace broad {

enum class EnvKind { kPlayback, kGap, kSwitching, kGame };

/// kOracle tunes eta from the realized loss matrix (best-arm variance or
/// path length); it uses hindsight information and is labeled as such.
enum class EtaMode { kFixed, kAuto, kOracle };

struct EnvironmentSpec {
  EnvKind kind = EnvKind::kGap;
  std::string path;  // playback CSV
  double gap = 0.1;
  double mean = 0.5;
  GapFamily family = GapFamily::kBernoulli;
  double spread = 0.2;
  double flip = 0.01;
  Eigen::Index best_arm = 0;
  long switches = 0;
  std::string matrix = "matching_pennies";  // game: builtin name or CSV path
  bool random_start = true;                  // game: seeded interior start, else uniform
};

struct ExperimentConfig {
  std::string algorithm = "best_of_both";  // a table row or "exp3"
  Eigen::Index arms = 2;
  long horizon = 1000;
  EtaMode eta_mode = EtaMode::kAuto;
  double eta = kRateCap;
  EnvironmentSpec env;
  std::vector<std::uint64_t> seeds{1};
  std::uint64_t master_seed = 0;
  std::vector<long> checkpoints;  // empty selects log_checkpoints(horizon)
  bool strict = false;
  std::string output;
  std::string diagnostics;
};

/// Applies one `key = value` setting (environment keys carry an
/// "environment." prefix). Problems are appended to `errors`.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   std::vector<std::string>& errors);

/// Appends every invariant violation of a complete configuration.
void validate(const ExperimentConfig& config, std::vector<std::string>& errors);

/// Parses the flat key-value format:
///
///   # comment
///   algorithm = best_of_both
///   arms = 8
///   horizon = 100000
///   eta = auto              # number | auto | oracle
///   seeds = 1,2,3
///   [environment]
///   kind = gap              # playback | gap | switching | game
///   gap = 0.2
///   [experiment]            # back to top-level keys
///   strict = true
///
/// Throws ConfigError listing every violation.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// 20 logarithmically spaced rounds in [1, T] (fewer when T is small), always
/// ending at T.
std::vector<long> log_checkpoints(long horizon, int count = 20);

const std::vector<long>& effective_checkpoints(const ExperimentConfig& config,
                                               std::vector<long>& storage);

struct SeedTrace {
  std::uint64_t seed = 0;
  std::vector<RegretPoint> points;
  int restarts = 0;
  long exploration_rounds = 0;
};

struct AggregatePoint {
  long checkpoint = 0;
  double mean = 0.0;
  double std = 0.0;
  double mean_prefix = 0.0;
  std::size_t seeds = 0;
};

struct ExperimentResult {
  std::vector<SeedTrace> per_seed;
  std::vector<AggregatePoint> aggregate;
};

/// Sample mean and unbiased standard deviation per checkpoint. Traces are
/// reduced in seed order, so the output does not depend on input order.
std::vector<AggregatePoint> aggregate(std::vector<SeedTrace> traces);

/// Builds the oblivious loss matrix of one replication.
LossMatrix build_environment(const ExperimentConfig& config, std::uint64_t seed);

/// Learning rate for one replication (nullopt selects the doubling wrapper).
std::optional<double> resolve_eta(const ExperimentConfig& config, const LossMatrix& losses);

ExperimentResult run_experiment(const ExperimentConfig& config);

struct GapPoint {
  long checkpoint = 0;
  double mean = 0.0;
  double std = 0.0;
};

struct GameResult {
  std::vector<std::vector<double>> per_seed_gaps;
  std::vector<GapPoint> aggregate;
};

GameMatrix load_game(const EnvironmentSpec& env);
GameResult run_game(const ExperimentConfig& config);

/// regret CSV: checkpoint,mean_regret,std_regret,mean_regret_prefix_best,seeds
void write_regret_csv(std::ostream& out, const std::vector<AggregatePoint>& points);
std::vector<AggregatePoint> read_regret_csv(std::istream& in);
/// game CSV: checkpoint,mean_gap,std_gap
void write_game_csv(std::ostream& out, const std::vector<GapPoint>& points);
std::vector<GapPoint> read_game_csv(std::istream& in);

struct SweepRow {
  std::string value;
  double final_mean = 0.0;
  double final_std = 0.0;
};

/// Runs `base` once per value of `param` (eta, gap or switches).
std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const std::string& param,
                                const std::vector<std::string>& values);
void write_sweep_csv(std::ostream& out, const std::string& param, const std::vector<SweepRow>& rows);

/// Shortest round-trip decimal form.
std::string format_real(double v);

}  // namespace broad
