#include "broad/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

namespace {

using namespace broad;

struct Overrides {
  std::optional<std::string> config_path;
  std::map<std::string, std::string> values;
  bool strict = false;
};

// Registers every ExperimentConfig field as a flag. Given flags become
// `key = value` lines appended after the config file contents.
void add_config_flags(CLI::App& cmd, Overrides& o, std::map<std::string, std::string>& storage) {
  cmd.add_option("--config", o.config_path, "key = value configuration file");
  cmd.add_flag("--strict", o.strict, "abort on the first violated invariant");
  static const std::pair<const char*, const char*> kFlags[] = {
      {"algorithm", "variance | path_plus | path_sum | best_of_both | exp3"},
      {"arms", "number of arms K"},
      {"horizon", "number of rounds T"},
      {"eta", "learning rate, auto or oracle"},
      {"seeds", "comma list or a..b range of replication seeds"},
      {"master_seed", "master seed"},
      {"checkpoints", "comma list of rounds (default: 20 log-spaced)"},
      {"output", "CSV output path (default: stdout)"},
      {"diagnostics", "per-round diagnostics CSV path"},
      {"environment.kind", "playback | gap | switching | game"},
      {"environment.path", "playback loss matrix CSV"},
      {"environment.gap", "gap between the best arm and the others"},
      {"environment.mean", "base mean of the suboptimal arms"},
      {"environment.family", "bernoulli | markov"},
      {"environment.spread", "markov mean offset"},
      {"environment.flip", "markov switching probability"},
      {"environment.best_arm", "1-based index of the best arm"},
      {"environment.switches", "number of switch points S"},
      {"environment.matrix", "matching_pennies or a game matrix CSV"},
      {"environment.start", "game starting point: random | uniform"},
  };
  for (const auto& [key, help] : kFlags) {
    std::string name = key;
    if (name.rfind("environment.", 0) == 0) name = name.substr(12);
    std::replace(name.begin(), name.end(), '_', '-');
    cmd.add_option("--" + name, storage[key], help);
  }
}

ExperimentConfig resolve(const Overrides& o, const CLI::App& cmd,
                         const std::map<std::string, std::string>& storage,
                         const std::string& defaults = {}) {
  std::string text = defaults;
  if (o.config_path) {
    std::ifstream in(*o.config_path);
    if (!in) throw ConfigError("cannot open config '" + *o.config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text += ss.str() + "\n[experiment]\n";
  }
  for (const auto& [key, value] : storage) {
    std::string name = key.rfind("environment.", 0) == 0 ? key.substr(12) : key;
    std::replace(name.begin(), name.end(), '_', '-');
    if (cmd.count("--" + name) > 0) text += key + " = " + value + "\n";
  }
  if (o.strict) text += "strict = true\n";
  return parse_config(text);
}

void emit_regret(const ExperimentConfig& c, const ExperimentResult& r) {
  if (c.output.empty()) write_regret_csv(std::cout, r.aggregate);
  int restarts = 0;
  long explore = 0;
  for (const auto& t : r.per_seed) {
    restarts += t.restarts;
    explore += t.exploration_rounds;
  }
  std::cerr << "seeds=" << r.per_seed.size() << " final_mean_regret="
            << format_real(r.aggregate.back().mean) << " restarts=" << restarts
            << " exploration_rounds=" << explore << "\n";
}

// Grid-oracle replica of one learner round, used to regenerate golden traces.
struct OracleRound {
  Vec play;
  Eigen::Index chosen;
  Vec estimate;
  Vec aux_next;
};

std::vector<OracleRound> oracle_trace(bool plus, double eta, long horizon, double resolution) {
  const Eigen::Index k = 2;
  const double draws[3] = {0.3, 0.7, 0.5};
  Mat losses(3, 2);
  losses << 1, 0, 1, 0, 0, 1;
  Rates rates = Rates::uniform(k, eta);
  Simplex aux = Simplex::uniform(k);
  RateSchedule schedule = make_rate_schedule(k, horizon);
  LastObservedState last(k);
  std::vector<OracleRound> out;
  for (int t = 0; t < 3; ++t) {
    const Prediction m = plus ? predictor_last_observed(last) : predictor_zero(k);
    const Simplex w = grid_search_omd(aux, m.values(), rates, {resolution});
    const Simplex sampled = plus ? mix_uniform(w, horizon) : w;
    const Eigen::Index chosen = sample_index(sampled.weights(), draws[t]);
    const double loss = losses(t, chosen);
    const LossEstimate est = estimate_vr(loss, chosen, sampled, m);
    Vec target = est.values;
    if (plus) target += correction_option_i(rates, w, est, m).values;
    const Simplex next = grid_search_omd(aux, target, rates, {resolution});
    out.push_back({w.weights(), chosen, est.values, next.weights()});
    aux = next;
    if (plus) {
      rate_schedule_update(schedule, rates, sampled);
      last.feed_observation(t + 1, chosen, loss);
    }
  }
  return out;
}

void print_vec(std::ostream& os, const Vec& v) {
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_real(v[i]);
  os << ")";
}

int run_oracle(double resolution) {
  std::cout << std::setprecision(17);
  {
    Vec x(2);
    x << 1, -1;
    const Simplex w =
        grid_search_omd(Simplex::uniform(2), x, Rates::uniform(2, 0.01), {resolution});
    std::cout << "omd_fixture K=2 w'=(0.5,0.5) eta=0.01 x=(1,-1) w=";
    print_vec(std::cout, w.weights());
    std::cout << "\n";
  }
  for (const bool plus : {false, true}) {
    const double eta = plus ? 1.0 / 810.0 : 1.0 / 162.0;
    std::cout << (plus ? "golden_path_plus eta=1/810 T=100" : "golden_option_ii eta=1/162")
              << "\n";
    const auto trace = oracle_trace(plus, eta, 100, resolution / 10.0);
    for (std::size_t t = 0; t < trace.size(); ++t) {
      std::cout << "  t=" << t + 1 << " w=";
      print_vec(std::cout, trace[t].play);
      std::cout << " chosen=" << trace[t].chosen + 1 << " est=";
      print_vec(std::cout, trace[t].estimate);
      std::cout << " w'_next=";
      print_vec(std::cout, trace[t].aux_next);
      std::cout << "\n";
    }
  }
  {
    std::mt19937_64 gen(20240601);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double lowest = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index k = 2 + trial % 4;
      Vec prev(k), x(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        prev[i] = 0.05 + unit(gen);
        x[i] = -5.0 + 10.0 * unit(gen);
      }
      prev /= prev.sum();
      const BarrierObjective<double> obj{Simplex(prev), x, Rates::uniform(k, 1.0 / 162.0)};
      lowest = std::min(lowest, kkt_residual(Simplex::uniform(k), obj));
    }
    std::cout << "kkt_nonsolution_min_residual=" << format_real(lowest) << "\n";
  }
  return 0;
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"broad: log-barrier optimistic mirror descent bandit experiments"};
  app.require_subcommand(1);

  Overrides run_o, game_o, sweep_o;
  std::map<std::string, std::string> run_s, game_s, sweep_s;
  auto* run = app.add_subcommand("run", "regret experiment for one configuration");
  add_config_flags(*run, run_o, run_s);
  auto* game = app.add_subcommand("game", "self-play on a zero-sum matrix game");
  add_config_flags(*game, game_o, game_s);
  auto* sweep = app.add_subcommand("sweep", "repeat an experiment over a parameter grid");
  add_config_flags(*sweep, sweep_o, sweep_s);
  std::string param;
  std::string values;
  std::string summary;
  sweep->add_option("--param", param, "eta | gap | switches")->required();
  sweep->add_option("--values", values, "comma list of parameter values")->required();
  sweep->add_option("--summary", summary, "summary CSV path (default: stdout)");
  auto* oracle = app.add_subcommand("oracle", "regenerate brute-force reference fixtures");
  double resolution = 1e-5;
  oracle->add_option("--resolution", resolution, "grid resolution");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const ExperimentConfig c = resolve(run_o, *run, run_s);
      if (c.env.kind == EnvKind::kGame) throw ConfigError("use the game subcommand for games");
      emit_regret(c, run_experiment(c));
    } else if (game->parsed()) {
      ExperimentConfig c =
          resolve(game_o, *game, game_s, "algorithm = path_sum\nenvironment.kind = game\n");
      if (c.env.kind != EnvKind::kGame) throw ConfigError("game requires environment kind game");
      const GameResult r = run_game(c);
      if (c.output.empty()) write_game_csv(std::cout, r.aggregate);
    } else if (sweep->parsed()) {
      const ExperimentConfig c = resolve(sweep_o, *sweep, sweep_s);
      const auto rows = run_sweep(c, param, split_values(values));
      if (summary.empty()) {
        write_sweep_csv(std::cout, param, rows);
      } else {
        std::ofstream out(summary);
        if (!out) throw ConfigError("cannot write summary '" + summary + "'");
        write_sweep_csv(out, param, rows);
      }
    } else if (oracle->parsed()) {
      return run_oracle(resolution);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
