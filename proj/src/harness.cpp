#include "broad/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

namespace broad {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !text.empty();
}

template <typename T>
void set_number(T& field, const std::string& key, const std::string& value,
                std::vector<std::string>& errors) {
  T parsed{};
  if (!parse_number(value, parsed)) {
    errors.push_back(key + ": '" + value + "' is not a valid number");
    return;
  }
  field = parsed;
}

bool is_table_row(const std::string& name) {
  return name == "variance" || name == "path_plus" || name == "path_sum" || name == "best_of_both";
}

bool uses_doubling_row(const std::string& name) {
  return name == "path_sum" || name == "best_of_both";
}

std::string env_kind_name(EnvKind k) {
  switch (k) {
    case EnvKind::kPlayback: return "playback";
    case EnvKind::kGap: return "gap";
    case EnvKind::kSwitching: return "switching";
    case EnvKind::kGame: return "game";
  }
  return "?";
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, static_cast<std::size_t>(ptr - buf));
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value,
                   std::vector<std::string>& errors) {
  if (key == "algorithm") {
    c.algorithm = value;
  } else if (key == "arms") {
    set_number(c.arms, key, value, errors);
  } else if (key == "horizon") {
    set_number(c.horizon, key, value, errors);
  } else if (key == "eta") {
    if (value == "auto") {
      c.eta_mode = EtaMode::kAuto;
    } else if (value == "oracle") {
      c.eta_mode = EtaMode::kOracle;
    } else {
      c.eta_mode = EtaMode::kFixed;
      set_number(c.eta, key, value, errors);
    }
  } else if (key == "seeds") {
    c.seeds.clear();
    for (const auto& item : split(value, ',')) {
      const auto dots = item.find("..");
      std::uint64_t lo = 0, hi = 0;
      if (dots != std::string::npos) {
        if (!parse_number(trim(item.substr(0, dots)), lo) ||
            !parse_number(trim(item.substr(dots + 2)), hi) || hi < lo) {
          errors.push_back("seeds: bad range '" + item + "'");
          continue;
        }
        for (std::uint64_t s = lo; s <= hi; ++s) c.seeds.push_back(s);
      } else if (parse_number(item, lo)) {
        c.seeds.push_back(lo);
      } else {
        errors.push_back("seeds: '" + item + "' is not a non-negative integer");
      }
    }
  } else if (key == "master_seed") {
    set_number(c.master_seed, key, value, errors);
  } else if (key == "checkpoints") {
    c.checkpoints.clear();
    for (const auto& item : split(value, ',')) {
      long cp = 0;
      if (parse_number(item, cp)) c.checkpoints.push_back(cp);
      else errors.push_back("checkpoints: '" + item + "' is not an integer");
    }
  } else if (key == "strict") {
    if (value == "true" || value == "1" || value == "yes") c.strict = true;
    else if (value == "false" || value == "0" || value == "no") c.strict = false;
    else errors.push_back("strict: expected true or false, got '" + value + "'");
  } else if (key == "output") {
    c.output = value;
  } else if (key == "diagnostics") {
    c.diagnostics = value;
  } else if (key == "environment.kind") {
    if (value == "playback") c.env.kind = EnvKind::kPlayback;
    else if (value == "gap") c.env.kind = EnvKind::kGap;
    else if (value == "switching") c.env.kind = EnvKind::kSwitching;
    else if (value == "game") c.env.kind = EnvKind::kGame;
    else errors.push_back("environment.kind: unknown environment '" + value + "'");
  } else if (key == "environment.path") {
    c.env.path = value;
  } else if (key == "environment.gap") {
    set_number(c.env.gap, key, value, errors);
  } else if (key == "environment.mean") {
    set_number(c.env.mean, key, value, errors);
  } else if (key == "environment.family") {
    if (value == "bernoulli") c.env.family = GapFamily::kBernoulli;
    else if (value == "markov") c.env.family = GapFamily::kMarkov;
    else errors.push_back("environment.family: expected bernoulli or markov");
  } else if (key == "environment.spread") {
    set_number(c.env.spread, key, value, errors);
  } else if (key == "environment.flip") {
    set_number(c.env.flip, key, value, errors);
  } else if (key == "environment.best_arm") {
    long arm = 0;
    if (parse_number(value, arm)) c.env.best_arm = arm - 1;
    else errors.push_back("environment.best_arm: '" + value + "' is not an integer");
  } else if (key == "environment.switches") {
    set_number(c.env.switches, key, value, errors);
  } else if (key == "environment.matrix") {
    c.env.matrix = value;
  } else if (key == "environment.start") {
    if (value == "random") c.env.random_start = true;
    else if (value == "uniform") c.env.random_start = false;
    else errors.push_back("environment.start: expected random or uniform");
  } else {
    errors.push_back("unknown key '" + key + "'");
  }
}

void validate(const ExperimentConfig& c, std::vector<std::string>& errors) {
  const bool game = c.env.kind == EnvKind::kGame;
  if (!is_table_row(c.algorithm) && c.algorithm != "exp3")
    errors.push_back("algorithm: unknown row '" + c.algorithm + "'");
  if (game && c.algorithm != "path_sum" && c.algorithm != "exp3")
    errors.push_back("algorithm: game runs use path_sum or exp3");
  if (c.horizon < 3) errors.push_back("horizon: T must be at least 3");
  if (!game && c.arms < 2) errors.push_back("arms: K must be at least 2");
  if (c.eta_mode == EtaMode::kFixed && !(c.eta > 0.0)) errors.push_back("eta: must be positive");
  if (c.eta_mode == EtaMode::kAuto && is_table_row(c.algorithm) &&
      !uses_doubling_row(c.algorithm) && !game)
    errors.push_back("eta: auto is only valid for path_sum and best_of_both");
  if (c.eta_mode == EtaMode::kOracle && game)
    errors.push_back("eta: oracle tuning is not defined for games");
  if (c.strict && !game && c.eta_mode == EtaMode::kFixed && is_table_row(c.algorithm) &&
      c.eta > kRateCap)
    errors.push_back("eta: strict mode requires eta <= 1/162");
  if (c.strict && !game && c.algorithm == "path_plus" && c.eta_mode == EtaMode::kFixed &&
      c.eta > 1.0 / 810.0)
    errors.push_back("eta: strict path_plus requires eta <= 1/810");
  if (c.seeds.empty()) errors.push_back("seeds: at least one seed is required");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size())
    errors.push_back("seeds: duplicates are not allowed");
  for (std::size_t i = 0; i < c.checkpoints.size(); ++i) {
    if (c.checkpoints[i] < 1 || c.checkpoints[i] > c.horizon) {
      errors.push_back("checkpoints: " + std::to_string(c.checkpoints[i]) + " outside [1, T]");
      break;
    }
    if (i > 0 && c.checkpoints[i] <= c.checkpoints[i - 1]) {
      errors.push_back("checkpoints: must be strictly increasing");
      break;
    }
  }
  switch (c.env.kind) {
    case EnvKind::kPlayback:
      if (c.env.path.empty()) errors.push_back("environment.path: required for playback");
      break;
    case EnvKind::kGap: {
      if (c.env.best_arm < 0 || c.env.best_arm >= c.arms) {
        errors.push_back("environment.best_arm: out of range");
        break;
      }
      GapEnvironment env{c.arms, c.env.best_arm, c.env.gap, c.env.mean, c.env.family,
                         c.env.spread, c.env.flip};
      try {
        broad::validate(env);
      } catch (const ConfigError& e) {
        errors.push_back(std::string("environment: ") + e.what());
      }
      break;
    }
    case EnvKind::kSwitching:
      if (c.env.switches < 0 || c.env.switches >= c.horizon)
        errors.push_back("environment.switches: must lie in [0, T)");
      break;
    case EnvKind::kGame:
      if (c.env.matrix.empty()) errors.push_back("environment.matrix: required for games");
      break;
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::vector<std::string> errors;
  std::istringstream in(text);
  std::string line;
  std::string prefix;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t == "[environment]") {
        prefix = "environment.";
      } else if (t == "[experiment]") {
        prefix.clear();
      } else {
        errors.push_back("line " + std::to_string(line_no) + ": unknown section " + t);
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    apply_setting(config, key.rfind("environment.", 0) == 0 ? key : prefix + key, value, errors);
  }
  validate(config, errors);
  if (!errors.empty()) {
    std::string message = "invalid configuration:";
    for (const auto& e : errors) message += "\n  " + e;
    throw ConfigError(message);
  }
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<long> log_checkpoints(long horizon, int count) {
  std::vector<long> out;
  if (horizon < 1) return out;
  for (int k = 0; k < count; ++k) {
    const double exponent = count == 1 ? 1.0 : static_cast<double>(k) / (count - 1);
    const long cp = std::max(1L, std::lround(std::pow(static_cast<double>(horizon), exponent)));
    if (out.empty() || cp > out.back()) out.push_back(std::min(cp, horizon));
  }
  if (out.back() != horizon) out.push_back(horizon);
  return out;
}

const std::vector<long>& effective_checkpoints(const ExperimentConfig& config,
                                               std::vector<long>& storage) {
  if (!config.checkpoints.empty()) return config.checkpoints;
  storage = log_checkpoints(config.horizon);
  return storage;
}

std::vector<AggregatePoint> aggregate(std::vector<SeedTrace> traces) {
  if (traces.empty()) return {};
  std::sort(traces.begin(), traces.end(),
            [](const SeedTrace& a, const SeedTrace& b) { return a.seed < b.seed; });
  const std::size_t points = traces.front().points.size();
  for (const auto& t : traces)
    if (t.points.size() != points) throw DomainError("aggregate: checkpoint counts differ");
  const double n = static_cast<double>(traces.size());
  std::vector<AggregatePoint> out(points);
  for (std::size_t p = 0; p < points; ++p) {
    AggregatePoint& a = out[p];
    a.checkpoint = traces.front().points[p].checkpoint;
    a.seeds = traces.size();
    for (const auto& t : traces) {
      if (t.points[p].checkpoint != a.checkpoint)
        throw DomainError("aggregate: checkpoints differ across seeds");
      a.mean += t.points[p].regret;
      a.mean_prefix += t.points[p].regret_prefix_best;
    }
    a.mean /= n;
    a.mean_prefix /= n;
    if (traces.size() > 1) {
      double ss = 0.0;
      for (const auto& t : traces) ss += (t.points[p].regret - a.mean) * (t.points[p].regret - a.mean);
      a.std = std::sqrt(ss / (n - 1.0));
    }
  }
  return out;
}

LossMatrix build_environment(const ExperimentConfig& c, std::uint64_t seed) {
  Rng rng = rng_stream(c.master_seed, seed, Substream::kEnvironmentBuild);
  switch (c.env.kind) {
    case EnvKind::kPlayback: {
      LossMatrix m = read_loss_csv_file(c.env.path);
      if (m.arms() != c.arms)
        throw ConfigError("playback matrix has " + std::to_string(m.arms()) + " arms, expected " +
                          std::to_string(c.arms));
      if (m.rounds() < c.horizon) throw ConfigError("playback matrix has fewer rows than T");
      if (m.rounds() == c.horizon) return m;
      return LossMatrix(m.entries().topRows(c.horizon));
    }
    case EnvKind::kGap: {
      GapEnvironment env{c.arms, c.env.best_arm, c.env.gap, c.env.mean, c.env.family,
                         c.env.spread, c.env.flip};
      return materialize_gap(env, c.horizon, rng);
    }
    case EnvKind::kSwitching:
      return env_switching(c.arms, c.horizon, c.env.switches, rng).matrix;
    case EnvKind::kGame: break;
  }
  throw ConfigError("environment '" + env_kind_name(c.env.kind) + "' has no loss matrix");
}

std::optional<double> resolve_eta(const ExperimentConfig& c, const LossMatrix& losses) {
  switch (c.eta_mode) {
    case EtaMode::kFixed: return c.eta;
    case EtaMode::kAuto: return std::nullopt;
    case EtaMode::kOracle: break;
  }
  const double k = static_cast<double>(losses.arms());
  const double log_t = std::log(static_cast<double>(losses.rounds()));
  const Eigen::Index star = best_arm(losses.entries().colwise().sum().transpose());
  if (c.algorithm == "variance") {
    const double q = variance_stat(losses, star);
    return q > 0.0 ? std::min(kRateCap, std::sqrt(k * log_t / q)) : kRateCap;
  }
  if (c.algorithm == "path_plus") {
    const double v = path_length(losses, star);
    return v > 0.0 ? std::min(1.0 / 810.0, 1.0 / (60.0 * std::sqrt(v * log_t))) : 1.0 / 810.0;
  }
  if (c.algorithm == "path_sum") {
    double total = 0.0;
    for (Eigen::Index i = 0; i < losses.arms(); ++i) total += path_length(losses, i);
    return total > 0.0 ? std::min(kRateCap, std::sqrt(k * log_t / total)) : kRateCap;
  }
  if (c.algorithm == "best_of_both") {
    const double l_star = std::max(1.0, std::abs(losses.entries().col(star).sum()));
    return std::min(kRateCap, std::sqrt(k * log_t / l_star));
  }
  return Exp3::default_rate(losses.arms(), losses.rounds());
}

namespace {

void write_diagnostics_header(std::ostream& out) {
  out << "seed,round,chosen,loss,exploration,max_rate,max_scaled_error,second_moment,"
         "sandwich_min,sandwich_max,stability_lhs,stability_rhs,epoch\n";
}

void write_diagnostics_row(std::ostream& out, std::uint64_t seed, const RoundRecord& r) {
  out << seed << ',' << r.round << ',' << r.chosen + 1 << ',' << format_real(r.loss) << ','
      << (r.exploration ? 1 : 0) << ',' << format_real(r.conditions.max_rate) << ','
      << format_real(r.conditions.max_scaled_error) << ','
      << format_real(r.conditions.second_moment) << ',' << format_real(r.sandwich_min) << ','
      << format_real(r.sandwich_max) << ',' << format_real(r.stability_lhs) << ','
      << format_real(r.stability_rhs) << ',' << r.epoch << '\n';
}

SeedTrace run_replication(const ExperimentConfig& c, std::uint64_t seed,
                          const std::vector<long>& checkpoints, std::ostream* diagnostics) {
  const LossMatrix losses = build_environment(c, seed);
  Rng rng = rng_stream(c.master_seed, seed, Substream::kLearner);
  const std::optional<double> eta = resolve_eta(c, losses);

  SeedTrace trace;
  trace.seed = seed;
  std::vector<Eigen::Index> chosen;
  chosen.reserve(static_cast<std::size_t>(c.horizon));

  if (c.algorithm == "exp3") {
    Exp3 learner(c.arms, eta.value_or(Exp3::default_rate(c.arms, c.horizon)));
    for (long t = 1; t <= c.horizon; ++t) {
      const Eigen::Index arm = learner.act(rng);
      learner.observe(losses.loss(t, arm), rng);
      chosen.push_back(arm);
    }
  } else {
    BroadOmd learner(configure(parse_table_row(c.algorithm), c.arms, c.horizon, eta, c.strict));
    for (long t = 1; t <= c.horizon; ++t) {
      const Eigen::Index arm = learner.act(rng);
      RoundRecord rec;
      try {
        rec = learner.update(losses.loss(t, arm), rng);
      } catch (const InvariantViolation& e) {
        throw InvariantViolation("seed " + std::to_string(seed) + ": " + e.what());
      }
      if (rec.exploration) ++trace.exploration_rounds;
      if (diagnostics) write_diagnostics_row(*diagnostics, seed, rec);
      chosen.push_back(arm);
    }
    trace.restarts = learner.restarts();
  }
  trace.points = regret_of_trace(chosen, losses, checkpoints);
  return trace;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  std::vector<std::string> errors;
  validate(config, errors);
  if (config.env.kind == EnvKind::kGame) errors.push_back("use run_game for game environments");
  if (!errors.empty()) throw ConfigError("invalid configuration: " + errors.front());

  std::vector<long> storage;
  const auto& checkpoints = effective_checkpoints(config, storage);

  std::unique_ptr<std::ofstream> diag;
  if (!config.diagnostics.empty()) {
    diag = std::make_unique<std::ofstream>(config.diagnostics);
    if (!*diag) throw ConfigError("cannot write diagnostics '" + config.diagnostics + "'");
    write_diagnostics_header(*diag);
  }

  ExperimentResult result;
  for (std::uint64_t seed : config.seeds)
    result.per_seed.push_back(run_replication(config, seed, checkpoints, diag.get()));
  result.aggregate = aggregate(result.per_seed);

  if (!config.output.empty()) {
    std::ofstream out(config.output);
    if (!out) throw ConfigError("cannot write output '" + config.output + "'");
    write_regret_csv(out, result.aggregate);
  }
  return result;
}

GameMatrix load_game(const EnvironmentSpec& env) {
  if (env.matrix == "matching_pennies") return GameMatrix::matching_pennies();
  return read_game_csv_file(env.matrix);
}

GameResult run_game(const ExperimentConfig& config) {
  std::vector<std::string> errors;
  validate(config, errors);
  if (config.env.kind != EnvKind::kGame) errors.push_back("environment.kind must be game");
  if (!errors.empty()) throw ConfigError("invalid configuration: " + errors.front());

  const GameMatrix g = load_game(config.env);
  const Eigen::Index m = g.rows();
  const Eigen::Index n = g.cols();
  std::vector<long> storage;
  const auto& checkpoints = effective_checkpoints(config, storage);

  GameResult result;
  for (std::uint64_t seed : config.seeds) {
    Rng row_rng = rng_stream(config.master_seed, seed, Substream::kLearner);
    Rng col_rng = rng_stream(config.master_seed, seed, Substream::kOpponent);
    Rng start_rng = rng_stream(config.master_seed, seed, Substream::kEnvironmentBuild);
    const Simplex row_start =
        config.env.random_start ? random_interior_point(m, start_rng) : Simplex::uniform(m);
    const Simplex col_start =
        config.env.random_start ? random_interior_point(n, start_rng) : Simplex::uniform(n);
    std::unique_ptr<BanditLearner> row;
    std::unique_ptr<BanditLearner> col;
    if (config.algorithm == "exp3") {
      const bool fixed = config.eta_mode == EtaMode::kFixed;
      row = std::make_unique<Exp3>(row_start,
                                   fixed ? config.eta : Exp3::default_rate(m, config.horizon));
      col = std::make_unique<Exp3>(col_start,
                                   fixed ? config.eta : Exp3::default_rate(n, config.horizon));
    } else {
      LearnerConfig rc = configure_game_player(m, m + n, config.horizon, config.strict);
      LearnerConfig cc = configure_game_player(n, m + n, config.horizon, config.strict);
      rc.initial_point = row_start.weights();
      cc.initial_point = col_start.weights();
      if (config.eta_mode == EtaMode::kFixed) rc.eta = cc.eta = config.eta;
      row = std::make_unique<BroadOmd>(rc);
      col = std::make_unique<BroadOmd>(cc);
    }
    SelfPlayResult sp;
    try {
      sp = self_play(g, *row, *col, config.horizon, row_rng, col_rng, checkpoints);
    } catch (const InvariantViolation& e) {
      throw InvariantViolation("seed " + std::to_string(seed) + ": " + e.what());
    }
    result.per_seed_gaps.push_back(sp.checkpoint_gaps);
  }

  // Reduce in seed order for permutation invariance.
  std::vector<std::size_t> order(config.seeds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return config.seeds[a] < config.seeds[b]; });
  const double count = static_cast<double>(order.size());
  for (std::size_t p = 0; p < checkpoints.size(); ++p) {
    GapPoint gp;
    gp.checkpoint = checkpoints[p];
    for (std::size_t i : order) gp.mean += result.per_seed_gaps[i][p];
    gp.mean /= count;
    if (order.size() > 1) {
      double ss = 0.0;
      for (std::size_t i : order) {
        const double d = result.per_seed_gaps[i][p] - gp.mean;
        ss += d * d;
      }
      gp.std = std::sqrt(ss / (count - 1.0));
    }
    result.aggregate.push_back(gp);
  }

  if (!config.output.empty()) {
    std::ofstream out(config.output);
    if (!out) throw ConfigError("cannot write output '" + config.output + "'");
    write_game_csv(out, result.aggregate);
  }
  return result;
}

void write_regret_csv(std::ostream& out, const std::vector<AggregatePoint>& points) {
  out << "checkpoint,mean_regret,std_regret,mean_regret_prefix_best,seeds\n";
  for (const auto& p : points)
    out << p.checkpoint << ',' << format_real(p.mean) << ',' << format_real(p.std) << ','
        << format_real(p.mean_prefix) << ',' << p.seeds << '\n';
}

std::vector<AggregatePoint> read_regret_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      trim(line) != "checkpoint,mean_regret,std_regret,mean_regret_prefix_best,seeds")
    throw ConfigError("regret CSV: unexpected header");
  std::vector<AggregatePoint> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    AggregatePoint p;
    if (cells.size() != 5 || !parse_number(cells[0], p.checkpoint) ||
        !parse_number(cells[1], p.mean) || !parse_number(cells[2], p.std) ||
        !parse_number(cells[3], p.mean_prefix) || !parse_number(cells[4], p.seeds))
      throw ConfigError("regret CSV: malformed row '" + line + "'");
    out.push_back(p);
  }
  return out;
}

void write_game_csv(std::ostream& out, const std::vector<GapPoint>& points) {
  out << "checkpoint,mean_gap,std_gap\n";
  for (const auto& p : points)
    out << p.checkpoint << ',' << format_real(p.mean) << ',' << format_real(p.std) << '\n';
}

std::vector<GapPoint> read_game_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "checkpoint,mean_gap,std_gap")
    throw ConfigError("game CSV: unexpected header");
  std::vector<GapPoint> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    GapPoint p;
    if (cells.size() != 3 || !parse_number(cells[0], p.checkpoint) ||
        !parse_number(cells[1], p.mean) || !parse_number(cells[2], p.std))
      throw ConfigError("game CSV: malformed row '" + line + "'");
    out.push_back(p);
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const std::string& param,
                                const std::vector<std::string>& values) {
  if (param != "eta" && param != "gap" && param != "switches")
    throw ConfigError("sweep parameter must be eta, gap or switches");
  std::vector<SweepRow> rows;
  for (const auto& value : values) {
    ExperimentConfig c = base;
    std::vector<std::string> errors;
    apply_setting(c, param == "eta" ? "eta" : "environment." + param, value, errors);
    if (!errors.empty()) throw ConfigError(errors.front());
    if (!base.output.empty()) {
      const auto dot = base.output.rfind('.');
      const std::string stem = dot == std::string::npos ? base.output : base.output.substr(0, dot);
      c.output = stem + "_" + param + "=" + value + ".csv";
    }
    SweepRow row{value, 0.0, 0.0};
    if (c.env.kind == EnvKind::kGame) {
      const GameResult r = run_game(c);
      row.final_mean = r.aggregate.back().mean;
      row.final_std = r.aggregate.back().std;
    } else {
      const ExperimentResult r = run_experiment(c);
      row.final_mean = r.aggregate.back().mean;
      row.final_std = r.aggregate.back().std;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::string& param, const std::vector<SweepRow>& rows) {
  out << param << ",final_mean,final_std\n";
  for (const auto& r : rows)
    out << r.value << ',' << format_real(r.final_mean) << ',' << format_real(r.final_std) << '\n';
}

}  // namespace broad
