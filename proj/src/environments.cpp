#include "broad/environments.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace broad {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

double parse_real(const std::string& text, long line_no) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ConfigError("CSV line " + std::to_string(line_no) + ": '" + text +
                      "' is not a decimal real");
  return v;
}

bool looks_numeric(const std::string& cell) {
  return !cell.empty() && (std::isdigit(static_cast<unsigned char>(cell[0])) || cell[0] == '-' ||
                           cell[0] == '+' || cell[0] == '.');
}

Mat read_real_table(std::istream& in, bool allow_round_column) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  bool drop_first = false;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cells = split_csv(t);
    if (!header_seen && rows.empty() && !looks_numeric(cells[0])) {
      header_seen = true;
      std::string first = cells[0];
      std::transform(first.begin(), first.end(), first.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      drop_first = allow_round_column && first == "round";
      continue;
    }
    std::vector<double> row;
    for (std::size_t c = drop_first ? 1 : 0; c < cells.size(); ++c)
      row.push_back(parse_real(cells[c], line_no));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError("CSV line " + std::to_string(line_no) + ": expected " +
                        std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw ConfigError("CSV contains no data rows");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

}  // namespace

LossMatrix::LossMatrix(Mat entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.cols() == 0) throw ConfigError("empty loss matrix");
  for (Eigen::Index r = 0; r < entries_.rows(); ++r) {
    for (Eigen::Index c = 0; c < entries_.cols(); ++c) {
      const double v = entries_(r, c);
      if (!(v >= -1.0 && v <= 1.0)) {
        std::ostringstream os;
        os << "loss at round " << r + 1 << ", arm " << c + 1 << " = " << v << " is outside [-1, 1]";
        throw ConfigError(os.str());
      }
    }
  }
}

Vec LossMatrix::env_playback(long t) const {
  if (t < 1 || t > rounds()) throw DomainError("round out of range");
  return entries_.row(t - 1).transpose();
}

double LossMatrix::loss(long t, Eigen::Index arm) const {
  if (t < 1 || t > rounds() || arm < 0 || arm >= arms()) throw DomainError("index out of range");
  return entries_(t - 1, arm);
}

LossMatrix read_loss_csv(std::istream& in) { return LossMatrix(read_real_table(in, true)); }

LossMatrix read_loss_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open loss matrix '" + path + "'");
  return read_loss_csv(in);
}

void write_loss_csv(std::ostream& out, const LossMatrix& matrix) {
  out << "round";
  for (Eigen::Index i = 0; i < matrix.arms(); ++i) out << ",arm_" << i + 1;
  out << '\n';
  char buf[64];
  for (long t = 1; t <= matrix.rounds(); ++t) {
    out << t;
    for (Eigen::Index i = 0; i < matrix.arms(); ++i) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, matrix.entries()(t - 1, i));
      out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

void validate(const GapEnvironment& env) {
  if (env.arms < 2) throw ConfigError("gap environment needs at least 2 arms");
  if (env.best_arm < 0 || env.best_arm >= env.arms) throw ConfigError("best arm out of range");
  if (!(env.gap > 0.0 && env.gap <= 1.0)) throw ConfigError("gap must lie in (0, 1]");
  const double spread = env.family == GapFamily::kMarkov ? env.spread : 0.0;
  if (env.family == GapFamily::kMarkov && !(env.flip >= 0.0 && env.flip <= 1.0 && spread >= 0.0))
    throw ConfigError("markov family needs flip in [0, 1] and a non-negative spread");
  if (env.base_mean - spread - env.gap < 0.0)
    throw ConfigError("mean - gap must be non-negative");
  if (env.base_mean + spread > 1.0) throw ConfigError("mean must not exceed 1");
}

GapSampler::GapSampler(GapEnvironment env) : env_(env) { validate(env_); }

Vec GapSampler::conditional_means() const {
  double base = env_.base_mean;
  if (env_.family == GapFamily::kMarkov) base += state_ == 0 ? -env_.spread : env_.spread;
  Vec means = Vec::Constant(env_.arms, base);
  means[env_.best_arm] = base - env_.gap;
  return means;
}

Vec GapSampler::env_gap_sample(Rng& rng) {
  if (env_.family == GapFamily::kMarkov && started_ && rng.bernoulli(env_.flip))
    state_ = 1 - state_;
  started_ = true;
  const Vec means = conditional_means();
  Vec losses(env_.arms);
  for (Eigen::Index i = 0; i < env_.arms; ++i) losses[i] = rng.bernoulli(means[i]) ? 1.0 : 0.0;
  return losses;
}

LossMatrix materialize_gap(const GapEnvironment& env, long horizon, Rng& rng) {
  if (horizon < 1) throw ConfigError("horizon must be positive");
  GapSampler sampler(env);
  Mat m(horizon, env.arms);
  for (long t = 0; t < horizon; ++t) m.row(t) = sampler.env_gap_sample(rng).transpose();
  return LossMatrix(std::move(m));
}

SwitchingInstance env_switching(Eigen::Index arms, long horizon, long switches, Rng& rng) {
  if (arms < 1 || horizon < 1) throw ConfigError("arms and horizon must be positive");
  if (switches < 0 || switches >= horizon) throw ConfigError("switches must lie in [0, T)");

  // Partial Fisher-Yates over the candidate rounds 2..T.
  std::vector<long> candidates(static_cast<std::size_t>(horizon - 1));
  std::iota(candidates.begin(), candidates.end(), 2L);
  for (long s = 0; s < switches; ++s) {
    const auto remaining = static_cast<std::size_t>(horizon - 1 - s);
    const std::size_t pick = static_cast<std::size_t>(s) + rng.index(remaining);
    std::swap(candidates[static_cast<std::size_t>(s)], candidates[pick]);
  }
  std::vector<long> change(candidates.begin(), candidates.begin() + switches);
  std::sort(change.begin(), change.end());

  Mat m(horizon, arms);
  Vec path = Vec::Zero(arms);
  Vec previous = Vec::Zero(arms);
  Vec level(arms);
  std::size_t next_change = 0;
  for (long t = 1; t <= horizon; ++t) {
    const bool new_segment =
        t == 1 || (next_change < change.size() && change[next_change] == t);
    if (new_segment) {
      if (t != 1) ++next_change;
      for (Eigen::Index i = 0; i < arms; ++i) level[i] = rng.uniform();
      path += (level - previous).cwiseAbs();
      previous = level;
    }
    m.row(t - 1) = level.transpose();
  }
  return {LossMatrix(std::move(m)), std::move(change), std::move(path)};
}

GameMatrix::GameMatrix(Mat g) : g_(std::move(g)) {
  if (g_.rows() == 0 || g_.cols() == 0) throw ConfigError("empty game matrix");
  if (!g_.allFinite() || g_.cwiseAbs().maxCoeff() > 1.0)
    throw ConfigError("game matrix entries must lie in [-1, 1]");
}

GameMatrix GameMatrix::matching_pennies() {
  Mat g(2, 2);
  g << 1, -1, -1, 1;
  return GameMatrix(std::move(g));
}

GameMatrix read_game_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open game matrix '" + path + "'");
  return GameMatrix(read_real_table(in, false));
}

DualityGap duality_gap(const Vec& x, const Vec& y, const GameMatrix& g) {
  if (x.size() != g.rows() || y.size() != g.cols())
    throw DomainError("duality_gap: dimension mismatch");
  DualityGap d;
  d.upper = (x.transpose() * g.matrix()).maxCoeff();
  d.lower = (g.matrix() * y).minCoeff();
  d.gap = d.upper - d.lower;
  return d;
}

SimplexPoint<double> random_interior_point(Eigen::Index arms, Rng& rng) {
  if (arms < 1) throw ConfigError("arms must be positive");
  Vec e(arms);
  for (Eigen::Index i = 0; i < arms; ++i) e[i] = -std::log1p(-rng.uniform());
  const double k = static_cast<double>(arms);
  Vec w = 0.5 * e / e.sum() + Vec::Constant(arms, 0.5 / k);
  return SimplexPoint<double>(w / w.sum());
}

SelfPlayResult self_play(const GameMatrix& g, BanditLearner& row_player,
                         BanditLearner& col_player, long horizon, Rng& row_rng, Rng& col_rng,
                         const std::vector<long>& checkpoints, bool keep_trace) {
  if (row_player.arms() != g.rows() || col_player.arms() != g.cols())
    throw DomainError("self_play: player dimensions do not match the game matrix");
  if (horizon < 1) throw ConfigError("horizon must be positive");

  SelfPlayResult result;
  Vec x_sum = Vec::Zero(g.rows());
  Vec y_sum = Vec::Zero(g.cols());
  std::size_t next_checkpoint = 0;
  const Mat& G = g.matrix();
  for (long t = 1; t <= horizon; ++t) {
    const Eigen::Index i = row_player.act(row_rng);
    const Vec x = row_player.strategy();
    const Eigen::Index j = col_player.act(col_rng);
    const Vec y = col_player.strategy();
    const double row_loss = std::clamp(G.row(i).dot(y), -1.0, 1.0);
    const double col_loss = std::clamp(-x.dot(G.col(j)), -1.0, 1.0);
    row_player.observe(row_loss, row_rng);
    col_player.observe(col_loss, col_rng);
    x_sum += x;
    y_sum += y;
    if (keep_trace) result.trace.push_back({x, i, y, j, row_loss, col_loss});
    while (next_checkpoint < checkpoints.size() && checkpoints[next_checkpoint] == t) {
      const double n = static_cast<double>(t);
      result.checkpoints.push_back(t);
      result.checkpoint_gaps.push_back(duality_gap(x_sum / n, y_sum / n, g).gap);
      ++next_checkpoint;
    }
  }
  result.x_bar = x_sum / static_cast<double>(horizon);
  result.y_bar = y_sum / static_cast<double>(horizon);
  return result;
}

}  // namespace broad
