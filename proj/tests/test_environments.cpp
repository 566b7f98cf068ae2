#include <doctest.h>

#include "broad/broad_omd.hpp"
#include "broad/environments.hpp"
#include "broad/oracle.hpp"

#include <cmath>
#include <sstream>

using namespace broad;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Mat fixture() {
  Mat m(4, 3);
  m << 0.1, 0.2, 0.3,
       -0.5, 1.0, 0.0,
       0.25, -1.0, 0.75,
       1.0, 0.5, -0.125;
  return m;
}

}  // namespace

TEST_CASE("playback returns rows") {
  const LossMatrix m(fixture());
  CHECK(m.env_playback(1) == vec({0.1, 0.2, 0.3}));
  CHECK(m.env_playback(4) == vec({1.0, 0.5, -0.125}));
  CHECK(m.env_playback(2) == vec({-0.5, 1.0, 0.0}));
  CHECK(m.loss(3, 1) == -1.0);
  CHECK_THROWS_AS(m.env_playback(0), DomainError);
  CHECK_THROWS_AS(m.env_playback(5), DomainError);
  CHECK_FALSE(m.non_negative());
}

TEST_CASE("loss matrix validation") {
  Mat bad = fixture();
  bad(2, 2) = 1.5;
  CHECK_THROWS_AS(LossMatrix{bad}, ConfigError);
  bad(2, 2) = NAN;
  CHECK_THROWS_AS(LossMatrix{bad}, ConfigError);
}

TEST_CASE("loss CSV round trip is exact") {
  Rng rng(5);
  Mat m(50, 4);
  for (Eigen::Index r = 0; r < 50; ++r)
    for (Eigen::Index c = 0; c < 4; ++c) m(r, c) = 2.0 * rng.uniform() - 1.0;
  const LossMatrix original(m);
  std::stringstream ss;
  write_loss_csv(ss, original);
  CHECK(ss.str().rfind("round,arm_1,arm_2,arm_3,arm_4\n", 0) == 0);
  const LossMatrix back = read_loss_csv(ss);
  CHECK(back.entries() == original.entries());
}

TEST_CASE("loss CSV parsing") {
  std::istringstream plain("0.5,1\n-1,0\n");
  CHECK(read_loss_csv(plain).entries() == (Mat(2, 2) << 0.5, 1, -1, 0).finished());
  std::istringstream header("arm_1,arm_2\n0.5,1\n");
  CHECK(read_loss_csv(header).rounds() == 1);
  std::istringstream ragged("0.5,1\n0.2\n");
  CHECK_THROWS_AS(read_loss_csv(ragged), ConfigError);
  std::istringstream junk("0.5,abc\n");
  CHECK_THROWS_AS(read_loss_csv(junk), ConfigError);
  std::istringstream range("0.5,2\n");
  CHECK_THROWS_AS(read_loss_csv(range), ConfigError);
  CHECK_THROWS_AS(read_loss_csv_file("/nonexistent/losses.csv"), ConfigError);
}

TEST_CASE("gap environment parameters satisfy the gap exactly") {
  GapEnvironment env{4, 2, 0.2};
  GapSampler s(env);
  const Vec means = s.conditional_means();
  for (Eigen::Index i = 0; i < 4; ++i)
    if (i != 2) CHECK(means[i] - means[2] == doctest::Approx(0.2));

  GapEnvironment markov{3, 0, 0.1, 0.5, GapFamily::kMarkov, 0.2, 0.3};
  GapSampler ms(markov);
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    ms.env_gap_sample(rng);
    const Vec m = ms.conditional_means();
    CHECK(m[1] - m[0] == doctest::Approx(0.1));
    CHECK(m[2] - m[0] == doctest::Approx(0.1));
  }
}

TEST_CASE("gap environment validation") {
  CHECK_THROWS_AS(validate(GapEnvironment{3, 0, 0.0}), ConfigError);
  CHECK_THROWS_AS(validate(GapEnvironment{3, 0, 0.6}), ConfigError);
  CHECK_THROWS_AS(validate(GapEnvironment{3, 3, 0.1}), ConfigError);
  CHECK_THROWS_AS(validate(GapEnvironment{3, 0, 0.4, 0.5, GapFamily::kMarkov, 0.2}), ConfigError);
  CHECK_NOTHROW(validate(GapEnvironment{3, 0, 0.5}));
}

TEST_CASE("gap environment boundary and Monte Carlo mean gap") {
  GapSampler boundary(GapEnvironment{3, 1, 0.5});
  Rng rng(10);
  for (int t = 0; t < 1000; ++t) CHECK(boundary.env_gap_sample(rng)[1] == 0.0);

  constexpr int kDraws = 100000;
  GapSampler s(GapEnvironment{2, 0, 0.2});
  double diff = 0.0;
  for (int t = 0; t < kDraws; ++t) {
    const Vec l = s.env_gap_sample(rng);
    CHECK((l[0] == 0.0 || l[0] == 1.0));
    diff += l[1] - l[0];
  }
  const double mean = diff / kDraws;
  MESSAGE("observed mean gap: " << mean);
  CHECK(std::abs(mean - 0.2) <= 3.0 * std::sqrt(0.25 / kDraws));
  CHECK(mean == doctest::Approx(0.19851));  // recorded observation
}

TEST_CASE("switching environment") {
  Rng rng(12);
  const SwitchingInstance zero = env_switching(3, 100, 0, rng);
  CHECK(zero.change_points.empty());
  for (long t = 2; t <= 100; ++t) CHECK(zero.matrix.env_playback(t) == zero.matrix.env_playback(1));
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(zero.path_lengths[i] <= 1.0);

  for (int trial = 0; trial < 50; ++trial) {
    const SwitchingInstance s3 = env_switching(2, 40, 3, rng);
    CHECK(s3.change_points.size() == 3);
    CHECK(s3.path_lengths.sum() <= 16.0);
    for (std::size_t j = 1; j < s3.change_points.size(); ++j)
      CHECK(s3.change_points[j] > s3.change_points[j - 1]);
    CHECK(s3.change_points.front() >= 2);
    for (Eigen::Index i = 0; i < 2; ++i)
      CHECK(path_length(s3.matrix, i) == doctest::Approx(s3.path_lengths[i]).epsilon(1e-12));
  }
  const SwitchingInstance big = env_switching(5, 2000, 100, rng);
  for (Eigen::Index i = 0; i < 5; ++i)
    CHECK(path_length(big.matrix, i) == doctest::Approx(big.path_lengths[i]).epsilon(1e-12));
  CHECK(big.path_lengths.sum() <= 2.0 * 5 * 101);
  CHECK_THROWS_AS(env_switching(2, 10, 10, rng), ConfigError);
}

TEST_CASE("duality gap") {
  const GameMatrix g = GameMatrix::matching_pennies();
  const Vec u = vec({0.5, 0.5});
  CHECK(duality_gap(u, u, g).gap == 0.0);
  const DualityGap a = duality_gap(vec({1.0, 0.0}), u, g);
  CHECK(a.upper == 1.0);
  CHECK(a.lower == 0.0);
  CHECK(a.gap == 1.0);
  const DualityGap b = duality_gap(vec({1.0, 0.0}), vec({1.0, 0.0}), g);
  CHECK(b.upper == 1.0);
  CHECK(b.lower == -1.0);
  CHECK(b.gap == 2.0);

  const GameMatrix c((Mat(2, 3) << 0.3, 0.3, 0.3, 0.3, 0.3, 0.3).finished());
  CHECK(duality_gap(vec({0.9, 0.1}), vec({0.2, 0.5, 0.3}), c).gap == doctest::Approx(0.0));
  const GameMatrix d((Mat(2, 2) << 0, 1, 1, 0).finished());
  CHECK(duality_gap(u, u, d).gap == 0.0);
  CHECK_THROWS_AS(duality_gap(vec({1.0}), u, g), DomainError);
  CHECK_THROWS_AS(GameMatrix((Mat(1, 1) << 2.0).finished()), ConfigError);
}

TEST_CASE("duality gap is non-negative") {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    Mat g(3, 4);
    for (Eigen::Index r = 0; r < 3; ++r)
      for (Eigen::Index c = 0; c < 4; ++c) g(r, c) = 2.0 * rng.uniform() - 1.0;
    const Vec x = random_interior_point(3, rng).weights();
    const Vec y = random_interior_point(4, rng).weights();
    CHECK(duality_gap(x, y, GameMatrix(g)).gap >= 0.0);
  }
}

TEST_CASE("self-play feedback matches direct matrix products") {
  const GameMatrix g((Mat(2, 3) << 0.5, -0.2, 1.0, -1.0, 0.3, 0.0).finished());
  BroadOmd row(configure_game_player(2, 5, 300, true));
  BroadOmd col(configure_game_player(3, 5, 300, true));
  Rng rr(1), rc(2);
  const SelfPlayResult r = self_play(g, row, col, 300, rr, rc, {10, 300}, true);
  REQUIRE(r.trace.size() == 300);
  for (const SelfPlayStep& s : r.trace) {
    CHECK(s.row_loss == doctest::Approx(g.matrix().row(s.row).dot(s.y)));
    CHECK(s.col_loss == doctest::Approx(-s.x.dot(g.matrix().col(s.col))));
  }
  CHECK(r.checkpoint_gaps.size() == 2);
  CHECK(std::abs(r.x_bar.sum() - 1.0) <= 1e-9);
  CHECK_THROWS_AS(self_play(g, col, row, 10, rr, rc, {}), DomainError);
}

TEST_CASE("self-play is symmetric under swapping seats") {
  const Mat g = (Mat(2, 3) << 0.5, -0.2, 1.0, -1.0, 0.3, 0.0).finished();
  const GameMatrix game(g);
  const GameMatrix mirrored((-g.transpose()).eval());

  BroadOmd a_row(configure_game_player(2, 5, 200, false));
  BroadOmd a_col(configure_game_player(3, 5, 200, false));
  Rng r1(100), c1(200);
  const SelfPlayResult first = self_play(game, a_row, a_col, 200, r1, c1, {}, true);

  BroadOmd b_row(configure_game_player(3, 5, 200, false));
  BroadOmd b_col(configure_game_player(2, 5, 200, false));
  Rng r2(200), c2(100);
  const SelfPlayResult second = self_play(mirrored, b_row, b_col, 200, r2, c2, {}, true);

  for (std::size_t t = 0; t < 200; ++t) {
    REQUIRE(first.trace[t].row == second.trace[t].col);
    REQUIRE(first.trace[t].col == second.trace[t].row);
    CHECK(first.trace[t].x == second.trace[t].y);
    CHECK(first.trace[t].y == second.trace[t].x);
    CHECK(first.trace[t].row_loss == second.trace[t].col_loss);
    CHECK(first.trace[t].col_loss == second.trace[t].row_loss);
  }
}

TEST_CASE("random interior points") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Simplex p = random_interior_point(4, rng);
    CHECK(p.weights().minCoeff() >= 1.0 / 8.0 - 1e-12);
  }
}
