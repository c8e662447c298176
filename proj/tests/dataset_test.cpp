#include "qlab/dataset.hpp"

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "qlab/csv.hpp"
#include "qlab/errors.hpp"
#include "test_util.hpp"

using namespace qlab;

TEST(Dataset, GeneratesExactlyN) {
  Rng rng(1);
  EXPECT_EQ(generate(20000, {}, rng).size(), 20000u);
}

TEST(Dataset, SingleTransitionStartsInResetBox) {
  Rng rng(3);
  const auto d = generate(1, {}, rng);
  ASSERT_EQ(d.size(), 1u);
  const auto& s = d.transitions[0].s;
  for (double v : {s.x, s.x_dot, s.theta, s.theta_dot}) EXPECT_LE(std::abs(v), 0.05);
}

TEST(Dataset, SameSeedSameDataset) {
  Rng a(9), b(9);
  EXPECT_EQ(generate(3000, {}, a), generate(3000, {}, b));
}

TEST(Dataset, TransitionInvariantsAndEpisodeContinuity) {
  Rng rng(11);
  const auto d = generate(5000, {}, rng);
  std::size_t terminals = 0, episode_len = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const auto& t = d.transitions[k];
    ASSERT_EQ(t.r, reward(t.s_next, d.physics));
    ASSERT_EQ(t.terminal, is_terminal(t.s_next, d.physics));
    ASSERT_EQ(step(t.s, t.a, d.physics).next_state, t.s_next);
    ++episode_len;
    terminals += t.terminal ? 1 : 0;
    const bool boundary = t.terminal || episode_len == kEpisodeCap;
    if (boundary) episode_len = 0;
    if (k + 1 < d.size() && !boundary) ASSERT_EQ(d.transitions[k + 1].s, t.s_next) << "at " << k;
  }
  EXPECT_GT(terminals, 0u);
}

TEST(Dataset, ActionsRoughlyBalanced) {
  Rng rng(5);
  const auto d = generate(10000, {}, rng);
  const auto rights = std::count_if(d.transitions.begin(), d.transitions.end(),
                                    [](const Transition& t) { return t.a == Action::Right; });
  EXPECT_NEAR(static_cast<double>(rights) / 10000.0, 0.5, 0.03);
}

TEST(DatasetSplit, Sizes) {
  Rng g(2), s(4), s2(4);
  EXPECT_EQ(split(generate(10, {}, g), 0.7, s).first.size(), 7u);
  Rng g2(2);
  const auto [train, val] = split(generate(20000, {}, g2), 0.7, s2);
  EXPECT_EQ(train.size(), 14000u);
  EXPECT_EQ(val.size(), 6000u);
}

TEST(DatasetSplit, IsAPartition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(300);
    const auto idx = split_indices(n, rng);
    std::vector<std::size_t> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(sorted[i], i);
  }
  // The concrete halves re-combine to the original multiset.
  Rng g(8), s(8);
  const auto d = generate(500, {}, g);
  const auto [train, val] = split(d, 0.7, s);
  std::vector<Transition> all = train.transitions;
  all.insert(all.end(), val.transitions.begin(), val.transitions.end());
  const auto key = [](const Transition& t) { return std::tuple(t.s.x, t.s.x_dot, t.s.theta, t.s.theta_dot, t.a); };
  const auto less = [&](const Transition& a, const Transition& b) { return key(a) < key(b); };
  auto orig = d.transitions;
  std::sort(all.begin(), all.end(), less);
  std::sort(orig.begin(), orig.end(), less);
  EXPECT_EQ(all, orig);
}

TEST(DatasetSplit, Errors) {
  Rng g(1), s(1);
  const auto one = generate(1, {}, g);
  EXPECT_THROW(split(one, 0.7, s), std::invalid_argument);
  Rng g2(1);
  const auto d = generate(10, {}, g2);
  EXPECT_THROW(split(d, 0.0, s), std::invalid_argument);
  EXPECT_THROW(split(d, 1.0, s), std::invalid_argument);
}

TEST(DatasetFile, RoundTripIsBitExact) {
  test_support::TempDir dir;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    PhysicsParams p;
    p.tau = 0.02 + 0.001 * static_cast<double>(seed);
    const auto d = generate(777, p, rng);
    save(d, dir / "d.csv");
    const auto back = load_dataset(dir / "d.csv");
    EXPECT_EQ(back, d);
  }
}

TEST(DatasetFile, HeaderOnlyIsEmptyDataset) {
  const auto d = dataset_from_csv(std::string(kDatasetHeader) + "\n");
  EXPECT_TRUE(d.empty());
}

TEST(DatasetFile, NonNumericRewardNamesLineAndColumn) {
  const std::string text = std::string(kDatasetHeader) + "\n0,0,0,0,1,0,0.1,0,-0.2,1,0\n0,0,0,0,1,0,0.1,0,-0.2,abc,0\n";
  try {
    dataset_from_csv(text, "bad.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 24u);
    EXPECT_NE(std::string(e.what()).find("bad.csv:3:24"), std::string::npos);
  }
}

TEST(DatasetFile, WrongFieldCountAndHeader) {
  EXPECT_THROW(dataset_from_csv(std::string(kDatasetHeader) + "\n1,2,3\n"), ParseError);
  EXPECT_THROW(dataset_from_csv("x,y\n"), ParseError);
  EXPECT_THROW(dataset_from_csv(std::string(kDatasetHeader) + "\n0,0,0,0,2,0,0,0,0,1,0\n"), ParseError);
}

TEST(DatasetFile, MissingFileIsIoError) {
  EXPECT_THROW(load_dataset("/nonexistent/dir/none.csv"), IoError);
}

TEST(Csv, ShortestRoundTrip) {
  Rng rng(123);
  for (int i = 0; i < 10000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-30, 30));
    ASSERT_EQ(csv::parse_double(csv::format_double(v)), v);
  }
  EXPECT_EQ(csv::format_double(0.1), "0.1");
  EXPECT_EQ(csv::format_double(1.0), "1");
}
