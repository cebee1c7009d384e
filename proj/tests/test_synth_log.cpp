#include <gtest/gtest.h>

#include "alarmtop/conformance.hpp"
#include "alarmtop/synth_log.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace alarmtop;
using testing_support::kExampleTree;

namespace {

using W = std::vector<std::string>;

ProcessTree tree_with_leaves(std::uint64_t seed, std::size_t max_leaves) {
  for (std::uint64_t s = seed;; s += 7777) {
    auto t = random_tree({"a", "b", "c", "d", "e", "f"}, s);
    if (leaf_labels(t).size() <= max_leaves) return t;
  }
}

}  // namespace

TEST(SampleLog, ExampleTreeTraces) {
  const auto ds = sample_log(parse_tree(kExampleTree), 150, 42);
  ASSERT_EQ(ds.traces.size(), 150u);
  const Language allowed{W{"a", "b", "c", "e"}, W{"a", "c", "b", "e"}, W{"a", "d", "e"}, W{"a", "e"}};
  Language seen;
  for (const auto& t : ds.traces) {
    EXPECT_TRUE(allowed.count(t.activities));
    seen.insert(t.activities);
  }
  EXPECT_EQ(seen, allowed);
  EXPECT_EQ(ds.traces.front().case_id, "case001");
}

TEST(SampleLog, SingleLeaf) {
  const auto ds = sample_log(ProcessTree::activity("a"), 1, 1);
  ASSERT_EQ(ds.traces.size(), 1u);
  EXPECT_EQ(ds.traces[0].activities, W{"a"});
  EXPECT_THROW(sample_log(ProcessTree::activity("a"), 0, 1), std::invalid_argument);
}

TEST(SampleLog, DeterministicWithMinuteTimestamps) {
  const auto t = parse_tree("seq(a, loop(b, c), and(d, e, f))");
  const auto ds = sample_log(t, 20, 7);
  EXPECT_EQ(sample_log(t, 20, 7), ds);
  EXPECT_NE(sample_log(t, 20, 8), ds);
  for (const auto& tr : ds.traces) {
    ASSERT_TRUE(tr.timestamps);
    ASSERT_EQ(tr.timestamps->size(), tr.size());
    for (std::size_t k = 1; k < tr.size(); ++k)
      EXPECT_EQ((*tr.timestamps)[k] - (*tr.timestamps)[k - 1], std::chrono::minutes(1));
  }
}

TEST(SampleLog, TracesBelongToTheLanguage) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto t = tree_with_leaves(s, 6);
    const auto ds = sample_log(t, 20, s, 2);
    const auto lang = oracle::language(t, 64, 2);
    for (const auto& tr : ds.traces) EXPECT_TRUE(lang.count(tr.activities)) << format_tree(t);
  }
}

TEST(SampleLog, CleanLogsFitTheirTree) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto t = tree_with_leaves(s, 8);
    EXPECT_EQ(fitness(tree_to_petri_net(t), sample_log(t, 30, s)), 1.0) << format_tree(t);
  }
}

TEST(InjectNoise, ZeroRatesAreIdentity) {
  const auto ds = sample_log(parse_tree(kExampleTree), 30, 1);
  const auto out = inject_noise(ds, NoiseSpec{0, 0, 0, ds.activity_universe()}, 9);
  EXPECT_EQ(out.dataset, ds);
  EXPECT_TRUE(out.warnings.empty());
}

TEST(InjectNoise, DropAllEmptiesDataset) {
  const auto ds = sample_log(ProcessTree::activity("a"), 5, 1);
  const auto out = inject_noise(ds, NoiseSpec{0, 1, 0, {}}, 2);
  EXPECT_TRUE(out.dataset.empty());
  EXPECT_FALSE(out.warnings.empty());
}

TEST(InjectNoise, ReproducibleFixture) {
  const auto ds = sample_log(parse_tree("seq(a, b, c, d, e, f)"), 60, 3);
  const NoiseSpec spec{0.1, 0, 0, ds.activity_universe()};
  const auto a = inject_noise(ds, spec, 4);
  EXPECT_EQ(inject_noise(ds, spec, 4).dataset, a.dataset);
  EXPECT_NE(a.dataset, ds);
  for (std::size_t i = 0; i < ds.traces.size(); ++i) {
    auto x = a.dataset.traces[i].activities, y = ds.traces[i].activities;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    EXPECT_EQ(x, y);  // swaps only permute
  }
}

TEST(InjectNoise, InsertionsUseAlphabet) {
  const auto ds = sample_log(parse_tree("seq(a, b)"), 50, 3);
  const auto out = inject_noise(ds, NoiseSpec{0, 0, 1, {"z"}}, 5).dataset;
  for (const auto& t : out.traces) {
    EXPECT_EQ(t.size(), 3u);
    EXPECT_EQ(std::count(t.activities.begin(), t.activities.end(), "z"), 1);
  }
  EXPECT_THROW(inject_noise(ds, NoiseSpec{1.5, 0, 0, {}}, 1), std::invalid_argument);
}

TEST(InjectNoise, FitnessFallsWithDropRate) {
  const auto truth = parse_tree("seq(a, xor(b, c), and(d, e), f, g)");
  const auto net = tree_to_petri_net(truth);
  const auto ds = sample_log(truth, 60, 10);
  double previous = 2.0;
  for (double drop : {0.0, 0.05, 0.1, 0.2}) {
    const auto noisy = inject_noise(ds, NoiseSpec{0, drop, 0, {}}, 11).dataset;
    const auto f = fitness(net, noisy);
    EXPECT_LE(f, previous) << drop;
    previous = f;
  }
}
