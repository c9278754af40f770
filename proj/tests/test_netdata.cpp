#include "dlfrm/errors.hpp"
#include "dlfrm/netdata.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

namespace dlfrm {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dlfrm_netdata_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string &name, const std::string &text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

using EdgeList = TempDir;
using SplitFiles = TempDir;

Network ring(int n) {
  Network net;
  net.n_entities = n;
  for (int i = 0; i < n; ++i)
    net.links.push_back({i, (i + 1) % n, 1, -1});
  return net;
}

using Key = std::tuple<int, int>;

std::set<Key> keys(const std::vector<Observation> &obs) {
  std::set<Key> out;
  for (const auto &o : obs)
    out.emplace(o.src, o.dst);
  return out;
}

TEST_F(EdgeList, InfersEntityCount) {
  const Network net = load_edge_list(write("a.txt", "0 1\n1 2\n"));
  EXPECT_EQ(net.n_entities, 3);
  ASSERT_EQ(net.links.size(), 2u);
  EXPECT_EQ(net.links[0].sign, 1);
  EXPECT_FALSE(net.has_relations());
}

TEST_F(EdgeList, EmptyFileWithDeclaredCount) {
  const Network net = load_edge_list(write("e.txt", ""), 5);
  EXPECT_EQ(net.n_entities, 5);
  EXPECT_TRUE(net.links.empty());
}

TEST_F(EdgeList, MalformedLineNamesTheLine) {
  try {
    load_edge_list(write("bad.txt", "0 x\n"));
    FAIL() << "expected a parse error";
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos) << e.what();
    EXPECT_EQ(e.kind(), ErrorKind::data);
  }
}

TEST_F(EdgeList, IdBeyondDeclaredCountIsARangeError) {
  EXPECT_THROW(load_edge_list(write("r.txt", "0 7\n"), 5), RangeError);
}

TEST_F(EdgeList, CommentsRelationsTabsAndDuplicates) {
  const Network net =
      load_edge_list(write("m.txt", "# header\n0\t1\t0\n0 1 0\n0 1 1\n\n2 0 1 # trailing\n"));
  EXPECT_EQ(net.n_entities, 3);
  EXPECT_EQ(net.links.size(), 3u);
  EXPECT_TRUE(net.has_relations());
}

TEST_F(EdgeList, SymmetrizeAddsReverseLinks) {
  const Network net = load_edge_list(write("s.txt", "0 1\n1 0\n1 2\n"), std::nullopt, true);
  EXPECT_EQ(net.links.size(), 4u);
}

TEST_F(EdgeList, MissingFileIsAnIoError) {
  EXPECT_THROW(load_edge_list(dir_ / "nope.txt"), IoError);
}

TEST(SplitDense, PartitionsAllOffDiagonalPairs) {
  RngStream rng(1);
  const Network net = ring(3);
  const LinkSplit s = split_dense(net, 0.8, rng);
  EXPECT_EQ(s.train.size() + s.dev.size() + s.test.size(), 6u);
  std::set<Key> all;
  for (const auto *part : {&s.train, &s.dev, &s.test})
    for (const auto &o : *part) {
      EXPECT_NE(o.src, o.dst);
      EXPECT_TRUE(all.emplace(o.src, o.dst).second) << "duplicate observation";
    }
}

TEST(SplitDense, TestShareUsesFloor) {
  RngStream rng(2);
  Network net = ring(10); // 90 off-diagonal entries
  net.n_entities = 10;
  const LinkSplit s = split_dense(net, 0.8, rng);
  EXPECT_EQ(s.test.size(), 18u);
  EXPECT_EQ(s.dev.size(), 18u);
  EXPECT_EQ(s.train.size(), 54u);
  int positives = 0;
  for (const auto *part : {&s.train, &s.dev, &s.test})
    for (const auto &o : *part)
      positives += o.sign > 0;
  EXPECT_EQ(positives, 10);
}

TEST(SplitDense, TestShareIsFlooredAcrossSizes) {
  for (int n : {5, 10, 11}) {
    RngStream rng(3);
    const LinkSplit s = split_dense(ring(n), 0.8, rng);
    const auto total = static_cast<double>(n * (n - 1));
    EXPECT_EQ(s.test.size(), static_cast<std::size_t>(std::floor(0.2 * total + 1e-9)));
  }
}

TEST(SplitDense, SameSeedSameSplit) {
  RngStream a(9);
  RngStream b(9);
  const LinkSplit x = split_dense(ring(8), 0.8, a);
  const LinkSplit y = split_dense(ring(8), 0.8, b);
  EXPECT_EQ(x.train, y.train);
  EXPECT_EQ(x.dev, y.dev);
  EXPECT_EQ(x.test, y.test);
}

TEST(SplitDense, RejectsBadFraction) {
  RngStream rng(1);
  EXPECT_THROW(split_dense(ring(4), 1.0, rng), ParameterError);
  EXPECT_THROW(split_dense(ring(4), 0.0, rng), ParameterError);
}

Network random_network(int n, int positives, RngStream &rng) {
  Network net;
  net.n_entities = n;
  std::set<Key> seen;
  while (static_cast<int>(net.links.size()) < positives) {
    const int i = static_cast<int>(rng.uniform() * n);
    const int j = static_cast<int>(rng.uniform() * n);
    if (i != j && seen.emplace(i, j).second)
      net.links.push_back({i, j, 1, -1});
  }
  return net;
}

TEST(SplitSparse, ProtocolSizes) {
  RngStream rng(4);
  const Network net = random_network(200, 100, rng);
  const LinkSplit s = split_sparse(net, 0.9, 10, rng);
  int train_pos = 0;
  int test_pos = 0;
  for (const auto &o : s.train)
    train_pos += o.sign > 0;
  for (const auto &o : s.test)
    test_pos += o.sign > 0;
  EXPECT_EQ(train_pos, 90);
  EXPECT_EQ(static_cast<int>(s.train.size()) - train_pos, 900);
  EXPECT_EQ(test_pos, 10);
  EXPECT_EQ(static_cast<int>(s.test.size()) - test_pos, 10);
}

TEST(SplitSparse, NegativesAvoidPositivesAndTraining) {
  RngStream rng(5);
  const Network net = random_network(30, 60, rng);
  const LinkSplit s = split_sparse(net, 0.9, 5, rng);
  std::set<Key> pos;
  for (const auto &l : net.links)
    pos.emplace(l.src, l.dst);
  const auto train = keys(s.train);
  for (const auto &o : s.train)
    if (o.sign < 0)
      EXPECT_FALSE(pos.count({o.src, o.dst}));
  for (const auto &o : s.test) {
    EXPECT_FALSE(train.count({o.src, o.dst}));
    if (o.sign < 0)
      EXPECT_FALSE(pos.count({o.src, o.dst}));
  }
  EXPECT_EQ(keys(s.test).size(), s.test.size());
}

TEST(SplitSparse, FullTrainFractionLeavesNoTestPositives) {
  RngStream rng(6);
  EXPECT_THROW(split_sparse(ring(20), 1.0, 2, rng), CapacityError);
}

TEST(SplitSparse, TooFewNegativesIsACapacityError) {
  RngStream rng(7);
  EXPECT_THROW(split_sparse(ring(4), 0.5, 10, rng), CapacityError);
}

TEST(SplitSparse, NegativeSamplingIsUniform) {
  // 10 entities, 10 ring links: 80 eligible non-links. With 5 training
  // positives and multiple 2, each split draws 10 negatives into train.
  const Network net = ring(10);
  std::map<Key, int> hits;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(1000 + static_cast<std::uint64_t>(r));
    const LinkSplit s = split_sparse(net, 0.5, 2, rng);
    for (const auto &o : s.train)
      if (o.sign < 0)
        ++hits[{o.src, o.dst}];
  }
  const double p = 10.0 / 80.0;
  const double se = std::sqrt(reps * p * (1.0 - p));
  int eligible = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      if (i == j || j == (i + 1) % 10)
        continue;
      ++eligible;
      const Key k{i, j};
      EXPECT_NEAR(hits[k], reps * p, 4.0 * se) << i << "," << j;
    }
  EXPECT_EQ(eligible, 80);
}

TEST(PerRelation, ViewsPartitionLinks) {
  Network net;
  net.n_entities = 4;
  net.links = {{0, 1, 1, 2}, {1, 2, 1, 0}, {2, 3, 1, 2}, {3, 0, 1, 1}};
  const auto views = per_relation_views(net);
  ASSERT_EQ(views.size(), 3u);
  std::size_t total = 0;
  for (const auto &v : views) {
    EXPECT_EQ(v.n_entities, 4);
    total += v.links.size();
  }
  EXPECT_EQ(total, net.links.size());
  EXPECT_EQ(views[2].links.size(), 2u);
}

TEST(PerRelation, SingleRelationIsIdentity) {
  Network net;
  net.n_entities = 3;
  net.links = {{0, 1, 1, 0}, {1, 2, 1, 0}};
  const auto views = per_relation_views(net);
  ASSERT_EQ(views.size(), 1u);
  EXPECT_EQ(views[0].links.size(), 2u);
}

TEST(PerRelation, TwentySixRelations) {
  Network net;
  net.n_entities = 104;
  for (int r = 0; r < 26; ++r)
    net.links.push_back({r, r + 1, 1, r});
  EXPECT_EQ(per_relation_views(net).size(), 26u);
}

TEST(PerRelation, UnlabelledLinksAreAUsageError) {
  EXPECT_THROW(per_relation_views(ring(3)), UsageError);
}

TEST_F(SplitFiles, RoundTrip) {
  RngStream rng(8);
  const LinkSplit s = split_dense(ring(7), 0.8, rng);
  write_split(s, dir_ / "split.txt");
  const LinkSplit back = read_split(dir_ / "split.txt");
  EXPECT_EQ(back.n_entities, s.n_entities);
  EXPECT_EQ(back.train, s.train);
  EXPECT_EQ(back.dev, s.dev);
  EXPECT_EQ(back.test, s.test);
}

TEST_F(SplitFiles, SameSeedByteIdentical) {
  for (const char *name : {"a.txt", "b.txt"}) {
    RngStream rng(99);
    write_split(split_dense(ring(9), 0.8, rng), dir_ / name);
  }
  std::ifstream a(dir_ / "a.txt");
  std::ifstream b(dir_ / "b.txt");
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
}

TEST_F(SplitFiles, BadRoleIsAParseError) {
  const auto p = write("bad.txt", "# dlfrm split v1\n# n_entities 3\nvalid 0 1 1\n");
  EXPECT_THROW(read_split(p), ParseError);
}

TEST(TrainingNetwork, KeepsOnlyTrainingPositives) {
  LinkSplit s;
  s.n_entities = 3;
  s.train = {{0, 1, 1}, {1, 2, -1}};
  s.test = {{2, 0, 1}};
  const Network net = training_network(s);
  ASSERT_EQ(net.links.size(), 1u);
  EXPECT_EQ(net.links[0].src, 0);
  EXPECT_EQ(net.links[0].dst, 1);
}

} // namespace
} // namespace dlfrm
