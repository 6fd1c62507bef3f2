#include "lsmclab/workload.h"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "lsmclab/entry.h"

namespace lsmclab {
namespace {

WorkloadSpec Mixed() {
  WorkloadSpec s;
  s.inserts = 5000;
  s.update_ratio = 1.5;
  s.delete_fraction = 0.2;
  s.point_lookups = 3000;
  s.alpha = 0.4;
  s.range_lookups = 200;
  s.selectivity = 0.01;
  s.entry_bytes = 64;
  s.seed = 42;
  return s;
}

TEST(WorkloadSpec, DerivedCounts) {
  WorkloadSpec s = Mixed();
  EXPECT_EQ(s.unique_inserts(), 2000u);  // 5000 / 2.5
  EXPECT_EQ(s.updates(), 3000u);
  EXPECT_EQ(s.deletes(), 400u);
  EXPECT_EQ(s.empty_lookups(), 1200u);
  EXPECT_EQ(s.value_bytes(), 64u - 16 - kEntryHeaderBytes);
  s.update_ratio = 8;
  s.inserts = 1000000;
  EXPECT_EQ(s.unique_inserts(), 111111u);
}

TEST(WorkloadSpec, Validation) {
  WorkloadSpec s = Mixed();
  EXPECT_TRUE(s.Validate().ok());
  s.alpha = 1.5;
  EXPECT_FALSE(s.Validate().ok());
  s = Mixed();
  s.entry_bytes = 20;
  EXPECT_FALSE(s.Validate().ok());
  s = Mixed();
  s.key_bytes = 3;  // 500 even keys for 2000 inserts
  EXPECT_FALSE(s.Validate().ok());
  s = Mixed();
  s.selectivity = 0;
  EXPECT_FALSE(s.Validate().ok());
}

TEST(WorkloadSpec, CanonicalStringAndHash) {
  WorkloadSpec a = Mixed(), b = Mixed();
  EXPECT_EQ(a.ToString(), b.ToString());
  EXPECT_EQ(a.Hash(), b.Hash());
  b.seed = 43;
  EXPECT_NE(a.Hash(), b.Hash());
  b = Mixed();
  b.insert_dist = Distribution::Zipfian(1.2);
  EXPECT_NE(a.Hash(), b.Hash());
}

TEST(Distribution, ParseAndFormat) {
  for (const char* text : {"uniform", "normal:20", "zipf:1.5", "prefix_zipf:0.8:3"}) {
    auto d = ParseDistribution(text);
    ASSERT_TRUE(d.ok()) << text;
    auto again = ParseDistribution(d->ToString());
    ASSERT_TRUE(again.ok());
    EXPECT_EQ(again->ToString(), d->ToString());
  }
  EXPECT_EQ(ParseDistribution("zipf")->s, 1.0);
  for (const char* bad : {"", "gauss", "zipf:x", "zipf:1:2", "prefix_zipf:1:y", "zipf:-1", "normal:0"}) {
    auto d = ParseDistribution(bad);
    EXPECT_FALSE(d.ok() && d->Validate().ok()) << bad;
  }
}

TEST(Keys, FixedWidthDecimalPreservesOrder) {
  EXPECT_EQ(EncodeKey(42, 6), "000042");
  EXPECT_LT(EncodeKey(9, 16), EncodeKey(10, 16));
  EXPECT_EQ(KeyDomain(4), 5000u);
  EXPECT_EQ(KeyDomain(19), uint64_t{1} << 62);
  EXPECT_EQ(EncodeKey(2 * (KeyDomain(16) - 1) + 1, 16).size(), 16u);
}

TEST(Random, UniformIntIsUnbiasedByChiSquare) {
  std::mt19937_64 rng(3);
  const int k = 100, n = 200000;
  std::vector<int> counts(k);
  for (int i = 0; i < n; ++i) counts[UniformInt(rng, k)]++;
  double chi2 = 0;
  const double expected = static_cast<double>(n) / k;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 148.2);  // 99 dof, p = 0.001
}

TEST(Random, StandardNormalMoments) {
  std::mt19937_64 rng(5);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = StandardNormal(rng);
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Sampler, ZipfRankOneIsTwiceRankTwo) {
  std::mt19937_64 rng(17);
  IndexSampler z(Distribution::Zipfian(1.0), 10000);
  std::vector<int> counts(4);
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const uint64_t x = z.Sample(rng);
    ASSERT_LT(x, 10000u);
    if (x < 4) counts[x]++;
  }
  EXPECT_NEAR(static_cast<double>(counts[0]) / counts[1], 2.0, 0.2);
  EXPECT_NEAR(static_cast<double>(counts[0]) / counts[3], 4.0, 0.4);
  // P(rank 1) = 1 / H_10000 = 0.1020
  EXPECT_NEAR(static_cast<double>(counts[0]) / n, 0.1020, 0.003);
}

TEST(Sampler, ZipfExponentShapesTheTail) {
  std::mt19937_64 rng(19);
  IndexSampler z(Distribution::Zipfian(2.0), 1000);
  int first = 0, second = 0;
  for (int i = 0; i < 200000; ++i) {
    const uint64_t x = z.Sample(rng);
    first += x == 0;
    second += x == 1;
  }
  EXPECT_NEAR(static_cast<double>(first) / second, 4.0, 0.4);
}

TEST(Sampler, UniformAndNormalStayInRange) {
  std::mt19937_64 rng(23);
  IndexSampler u(Distribution::Uniform(), 50);
  IndexSampler g(Distribution::Normal(10), 1000);
  double mean = 0;
  for (int i = 0; i < 50000; ++i) {
    ASSERT_LT(u.Sample(rng), 50u);
    const uint64_t x = g.Sample(rng);
    ASSERT_LT(x, 1000u);
    mean += static_cast<double>(x);
  }
  EXPECT_NEAR(mean / 50000, 499.5, 5);
}

TEST(Sampler, PrefixZipfConcentratesOnFewBuckets) {
  std::mt19937_64 rng(29);
  const uint64_t n = 1000000;
  IndexSampler p(Distribution::PrefixZipf(1.0, 2), n);  // 100 buckets of 10000
  std::vector<int> buckets(100);
  for (int i = 0; i < 100000; ++i) {
    const uint64_t x = p.Sample(rng);
    ASSERT_LT(x, n);
    buckets[x / 10000]++;
  }
  EXPECT_NEAR(static_cast<double>(buckets[0]) / buckets[1], 2.0, 0.25);
}

TEST(Generator, SameSeedSameStream) {
  auto a = GenerateWorkload(Mixed());
  auto b = GenerateWorkload(Mixed());
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(*a, *b);
  WorkloadSpec other = Mixed();
  other.seed = 7;
  auto c = GenerateWorkload(other);
  EXPECT_NE(*a, *c);
}

TEST(Generator, MixMatchesSpecAndKeysAreConsistent) {
  const WorkloadSpec s = Mixed();
  auto ops = GenerateWorkload(s);
  ASSERT_TRUE(ops.ok()) << ops.status().ToString();
  std::map<Operation::Type, uint64_t> n;
  std::set<std::string> live, ever;
  uint64_t empty = 0;
  for (const auto& op : *ops) {
    n[op.type]++;
    switch (op.type) {
      case Operation::Type::kInsert:
        EXPECT_TRUE(ever.insert(op.key).second) << "insert of a used key";
        live.insert(op.key);
        EXPECT_EQ(op.key.size() + op.arg.size() + kEntryHeaderBytes, s.entry_bytes);
        break;
      case Operation::Type::kUpdate:
        EXPECT_TRUE(live.count(op.key)) << "update of a dead key";
        break;
      case Operation::Type::kDelete:
        EXPECT_EQ(live.erase(op.key), 1u) << "delete of a dead key";
        break;
      case Operation::Type::kPointLookup:
        if (!live.count(op.key)) {
          ++empty;
          EXPECT_FALSE(ever.count(op.key));  // empty lookups use odd keys
        }
        break;
      case Operation::Type::kRangeLookup:
        EXPECT_LE(op.key, op.arg);
        break;
    }
  }
  EXPECT_EQ(n[Operation::Type::kInsert], s.unique_inserts());
  EXPECT_EQ(n[Operation::Type::kUpdate], s.updates());
  EXPECT_EQ(n[Operation::Type::kDelete], s.deletes());
  EXPECT_EQ(n[Operation::Type::kPointLookup], s.point_lookups);
  EXPECT_EQ(n[Operation::Type::kRangeLookup], s.range_lookups);
  EXPECT_EQ(empty, s.empty_lookups());
}

TEST(Generator, SerialPutsLookupsLast) {
  auto ops = GenerateWorkload(Mixed());
  ASSERT_TRUE(ops.ok());
  const uint64_t ingest = Mixed().inserts + Mixed().deletes();
  for (uint64_t i = 0; i < ops->size(); ++i) {
    const bool lookup =
        (*ops)[i].type == Operation::Type::kPointLookup || (*ops)[i].type == Operation::Type::kRangeLookup;
    EXPECT_EQ(lookup, i >= ingest) << i;
  }
}

TEST(Generator, InterleavedStartsAfterTheUpperLevels) {
  WorkloadSpec s = Mixed();
  s.interleaving = Interleaving::kInterleaved;
  // 2000 unique entries, 20 per buffer, T = 3: L = 4, upper levels hold
  // 20 * (3 + 9 + 27) = 780 entries.
  const uint64_t start = InterleavedLookupStart(s, 20, 3);
  EXPECT_EQ(start, 780u);
  auto ops = GenerateWorkload(s, start);
  ASSERT_TRUE(ops.ok());
  uint64_t first_lookup = 0;
  while ((*ops)[first_lookup].type != Operation::Type::kPointLookup &&
         (*ops)[first_lookup].type != Operation::Type::kRangeLookup) {
    ++first_lookup;
  }
  EXPECT_EQ(first_lookup, start);
  // Lookups are spread out, not bunched at the end.
  uint64_t lookups_in_first_half = 0;
  for (uint64_t i = 0; i < ops->size() / 2; ++i) {
    lookups_in_first_half += (*ops)[i].type == Operation::Type::kPointLookup;
  }
  EXPECT_GT(lookups_in_first_half, 300u);
}

TEST(Generator, RangeWidthFollowsSelectivity) {
  WorkloadSpec s;
  s.inserts = 10000;
  s.range_lookups = 50;
  s.selectivity = 0.01;
  auto ops = GenerateWorkload(s);
  ASSERT_TRUE(ops.ok());
  uint64_t lo_key = UINT64_MAX, hi_key = 0;
  for (const auto& op : *ops) {
    if (op.type != Operation::Type::kInsert) continue;
    lo_key = std::min<uint64_t>(lo_key, std::stoull(op.key));
    hi_key = std::max<uint64_t>(hi_key, std::stoull(op.key));
  }
  const double span = static_cast<double>(hi_key - lo_key) / 2 + 1;
  for (const auto& op : *ops) {
    if (op.type != Operation::Type::kRangeLookup) continue;
    const uint64_t width = (std::stoull(op.arg) + 1) / 2 - std::stoull(op.key) / 2;
    EXPECT_EQ(width, static_cast<uint64_t>(std::ceil(0.01 * span)));
  }
}

TEST(Generator, StreamsWithoutMaterialising) {
  WorkloadSpec s;
  s.inserts = 100;
  s.point_lookups = 1000000;
  WorkloadGenerator gen(s);
  Operation op;
  uint64_t n = 0;
  while (gen.Next(&op)) ++n;
  EXPECT_TRUE(gen.status().ok());
  EXPECT_EQ(n, 1000100u);
  EXPECT_EQ(gen.emitted(), n);
}

TEST(Generator, ReportsInvalidSpec) {
  WorkloadSpec s = Mixed();
  s.delete_fraction = 2;
  WorkloadGenerator gen(s);
  Operation op;
  EXPECT_FALSE(gen.Next(&op));
  EXPECT_FALSE(gen.status().ok());
}

TEST(Format, OperationsRoundTrip) {
  auto ops = GenerateWorkload(Mixed());
  ASSERT_TRUE(ops.ok());
  std::stringstream ss;
  WorkloadWriter w(&ss);
  w.Comment(Mixed().ToString());
  for (const auto& op : *ops) w.Write(op);
  WorkloadReader r(&ss);
  Operation op;
  size_t i = 0;
  for (bool done = false;;) {
    ASSERT_TRUE(r.Next(&op, &done).ok());
    if (done) break;
    ASSERT_LT(i, ops->size());
    EXPECT_EQ(op, (*ops)[i++]);
  }
  EXPECT_EQ(i, ops->size());
}

TEST(Format, ParseAcceptsAndRejects) {
  EXPECT_EQ(ParseOperation("I k1 v1")->arg, "v1");
  EXPECT_EQ(ParseOperation("I k1")->type, Operation::Type::kInsert);
  EXPECT_EQ(ParseOperation("D k1")->type, Operation::Type::kDelete);
  EXPECT_EQ(ParseOperation("S a b")->arg, "b");
  for (const char* bad : {"", "X k", "I", "D k v", "P", "S a", "S a b c", "II k v", "I  k"}) {
    auto p = ParseOperation(bad);
    ASSERT_FALSE(p.ok()) << "'" << bad << "'";
    EXPECT_TRUE(p.status().IsParseError());
  }
}

TEST(Format, ReaderNamesTheBadLine) {
  std::stringstream ss("# header\r\nI k1 v1\r\n\nP k1\nQ what\n");
  WorkloadReader r(&ss);
  Operation op;
  bool done = false;
  ASSERT_TRUE(r.Next(&op, &done).ok());
  EXPECT_EQ(op.arg, "v1");  // carriage return stripped
  ASSERT_TRUE(r.Next(&op, &done).ok());
  const Status s = r.Next(&op, &done);
  EXPECT_TRUE(s.IsParseError());
  EXPECT_NE(s.message().find("line 5"), std::string::npos) << s.message();
}

}  // namespace
}  // namespace lsmclab
