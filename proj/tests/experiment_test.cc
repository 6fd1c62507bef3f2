#include "lsmclab/experiment.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "test_util.h"

namespace lsmclab {
namespace {

constexpr const char* kSmall = R"(
[engine]
size_ratio = 3
buffer_bytes = 4096
page_bytes = 512
entry_bytes = 64
block_cache_bytes = 0

[workload]
inserts = 3000
update_ratio = 0.5
delete_fraction = 0.1
point_lookups = 800
range_lookups = 40
selectivity = 0.01
alpha = 0.5
seed = 9
)";

ExperimentConfig MustParse(const std::string& text) {
  auto cfg = ParseConfig(text);
  EXPECT_TRUE(cfg.ok()) << cfg.status().ToString();
  return cfg.ok() ? *cfg : ExperimentConfig{};
}

TEST(ParseConfig, DefaultsAndSections) {
  auto cfg = MustParse(kSmall);
  EXPECT_EQ(cfg.tree.size_ratio, 3);
  EXPECT_EQ(cfg.tree.buffer_bytes, 4096u);
  EXPECT_EQ(cfg.preset_opts.size_ratio, 3);
  EXPECT_EQ(cfg.strategies, std::vector<std::string>{"full"});
  EXPECT_EQ(cfg.workload.inserts, 3000u);
  EXPECT_EQ(cfg.workload.entry_bytes, 64u);
  EXPECT_EQ(cfg.repetitions, 1);
  EXPECT_FALSE(cfg.verify);
}

TEST(ParseConfig, PresetListAndDeletePercentage) {
  auto cfg = MustParse(std::string(kSmall) +
                       "[strategy]\npreset = full, tsa ,tier\n[experiment]\nrepetitions = 2\nverify = true\n");
  EXPECT_EQ(cfg.strategies, (std::vector<std::string>{"full", "tsa", "tier"}));
  EXPECT_EQ(cfg.repetitions, 2);
  EXPECT_TRUE(cfg.verify);

  auto with_pct = MustParse(std::string(kSmall) + "[strategy]\npreset = tsa\n");
  with_pct.delete_persistence_pct = 10;
  auto strategies = ResolveStrategies(with_pct, 5000);
  ASSERT_TRUE(strategies.ok());
  const auto& triggers = (*strategies)[0].triggers;
  const auto ttl = std::find_if(triggers.begin(), triggers.end(),
                                [](const Trigger& t) { return t.kind == Trigger::Kind::kTombstoneTTL; });
  ASSERT_NE(ttl, triggers.end());
  EXPECT_EQ(ttl->value, 500);
}

TEST(ParseConfig, ExplicitEnsemble) {
  auto cfg = MustParse(std::string(kSmall) +
                       "[strategy]\nname = mine\ntriggers = sorted_runs:3\nlayout = tiering\n"
                       "granularity = sorted_run\nmovement = least_overlap_parent\n");
  EXPECT_TRUE(cfg.strategies.empty());
  auto s = ResolveStrategies(cfg, 100);
  ASSERT_TRUE(s.ok()) << s.status().ToString();
  EXPECT_EQ((*s)[0].name, "mine");
  EXPECT_EQ((*s)[0].layout.kind, DataLayout::Kind::kTiering);
}

TEST(ParseConfig, RejectsMistakes) {
  for (const char* bad : {
           "[engin]\nsize_ratio = 3\n",
           "[engine]\nsize_ratoi = 3\n",
           "[engine]\nsize_ratio = three\n",
           "[engine]\nsize_ratio = 1\n",
           "[engine]\ndelete_persistence_pct = 150\n",
           "[strategy]\npreset = full\nlayout = tiering\n",
           "[workload]\ninterleaving = sometimes\n",
           "[workload]\ninsert_dist = pareto\n",
           "[experiment]\nrepetitions = 0\n",
           "[engine\nsize_ratio = 3\n",
       }) {
    auto cfg = ParseConfig(bad);
    EXPECT_FALSE(cfg.ok()) << bad;
    if (!cfg.ok()) EXPECT_TRUE(cfg.status().IsInvalidArgument()) << cfg.status().ToString();
  }
  // Unknown preset names surface when strategies are resolved.
  auto cfg = MustParse("[strategy]\npreset = fastest\n");
  EXPECT_FALSE(ResolveStrategies(cfg, 10).ok());
}

TEST(Csv, HeaderIsVersionedWithFixedColumns) {
  const std::string h = CsvHeader();
  EXPECT_EQ(h.rfind("# lsmclab metrics v1\n", 0), 0u);
  const std::string cols = h.substr(h.find('\n') + 1);
  EXPECT_EQ(cols.rfind("strategy,seed,inserts,updates,deletes,alpha,selectivity,compaction_count,pseudo_count,"
                       "bytes_read,bytes_written,write_amp,read_amp,space_amp,tombstones_remaining,"
                       "compaction_p50,",
                       0),
            0u)
      << cols;
  EXPECT_EQ(std::count(cols.begin(), cols.end(), ','), 15 + 16 - 1);
}

TEST(RunOnce, VerifiedRunAgreesWithOracle) {
  auto cfg = MustParse(kSmall);
  cfg.verify = true;
  cfg.preset_opts.delete_persistence_threshold = 1000;
  for (const char* p : {"full", "lo2", "tsa", "tier"}) {
    auto s = MakePreset(p, cfg.preset_opts);
    ASSERT_TRUE(s.ok());
    auto r = RunOnce(cfg, *s, 9);
    ASSERT_TRUE(r.ok()) << p << ": " << r.status().ToString();
    // 3000 ingested entries: 2000 unique keys plus 1000 updates.
    EXPECT_EQ(r->inserts, 2000u);
    EXPECT_EQ(r->updates, 1000u);
    EXPECT_EQ(r->deletes, 200u);
    EXPECT_EQ(r->operations, 3000u + 200 + 800 + 40);
    EXPECT_EQ(r->report.point_lookups, 800u);
    EXPECT_EQ(r->workload_hash, r->spec.Hash());
    auto s2 = MakePreset(p, cfg.preset_opts);
    auto again = RunOnce(cfg, *s2, 9);
    ASSERT_TRUE(again.ok());
    EXPECT_EQ(CsvRow(*r), CsvRow(*again)) << p;
  }
}

TEST(RunOnce, ReplaysAWorkloadFile) {
  const auto dir = std::filesystem::temp_directory_path() / "lsmclab_experiment_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "ops.txt").string();
  {
    std::ofstream out(path);
    out << "I 0000000000000001 a\nI 0000000000000002 b\nU 0000000000000001 c\nD 0000000000000002\n"
        << "P 0000000000000001\nS 0000000000000000 0000000000000009\n";
  }
  auto cfg = MustParse(kSmall);
  cfg.workload_file = path;
  cfg.verify = true;
  auto n = WorkloadOpCount(cfg);
  ASSERT_TRUE(n.ok()) << n.status().ToString();
  EXPECT_EQ(*n, 6u);
  auto s = MakePreset("full", cfg.preset_opts);
  auto r = RunOnce(cfg, *s, 0);
  ASSERT_TRUE(r.ok()) << r.status().ToString();
  EXPECT_EQ(r->operations, 6u);
  EXPECT_EQ(r->deletes, 1u);
  EXPECT_EQ(r->report.point_lookups_found, 1u);
  EXPECT_NE(r->workload_hash, 0u);
  std::filesystem::remove_all(dir);
}

TEST(Outputs, GridIsByteIdenticalAcrossReruns) {
  auto cfg = MustParse(std::string(kSmall) + "[strategy]\npreset = lo1,tier\n[experiment]\nrepetitions = 2\n");
  const auto root = std::filesystem::temp_directory_path() / "lsmclab_outputs_test";
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    auto runs = RunGrid(cfg);
    ASSERT_TRUE(runs.ok()) << runs.status().ToString();
    ASSERT_EQ(runs->size(), 4u);
    EXPECT_EQ((*runs)[0].strategy, "lo1");
    EXPECT_EQ((*runs)[1].seed, 10u);
    const auto dir = (root / std::to_string(i)).string();
    ASSERT_OK(WriteOutputs(dir, *runs));
    std::ifstream in(dir + "/metrics.csv", std::ios::binary);
    csv[i].assign(std::istreambuf_iterator<char>(in), {});
    EXPECT_TRUE(std::filesystem::exists(dir + "/report.json"));
    EXPECT_TRUE(std::filesystem::exists(dir + "/manifest-dump.txt"));
  }
  EXPECT_EQ(csv[0], csv[1]);
  EXPECT_EQ(std::count(csv[0].begin(), csv[0].end(), '\n'), 2 + 4);
  std::filesystem::remove_all(root);
}

TEST(Outputs, ParallelRepetitionsMatchSerial) {
  auto cfg = MustParse(std::string(kSmall) + "[strategy]\npreset = lo2,tsd\n");
  auto serial = RunGrid(cfg);
  cfg.parallel = true;
  auto parallel = RunGrid(cfg);
  ASSERT_TRUE(serial.ok() && parallel.ok());
  for (size_t i = 0; i < serial->size(); ++i) EXPECT_EQ(CsvRow((*serial)[i]), CsvRow((*parallel)[i]));
}

CompareEntry Entry(std::string label, std::vector<double> values, uint64_t hash = 7) {
  CompareEntry e{std::move(label), hash, {}};
  for (size_t i = 0; i < CompareMetrics().size(); ++i) e.metrics[CompareMetrics()[i]] = values[i];
  return e;
}

TEST(Compare, TiesShareARankAndDominanceIsReported) {
  auto r = Compare({Entry("a", {1, 2, 3, 4, 5, 6}), Entry("b", {1, 3, 3, 4, 5, 6}), Entry("c", {2, 1, 9, 9, 9, 9})});
  ASSERT_TRUE(r.ok()) << r.status().ToString();
  const Ranking& wa = r->rankings[0];
  EXPECT_EQ(wa.metric, "write_amp");
  EXPECT_EQ(wa.rank.at("a"), 1);
  EXPECT_EQ(wa.rank.at("b"), 1);
  EXPECT_EQ(wa.rank.at("c"), 3);
  EXPECT_EQ(r->rankings[1].rank.at("c"), 1);
  ASSERT_EQ(r->dominated.size(), 1u);
  EXPECT_EQ(r->dominated.at("b"), "a");
  EXPECT_NE(r->table.find("dominated: b (by a)"), std::string::npos) << r->table;
}

TEST(Compare, RejectsMismatchedWorkloadsAndSingleRuns) {
  auto mismatch = Compare({Entry("a", {1, 1, 1, 1, 1, 1}, 1), Entry("b", {1, 1, 1, 1, 1, 1}, 2)});
  ASSERT_FALSE(mismatch.ok());
  EXPECT_NE(mismatch.status().message().find("workload hash mismatch"), std::string::npos);
  EXPECT_FALSE(Compare({Entry("a", {1, 1, 1, 1, 1, 1})}).ok());
  auto equal = Compare({Entry("a", {1, 1, 1, 1, 1, 1}), Entry("b", {1, 1, 1, 1, 1, 1})});
  ASSERT_TRUE(equal.ok());
  EXPECT_TRUE(equal->dominated.empty());
}

TEST(Compare, LoadsReportsAndNumbersRepeatedLabels) {
  auto cfg = MustParse(std::string(kSmall) + "[strategy]\npreset = full,tier\n");
  auto runs = RunGrid(cfg);
  ASSERT_TRUE(runs.ok());
  const std::string doc = ReportJson(*runs);
  auto parsed = nlohmann::json::parse(doc);
  EXPECT_EQ(parsed["format"], "lsmclab-report");
  auto entries = LoadCompareEntries({doc, doc});
  ASSERT_TRUE(entries.ok()) << entries.status().ToString();
  ASSERT_EQ(entries->size(), 4u);
  EXPECT_EQ((*entries)[2].label, "full#2");
  EXPECT_EQ((*entries)[3].label, "tier#2");
  EXPECT_EQ((*entries)[0].workload_hash, (*runs)[0].workload_hash);
  auto ranked = Compare(*entries);
  ASSERT_TRUE(ranked.ok());
  EXPECT_EQ(ranked->rankings.size(), CompareMetrics().size());

  EXPECT_TRUE(LoadCompareEntries({"{}"}).status().IsParseError());
  EXPECT_TRUE(LoadCompareEntries({"not json"}).status().IsParseError());
}

}  // namespace
}  // namespace lsmclab
