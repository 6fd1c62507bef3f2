#include "lsmclab/experiment.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lsmclab/engine.h"
#include "lsmclab/hash.h"
#include "lsmclab/strutil.h"

namespace lsmclab {

using json = nlohmann::ordered_json;

namespace {

Status ConfigError(const std::string& msg) { return Status::InvalidArgument("config: " + msg); }

// Typed setters over one ini section; every key must be consumed.
class Section {
 public:
  Section(std::string name, const boost::property_tree::ptree* tree) : name_(std::move(name)), tree_(tree) {
    if (tree_) {
      for (const auto& [k, v] : *tree_) left_.insert(k);
    }
  }

  std::optional<std::string> Raw(const std::string& key) {
    if (!tree_) return std::nullopt;
    auto child = tree_->get_optional<std::string>(key);
    if (!child) return std::nullopt;
    left_.erase(key);
    return std::string(Trim(*child));
  }

  template <typename T>
  Status Uint(const std::string& key, T* out) {
    auto raw = Raw(key);
    if (!raw) return Status::OK();
    auto v = ParseUint(*raw);
    if (!v) return ConfigError(name_ + "." + key + ": not an unsigned integer: " + *raw);
    *out = static_cast<T>(*v);
    return Status::OK();
  }
  Status Int(const std::string& key, int* out) {
    auto raw = Raw(key);
    if (!raw) return Status::OK();
    auto v = ParseInt(*raw);
    if (!v) return ConfigError(name_ + "." + key + ": not an integer: " + *raw);
    *out = static_cast<int>(*v);
    return Status::OK();
  }
  Status Double(const std::string& key, double* out) {
    auto raw = Raw(key);
    if (!raw) return Status::OK();
    auto v = ParseDouble(*raw);
    if (!v) return ConfigError(name_ + "." + key + ": not a number: " + *raw);
    *out = *v;
    return Status::OK();
  }
  Status Bool(const std::string& key, bool* out) {
    auto raw = Raw(key);
    if (!raw) return Status::OK();
    auto v = ParseBool(*raw);
    if (!v) return ConfigError(name_ + "." + key + ": not a boolean: " + *raw);
    *out = *v;
    return Status::OK();
  }

  Status CheckConsumed() const {
    if (left_.empty()) return Status::OK();
    return ConfigError("unknown key " + name_ + "." + *left_.begin());
  }

 private:
  std::string name_;
  const boost::property_tree::ptree* tree_;
  std::set<std::string> left_;
};

std::string Hex(uint64_t v) { return StringPrintf("%016llx", static_cast<unsigned long long>(v)); }

}  // namespace

StatusOr<ExperimentConfig> ParseConfig(std::string_view text) {
  boost::property_tree::ptree pt;
  try {
    std::istringstream in{std::string(text)};
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    return ConfigError(StringPrintf("line %lu: %s", e.line(), e.message().c_str()));
  }
  for (const auto& [name, child] : pt) {
    if (name != "engine" && name != "strategy" && name != "workload" && name != "experiment") {
      return ConfigError("unknown section [" + name + "]");
    }
    if (child.empty() && !child.data().empty()) return ConfigError("key outside a section: " + name);
  }
  auto section = [&](const char* name) { return Section(name, pt.get_child_optional(name).get_ptr()); };

  ExperimentConfig cfg;
  Section eng = section("engine");
  TreeConfig& t = cfg.tree;
  LSMCLAB_RETURN_IF_ERROR(eng.Int("size_ratio", &t.size_ratio));
  LSMCLAB_RETURN_IF_ERROR(eng.Uint("buffer_bytes", &t.buffer_bytes));
  LSMCLAB_RETURN_IF_ERROR(eng.Uint("page_bytes", &t.page_bytes));
  LSMCLAB_RETURN_IF_ERROR(eng.Uint("entry_bytes", &t.entry_bytes));
  LSMCLAB_RETURN_IF_ERROR(eng.Double("bits_per_key", &t.bits_per_key));
  LSMCLAB_RETURN_IF_ERROR(eng.Uint("block_cache_bytes", &t.block_cache_bytes));
  LSMCLAB_RETURN_IF_ERROR(eng.Uint("file_bytes", &t.file_bytes));
  LSMCLAB_RETURN_IF_ERROR(eng.Bool("paranoid_checks", &t.paranoid_checks));
  LSMCLAB_RETURN_IF_ERROR(eng.Bool("wall_clock", &t.wall_clock));
  if (auto raw = eng.Raw("delete_persistence_threshold")) {
    auto v = ParseUint(*raw);
    if (!v) return ConfigError("engine.delete_persistence_threshold: not an unsigned integer: " + *raw);
    t.delete_persistence_threshold = *v;
  }
  if (auto raw = eng.Raw("delete_persistence_pct")) {
    auto v = ParseDouble(*raw);
    if (!v || !(*v > 0 && *v <= 100)) return ConfigError("engine.delete_persistence_pct must be in (0,100]");
    cfg.delete_persistence_pct = *v;
  }
  LSMCLAB_RETURN_IF_ERROR(eng.CheckConsumed());
  LSMCLAB_RETURN_IF_ERROR(t.Validate());
  cfg.preset_opts.size_ratio = t.size_ratio;
  cfg.preset_opts.delete_persistence_threshold = t.delete_persistence_threshold;

  Section strat = section("strategy");
  LSMCLAB_RETURN_IF_ERROR(strat.Double("tsd_density", &cfg.preset_opts.tsd_density));
  LSMCLAB_RETURN_IF_ERROR(strat.Double("tier_space_amp", &cfg.preset_opts.tier_space_amp));
  if (auto raw = strat.Raw("preset")) {
    for (auto name : Split(*raw, ',')) cfg.strategies.emplace_back(name);
    if (cfg.strategies.empty()) return ConfigError("strategy.preset is empty");
  }
  for (const char* k : {"name", "triggers", "layout", "granularity", "movement"}) {
    if (auto raw = strat.Raw(k)) cfg.strategy_settings[k] = *raw;
  }
  LSMCLAB_RETURN_IF_ERROR(strat.CheckConsumed());
  if (!cfg.strategies.empty() && !cfg.strategy_settings.empty()) {
    return ConfigError("strategy.preset and an explicit ensemble are exclusive");
  }
  if (cfg.strategies.empty() && cfg.strategy_settings.empty()) cfg.strategies.push_back("full");

  Section wl = section("workload");
  WorkloadSpec& w = cfg.workload;
  w.entry_bytes = t.entry_bytes;
  LSMCLAB_RETURN_IF_ERROR(wl.Uint("inserts", &w.inserts));
  LSMCLAB_RETURN_IF_ERROR(wl.Double("update_ratio", &w.update_ratio));
  LSMCLAB_RETURN_IF_ERROR(wl.Double("delete_fraction", &w.delete_fraction));
  LSMCLAB_RETURN_IF_ERROR(wl.Uint("point_lookups", &w.point_lookups));
  LSMCLAB_RETURN_IF_ERROR(wl.Double("alpha", &w.alpha));
  LSMCLAB_RETURN_IF_ERROR(wl.Uint("range_lookups", &w.range_lookups));
  LSMCLAB_RETURN_IF_ERROR(wl.Double("selectivity", &w.selectivity));
  LSMCLAB_RETURN_IF_ERROR(wl.Uint("entry_bytes", &w.entry_bytes));
  LSMCLAB_RETURN_IF_ERROR(wl.Uint("key_bytes", &w.key_bytes));
  LSMCLAB_RETURN_IF_ERROR(wl.Uint("seed", &w.seed));
  for (auto [key, dist] : {std::pair{"insert_dist", &w.insert_dist}, std::pair{"lookup_dist", &w.lookup_dist}}) {
    if (auto raw = wl.Raw(key)) {
      auto d = ParseDistribution(*raw);
      if (!d.ok()) return ConfigError(std::string("workload.") + key + ": " + d.status().message());
      *dist = *d;
    }
  }
  if (auto raw = wl.Raw("interleaving")) {
    if (*raw == "serial") {
      w.interleaving = Interleaving::kSerial;
    } else if (*raw == "interleaved") {
      w.interleaving = Interleaving::kInterleaved;
    } else {
      return ConfigError("workload.interleaving must be serial or interleaved");
    }
  }
  if (auto raw = wl.Raw("file")) cfg.workload_file = *raw;
  LSMCLAB_RETURN_IF_ERROR(wl.CheckConsumed());
  if (cfg.workload_file.empty()) {
    Status s = w.Validate();
    if (!s.ok()) return ConfigError("workload: " + s.message());
  }

  Section ex = section("experiment");
  if (auto raw = ex.Raw("output")) cfg.output_dir = *raw;
  LSMCLAB_RETURN_IF_ERROR(ex.Int("repetitions", &cfg.repetitions));
  LSMCLAB_RETURN_IF_ERROR(ex.Bool("parallel", &cfg.parallel));
  LSMCLAB_RETURN_IF_ERROR(ex.Bool("verify", &cfg.verify));
  bool wall = t.wall_clock;
  LSMCLAB_RETURN_IF_ERROR(ex.Bool("wall_clock", &wall));
  t.wall_clock = wall;
  LSMCLAB_RETURN_IF_ERROR(ex.CheckConsumed());
  if (cfg.repetitions < 1) return ConfigError("experiment.repetitions must be >= 1");
  return cfg;
}

StatusOr<ExperimentConfig> LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

StatusOr<uint64_t> WorkloadOpCount(const ExperimentConfig& cfg) {
  if (cfg.workload_file.empty()) {
    const WorkloadSpec& w = cfg.workload;
    return w.inserts + w.deletes() + w.point_lookups + w.range_lookups;
  }
  std::ifstream in(cfg.workload_file);
  if (!in) return ConfigError("cannot open workload file " + cfg.workload_file);
  WorkloadReader reader(&in);
  uint64_t n = 0;
  Operation op;
  for (bool done = false;;) {
    LSMCLAB_RETURN_IF_ERROR(reader.Next(&op, &done));
    if (done) break;
    ++n;
  }
  return n;
}

StatusOr<std::vector<CompactionStrategy>> ResolveStrategies(const ExperimentConfig& cfg, uint64_t op_count) {
  PresetOptions opts = cfg.preset_opts;
  if (cfg.delete_persistence_pct) {
    const auto d = static_cast<Tick>(std::llround(*cfg.delete_persistence_pct / 100.0 * static_cast<double>(op_count)));
    opts.delete_persistence_threshold = std::max<Tick>(d, 1);
  }
  std::vector<CompactionStrategy> out;
  if (cfg.strategies.empty()) {
    auto s = StrategyFromSettings(cfg.strategy_settings, opts);
    if (!s.ok()) return s.status();
    out.push_back(*s);
  }
  for (const auto& name : cfg.strategies) {
    auto s = MakePreset(name, opts);
    if (!s.ok()) return s.status();
    out.push_back(*s);
  }
  return out;
}

namespace {

// Feeds one op to the engine and, when an oracle is given, checks results.
Status Apply(Engine* engine, const Operation& op, std::map<std::string, std::string, std::less<>>* oracle,
             uint64_t index) {
  auto mismatch = [&](const std::string& what) {
    return Status::InvariantViolation(
        StringPrintf("op %llu (%s): %s", static_cast<unsigned long long>(index), FormatOperation(op).c_str(),
                     what.c_str()));
  };
  switch (op.type) {
    case Operation::Type::kInsert:
    case Operation::Type::kUpdate: {
      auto s = engine->Put(op.key, op.arg);
      if (!s.ok()) return s.status();
      if (oracle) (*oracle)[op.key] = op.arg;
      return Status::OK();
    }
    case Operation::Type::kDelete: {
      auto s = engine->Delete(op.key);
      if (!s.ok()) return s.status();
      if (oracle) oracle->erase(op.key);
      return Status::OK();
    }
    case Operation::Type::kPointLookup: {
      auto r = engine->Get(op.key);
      if (!r.ok()) return r.status();
      if (oracle) {
        auto it = oracle->find(op.key);
        const bool want = it != oracle->end();
        if (want != r->found) return mismatch(want ? "key missing" : "deleted or absent key found");
        if (want && it->second != r->value) return mismatch("stale value");
      }
      return Status::OK();
    }
    case Operation::Type::kRangeLookup: {
      if (op.key > op.arg) return Status::OK();
      auto r = engine->Scan(op.key, op.arg);
      if (!r.ok()) return r.status();
      if (oracle) {
        auto it = oracle->lower_bound(op.key);
        size_t i = 0;
        for (; it != oracle->end() && it->first < op.arg; ++it, ++i) {
          if (i >= r->size() || (*r)[i].first != it->first || (*r)[i].second != it->second) {
            return mismatch("scan differs at position " + std::to_string(i));
          }
        }
        if (i != r->size()) return mismatch("scan returned extra pairs");
      }
      return Status::OK();
    }
  }
  return Status::OK();
}

}  // namespace

StatusOr<RunResult> RunOnce(const ExperimentConfig& cfg, const CompactionStrategy& strategy, uint64_t seed) {
  EngineOptions eo;
  eo.tree = cfg.tree;
  eo.strategy = strategy;
  for (const auto& t : strategy.triggers) {
    if (t.kind == Trigger::Kind::kTombstoneTTL) eo.tree.delete_persistence_threshold = static_cast<Tick>(t.value);
  }
  auto engine = Engine::Open(eo, std::make_shared<MemDevice>());
  if (!engine.ok()) return engine.status();
  Engine* e = engine->get();

  RunResult res;
  res.strategy = strategy.name;
  res.ensemble = strategy.ToString();
  res.seed = seed;
  std::map<std::string, std::string, std::less<>> oracle;
  auto* oracle_ptr = cfg.verify ? &oracle : nullptr;

  auto count = [&](const Operation& op) {
    ++res.operations;
    if (op.type == Operation::Type::kInsert) ++res.inserts;
    if (op.type == Operation::Type::kUpdate) ++res.updates;
    if (op.type == Operation::Type::kDelete) ++res.deletes;
  };

  Operation op;
  if (cfg.workload_file.empty()) {
    res.spec = cfg.workload;
    res.spec.seed = seed;
    res.workload_hash = res.spec.Hash();
    const uint64_t start =
        InterleavedLookupStart(res.spec, cfg.tree.entries_per_buffer(), cfg.tree.size_ratio);
    WorkloadGenerator gen(res.spec, start);
    while (gen.Next(&op)) {
      LSMCLAB_RETURN_IF_ERROR(Apply(e, op, oracle_ptr, res.operations));
      count(op);
    }
    if (!gen.status().ok()) return Status::InvalidArgument("workload: " + gen.status().message());
  } else {
    std::ifstream in(cfg.workload_file);
    if (!in) return ConfigError("cannot open workload file " + cfg.workload_file);
    WorkloadReader reader(&in);
    uint64_t h = 0;
    for (bool done = false;;) {
      Status s = reader.Next(&op, &done);
      if (!s.ok()) return Status::InvalidArgument("workload file: " + s.message());
      if (done) break;
      h = Hash64(FormatOperation(op), h);
      LSMCLAB_RETURN_IF_ERROR(Apply(e, op, oracle_ptr, res.operations));
      count(op);
    }
    res.workload_hash = h;
  }

  // Reports describe the tree after the buffer is persisted and compaction
  // has settled.
  LSMCLAB_RETURN_IF_ERROR(e->Flush());
  if (cfg.verify) {
    auto all = e->Scan("", std::string(1, '\xff'));
    if (!all.ok()) return all.status();
    if (all->size() != oracle.size() ||
        !std::equal(all->begin(), all->end(), oracle.begin(), [](const KeyValue& a, const auto& b) {
          return a.first == b.first && a.second == b.second;
        })) {
      return Status::InvariantViolation("final live key set differs from the oracle");
    }
  }
  res.report = e->Report();
  res.manifest_dump = e->DumpManifest();
  return res;
}

StatusOr<std::vector<RunResult>> RunGrid(const ExperimentConfig& cfg) {
  auto ops = WorkloadOpCount(cfg);
  if (!ops.ok()) return ops.status();
  auto strategies = ResolveStrategies(cfg, *ops);
  if (!strategies.ok()) return strategies.status();

  struct Job {
    const CompactionStrategy* strategy;
    uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& s : *strategies) {
    for (int r = 0; r < cfg.repetitions; ++r) jobs.push_back({&s, cfg.workload.seed + static_cast<uint64_t>(r)});
  }
  std::vector<std::optional<StatusOr<RunResult>>> out(jobs.size());
  if (cfg.parallel) {
    // Each repetition owns its engine, device and metrics.
    std::vector<std::thread> threads;
    for (size_t i = 0; i < jobs.size(); ++i) {
      threads.emplace_back([&, i] { out[i] = RunOnce(cfg, *jobs[i].strategy, jobs[i].seed); });
    }
    for (auto& t : threads) t.join();
  } else {
    for (size_t i = 0; i < jobs.size(); ++i) out[i] = RunOnce(cfg, *jobs[i].strategy, jobs[i].seed);
  }
  std::vector<RunResult> results;
  for (auto& r : out) {
    if (!r->ok()) return r->status();
    results.push_back(std::move(*r).value());
  }
  return results;
}

std::string CsvHeader() {
  std::string h = "strategy,seed,inserts,updates,deletes,alpha,selectivity,compaction_count,pseudo_count,"
                  "bytes_read,bytes_written,write_amp,read_amp,space_amp,tombstones_remaining";
  for (const char* p : {"compaction", "write", "point", "range"}) {
    for (const char* q : {"p50", "p90", "p99", "p100"}) h += StringPrintf(",%s_%s", p, q);
  }
  return StringPrintf("# lsmclab metrics v%d\n", kCsvVersion) + h + "\n";
}

std::string CsvRow(const RunResult& r) {
  const MetricsReport& m = r.report;
  std::string row = StringPrintf(
      "%s,%llu,%llu,%llu,%llu,%.6f,%.6f,%llu,%llu,%llu,%llu,%.6f,%.6f,%.6f,%llu", r.strategy.c_str(),
      static_cast<unsigned long long>(r.seed),
      static_cast<unsigned long long>(r.inserts),
      static_cast<unsigned long long>(r.updates), static_cast<unsigned long long>(r.deletes), r.spec.alpha,
      r.spec.selectivity, static_cast<unsigned long long>(m.compaction_count),
      static_cast<unsigned long long>(m.pseudo_compaction_count),
      static_cast<unsigned long long>(m.bytes_compaction_read),
      static_cast<unsigned long long>(m.bytes_compaction_written), m.write_amp, m.read_amp, m.space_amp,
      static_cast<unsigned long long>(m.tombstones_remaining));
  for (const HistogramSummary* h :
       {&m.compaction_latency, &m.write_latency, &m.point_lookup_latency, &m.range_latency}) {
    row += StringPrintf(",%.6f,%.6f,%.6f,%.6f", h->p50, h->p90, h->p99, h->p100);
  }
  return row + "\n";
}

namespace {

json HistogramJson(const HistogramSummary& h) {
  return json{{"count", h.count}, {"mean", h.mean}, {"p50", h.p50}, {"p90", h.p90}, {"p99", h.p99}, {"p100", h.p100}};
}

json MetricsJson(const MetricsReport& m) {
  json j;
  j["flush_count"] = m.flush_count;
  j["bytes_flushed"] = m.bytes_flushed;
  j["unique_bytes_ingested"] = m.unique_bytes_ingested;
  j["compaction_count"] = m.compaction_count;
  j["pseudo_compaction_count"] = m.pseudo_compaction_count;
  j["bytes_compaction_read"] = m.bytes_compaction_read;
  j["bytes_compaction_written"] = m.bytes_compaction_written;
  j["entries_dropped"] = m.entries_dropped;
  j["tombstones_dropped"] = m.tombstones_dropped;
  j["point_lookups"] = m.point_lookups;
  j["point_lookups_found"] = m.point_lookups_found;
  j["lookup_filter_pages"] = m.lookup_filter_pages;
  j["lookup_index_pages"] = m.lookup_index_pages;
  j["lookup_data_pages"] = m.lookup_data_pages;
  j["lookup_data_page_accesses"] = m.lookup_data_page_accesses;
  j["range_lookups"] = m.range_lookups;
  j["range_pages"] = m.range_pages;
  j["write_amp"] = m.write_amp;
  j["read_amp"] = m.read_amp;
  j["space_amp"] = m.space_amp;
  j["tombstones_remaining"] = m.tombstones_remaining;
  j["max_tombstone_age_ticks"] = m.max_tombstone_age_ticks;
  j["disk_levels"] = m.disk_levels;
  j["live_files"] = m.live_files;
  j["live_bytes"] = m.live_bytes;
  j["compaction_latency"] = HistogramJson(m.compaction_latency);
  j["write_latency"] = HistogramJson(m.write_latency);
  j["point_lookup_latency"] = HistogramJson(m.point_lookup_latency);
  j["range_latency"] = HistogramJson(m.range_latency);
  json cache;
  for (int k = 0; k < kNumBlockKinds; ++k) {
    cache[BlockKindName(static_cast<BlockKind>(k))] = json{{"hits", m.cache_hits[k]}, {"misses", m.cache_misses[k]}};
  }
  j["cache"] = cache;
  return j;
}

}  // namespace

std::string ReportJson(const std::vector<RunResult>& runs) {
  json doc;
  doc["format"] = "lsmclab-report";
  doc["version"] = kCsvVersion;
  json arr = json::array();
  for (const auto& r : runs) {
    arr.push_back(json{{"strategy", r.strategy},
                       {"ensemble", r.ensemble},
                       {"seed", r.seed},
                       {"workload", r.spec.ToString()},
                       {"workload_hash", Hex(r.workload_hash)},
                       {"operations", r.operations},
                       {"metrics", MetricsJson(r.report)}});
  }
  doc["runs"] = arr;
  return doc.dump(2) + "\n";
}

Status WriteOutputs(const std::string& dir, const std::vector<RunResult>& runs) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return Status::IOError("cannot create " + dir + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& body) -> Status {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    out.close();
    if (!out) return Status::IOError("cannot write " + path);
    return Status::OK();
  };
  std::string csv = CsvHeader();
  std::string dump;
  for (const auto& r : runs) {
    csv += CsvRow(r);
    dump += StringPrintf("## %s seed=%llu\n", r.strategy.c_str(), static_cast<unsigned long long>(r.seed));
    dump += r.manifest_dump + "\n";
  }
  LSMCLAB_RETURN_IF_ERROR(write("metrics.csv", csv));
  LSMCLAB_RETURN_IF_ERROR(write("report.json", ReportJson(runs)));
  return write("manifest-dump.txt", dump);
}

const std::vector<std::string>& CompareMetrics() {
  static const std::vector<std::string> kMetrics = {"write_amp",        "read_amp",
                                                    "space_amp",        "write_latency_p100",
                                                    "tombstones_remaining", "compaction_bytes"};
  return kMetrics;
}

StatusOr<std::vector<CompareEntry>> LoadCompareEntries(const std::vector<std::string>& json_docs) {
  std::vector<CompareEntry> out;
  std::map<std::string, int> seen;
  for (size_t d = 0; d < json_docs.size(); ++d) {
    json doc = json::parse(json_docs[d], nullptr, false);
    if (doc.is_discarded() || !doc.contains("runs") || !doc["runs"].is_array()) {
      return Status::ParseError(StringPrintf("report %zu is not an lsmclab report", d + 1));
    }
    try {
      for (const auto& run : doc["runs"]) {
        CompareEntry e;
        e.label = run.at("strategy").get<std::string>();
        const auto& m = run.at("metrics");
        e.metrics["write_amp"] = m.at("write_amp").get<double>();
        e.metrics["read_amp"] = m.at("read_amp").get<double>();
        e.metrics["space_amp"] = m.at("space_amp").get<double>();
        e.metrics["write_latency_p100"] = m.at("write_latency").at("p100").get<double>();
        e.metrics["tombstones_remaining"] = m.at("tombstones_remaining").get<double>();
        e.metrics["compaction_bytes"] =
            m.at("bytes_compaction_read").get<double>() + m.at("bytes_compaction_written").get<double>();
        const std::string hex = run.at("workload_hash").get<std::string>();
        e.workload_hash = std::stoull(hex, nullptr, 16);
        if (int n = seen[e.label]++; n > 0) e.label += "#" + std::to_string(n + 1);
        out.push_back(std::move(e));
      }
    } catch (const std::exception& ex) {
      return Status::ParseError(StringPrintf("report %zu: %s", d + 1, ex.what()));
    }
  }
  return out;
}

StatusOr<CompareResult> Compare(const std::vector<CompareEntry>& entries) {
  if (entries.size() < 2) return Status::InvalidArgument("compare needs at least two runs");
  for (const auto& e : entries) {
    if (e.workload_hash != entries[0].workload_hash) {
      return Status::InvalidArgument("workload hash mismatch: " + entries[0].label + " has " +
                                     Hex(entries[0].workload_hash) + ", " + e.label + " has " +
                                     Hex(e.workload_hash));
    }
  }
  CompareResult res;
  for (const auto& metric : CompareMetrics()) {
    Ranking rk{metric, {}};
    std::vector<const CompareEntry*> order;
    for (const auto& e : entries) order.push_back(&e);
    std::stable_sort(order.begin(), order.end(), [&](auto* a, auto* b) {
      return a->metrics.at(metric) < b->metrics.at(metric);
    });
    std::string line = StringPrintf("%-22s", metric.c_str());
    for (size_t i = 0; i < order.size(); ++i) {
      int rank = static_cast<int>(i) + 1;
      if (i > 0 && order[i]->metrics.at(metric) == order[i - 1]->metrics.at(metric)) {
        rank = rk.rank[order[i - 1]->label];
      }
      rk.rank[order[i]->label] = rank;
      line += StringPrintf("  %d. %s (%.6g)", rank, order[i]->label.c_str(), order[i]->metrics.at(metric));
    }
    res.table += line + "\n";
    res.rankings.push_back(std::move(rk));
  }
  for (const auto& a : entries) {
    for (const auto& b : entries) {
      if (&a == &b) continue;
      bool all_le = true, any_lt = false;
      for (const auto& metric : CompareMetrics()) {
        const double x = b.metrics.at(metric), y = a.metrics.at(metric);
        all_le &= x <= y;
        any_lt |= x < y;
      }
      if (all_le && any_lt) {
        res.dominated.emplace(a.label, b.label);
        break;
      }
    }
  }
  if (res.dominated.empty()) {
    res.table += "dominated: none\n";
  } else {
    for (const auto& [loser, winner] : res.dominated) {
      res.table += "dominated: " + loser + " (by " + winner + ")\n";
    }
  }
  return res;
}

}  // namespace lsmclab
