// lsmclab: run, compare, model, gen.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lsmclab/cost_model.h"
#include "lsmclab/experiment.h"
#include "lsmclab/strutil.h"
#include "lsmclab/workload.h"

namespace {

using lsmclab::Status;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

int ExitFor(const Status& s) {
  if (s.ok()) return kExitOk;
  std::cerr << "lsmclab: " << s.ToString() << "\n";
  if (s.IsInvariantViolation()) return kExitInvariant;
  if (s.IsInvalidArgument() || s.IsParseError()) return kExitConfig;
  return kExitRuntime;
}

struct CommonFlags {
  std::string config;
  std::string strategy;
  std::optional<uint64_t> seed;
  std::string out;
  bool wall_clock = false;
  bool parallel = false;
  bool verify = false;
};

lsmclab::StatusOr<lsmclab::ExperimentConfig> BuildConfig(const CommonFlags& f) {
  lsmclab::ExperimentConfig cfg;
  if (!f.config.empty()) {
    auto loaded = lsmclab::LoadConfigFile(f.config);
    if (!loaded.ok()) return loaded.status();
    cfg = std::move(loaded).value();
  }
  if (!f.strategy.empty()) {
    cfg.strategies.clear();
    cfg.strategy_settings.clear();
    for (auto name : lsmclab::Split(f.strategy, ',')) cfg.strategies.emplace_back(name);
  }
  if (f.seed) cfg.workload.seed = *f.seed;
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (const char* env = std::getenv("LSMCLAB_OUT"); env && *env) cfg.output_dir = env;
  if (f.wall_clock) cfg.tree.wall_clock = true;
  if (f.parallel) cfg.parallel = true;
  if (f.verify) cfg.verify = true;
  return cfg;
}

int CmdRun(const CommonFlags& f) {
  auto cfg = BuildConfig(f);
  if (!cfg.ok()) return ExitFor(cfg.status());
  auto runs = lsmclab::RunGrid(*cfg);
  if (!runs.ok()) return ExitFor(runs.status());
  Status s = lsmclab::WriteOutputs(cfg->output_dir, *runs);
  if (!s.ok()) return ExitFor(s);
  std::cout << lsmclab::CsvHeader();
  for (const auto& r : *runs) std::cout << lsmclab::CsvRow(r);
  std::cerr << "wrote " << cfg->output_dir << "/{metrics.csv,report.json,manifest-dump.txt}\n";
  return kExitOk;
}

int CmdCompare(const std::vector<std::string>& paths) {
  std::vector<std::string> docs;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) return ExitFor(Status::InvalidArgument("cannot open " + p));
    std::stringstream ss;
    ss << in.rdbuf();
    docs.push_back(ss.str());
  }
  auto entries = lsmclab::LoadCompareEntries(docs);
  if (!entries.ok()) return ExitFor(entries.status());
  auto res = lsmclab::Compare(*entries);
  if (!res.ok()) return ExitFor(res.status());
  std::cout << res->table;
  return kExitOk;
}

int CmdGen(const CommonFlags& f, const std::string& output) {
  auto cfg = BuildConfig(f);
  if (!cfg.ok()) return ExitFor(cfg.status());
  if (!cfg->workload_file.empty()) return ExitFor(Status::InvalidArgument("gen needs a generated workload, not a file"));
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!output.empty() && output != "-") {
    file.open(output, std::ios::trunc);
    if (!file) return ExitFor(Status::IOError("cannot open " + output));
    out = &file;
  }
  const auto& spec = cfg->workload;
  lsmclab::WorkloadWriter writer(out);
  writer.Comment(spec.ToString());
  lsmclab::WorkloadGenerator gen(
      spec, lsmclab::InterleavedLookupStart(spec, cfg->tree.entries_per_buffer(), cfg->tree.size_ratio));
  lsmclab::Operation op;
  while (gen.Next(&op)) writer.Write(op);
  if (!gen.status().ok()) return ExitFor(gen.status());
  out->flush();
  if (!*out) return ExitFor(Status::IOError("write failed"));
  return kExitOk;
}

int CmdModel(const CommonFlags& f, lsmclab::model::ModelParams p, bool have_n) {
  if (!f.config.empty()) {
    auto cfg = BuildConfig(f);
    if (!cfg.ok()) return ExitFor(cfg.status());
    p.T = cfg->tree.size_ratio;
    p.P = static_cast<double>(cfg->tree.pages_per_buffer());
    p.B = static_cast<double>(cfg->tree.entries_per_page());
    p.bpk = cfg->tree.bits_per_key;
    p.s = cfg->workload.selectivity;
    if (!have_n) p.N = static_cast<double>(cfg->workload.unique_inserts());
  }
  if (p.T < 2 || p.P <= 0 || p.B <= 0) return ExitFor(Status::InvalidArgument("need T >= 2, P > 0, B > 0"));
  std::cout << lsmclab::model::FormatTable(p);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lsmclab: LSM compaction design-space lab"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "ini config file");
    sub->add_option("--strategy", flags.strategy, "preset name or comma-separated grid");
    sub->add_option("--seed", flags.seed, "workload seed");
    sub->add_option("--out", flags.out, "output directory (LSMCLAB_OUT overrides)");
    sub->add_flag("--wall-clock", flags.wall_clock, "latencies in microseconds instead of page I/Os");
  };

  auto* run = app.add_subcommand("run", "run a workload against every strategy of the grid");
  add_common(run);
  run->add_flag("--parallel", flags.parallel, "run repetitions on separate threads");
  run->add_flag("--verify", flags.verify, "check every result against an in-memory oracle");

  std::vector<std::string> reports;
  auto* compare = app.add_subcommand("compare", "rank strategies across report.json files");
  compare->add_option("reports", reports, "report.json files")->required()->check(CLI::ExistingFile);

  lsmclab::model::ModelParams params;
  auto* model = app.add_subcommand("model", "print closed-form cost estimates");
  model->add_option("--config", flags.config, "ini config file");
  auto* n_opt = model->add_option("--entries", params.N, "total entries N");
  model->add_option("--pages-per-buffer", params.P, "P");
  model->add_option("--entries-per-page", params.B, "B");
  model->add_option("--size-ratio", params.T, "T");
  model->add_option("--bits-per-key", params.bpk, "bloom bits per key");
  model->add_option("--selectivity", params.s, "range selectivity");
  model->add_option("--lambda", params.lambda, "tombstone size / entry size");
  model->add_option("--ingest-rate", params.I, "unique entries per tick");

  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "write the configured workload to a file");
  add_common(gen);
  gen->add_option("-o,--output", gen_out, "workload file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  if (*run) return CmdRun(flags);
  if (*compare) return CmdCompare(reports);
  if (*model) return CmdModel(flags, params, n_opt->count() > 0);
  if (*gen) return CmdGen(flags, gen_out);
  return kExitConfig;
}
