#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lsmclab/status.h"

namespace lsmclab {

struct Distribution {
  enum class Kind { kUniform, kNormal, kZipfian, kPrefixZipf };
  Kind kind = Kind::kUniform;
  double stddev_pct = 34;  // kNormal
  double s = 1.0;          // kZipfian, kPrefixZipf
  int prefix_bytes = 2;    // kPrefixZipf: leading decimal digits

  static Distribution Uniform() { return {}; }
  static Distribution Normal(double pct = 34) { return {Kind::kNormal, pct, 1.0, 2}; }
  static Distribution Zipfian(double s = 1.0) { return {Kind::kZipfian, 34, s, 2}; }
  static Distribution PrefixZipf(double s = 1.0, int prefix = 2) { return {Kind::kPrefixZipf, 34, s, prefix}; }

  Status Validate() const;
  // "uniform", "normal:34", "zipf:1.0", "prefix_zipf:1.0:2".
  std::string ToString() const;
};

StatusOr<Distribution> ParseDistribution(std::string_view text);

enum class Interleaving { kSerial, kInterleaved };

struct WorkloadSpec {
  // Ingestion operations (unique inserts plus updates). Updates replace
  // inserts, so raising update_ratio keeps the ingested volume fixed.
  uint64_t inserts = 0;
  double update_ratio = 0;
  double delete_fraction = 0;
  uint64_t point_lookups = 0;
  double alpha = 0;
  uint64_t range_lookups = 0;
  double selectivity = 0.001;
  uint32_t entry_bytes = 128;
  uint32_t key_bytes = 16;
  Distribution insert_dist;
  Distribution lookup_dist;
  Interleaving interleaving = Interleaving::kSerial;
  uint64_t seed = 1;

  uint64_t unique_inserts() const;
  uint64_t updates() const { return inserts - unique_inserts(); }
  uint64_t deletes() const;
  uint64_t empty_lookups() const;
  uint32_t value_bytes() const;

  Status Validate() const;
  // Canonical one-line form; equal specs give equal strings.
  std::string ToString() const;
  uint64_t Hash() const;
};

struct Operation {
  enum class Type : uint8_t { kInsert, kUpdate, kDelete, kPointLookup, kRangeLookup };
  Type type = Type::kInsert;
  std::string key;
  // Value for inserts and updates, upper bound for range lookups.
  std::string arg;

  friend bool operator==(const Operation&, const Operation&) = default;
};

// Draws indices in [0, n) following a Distribution. Rank r of a Zipfian maps
// to index r-1.
class IndexSampler {
 public:
  IndexSampler(const Distribution& d, uint64_t n);
  uint64_t Sample(std::mt19937_64& rng);
  uint64_t n() const { return n_; }

 private:
  Distribution d_;
  uint64_t n_;
  // Zipf rejection-inversion state over [1, zipf_n_].
  uint64_t zipf_n_ = 0;
  double h_x1_ = 0, h_n_ = 0, s_val_ = 0;
  uint64_t bucket_width_ = 1;

  uint64_t SampleZipf(std::mt19937_64& rng);
  double H(double x) const;
  double HInverse(double x) const;
  double h(double x) const;
};

uint64_t UniformInt(std::mt19937_64& rng, uint64_t n);  // [0, n)
double Uniform01(std::mt19937_64& rng);                  // [0, 1)
double StandardNormal(std::mt19937_64& rng);

// Fixed-width zero-padded decimal, so byte order equals numeric order.
std::string EncodeKey(uint64_t v, uint32_t key_bytes);
// Size of the integer domain used for inserted keys (even integers); odd
// integers are reserved for empty lookups.
uint64_t KeyDomain(uint32_t key_bytes);

// Streams the operations of a spec one at a time. Memory is proportional to
// the number of distinct keys, not the number of operations.
class WorkloadGenerator {
 public:
  // lookup_start: ingestion operations issued before the first lookup when
  // interleaving. Ignored for serial specs.
  explicit WorkloadGenerator(WorkloadSpec spec, uint64_t lookup_start = 0);

  // False once the stream is exhausted or an error occurred.
  bool Next(Operation* op);
  const Status& status() const { return status_; }
  uint64_t emitted() const { return emitted_; }

  const WorkloadSpec& spec() const { return spec_; }

 private:
  bool NextIngest(Operation* op);
  bool NextLookup(Operation* op);
  std::string MakeValue();
  uint64_t DrawFreshKey();
  bool Fail(Status s);

  WorkloadSpec spec_;
  std::mt19937_64 rng_;
  IndexSampler insert_sampler_;
  uint64_t domain_;
  uint64_t lookup_start_;

  uint64_t left_inserts_, left_updates_, left_deletes_;
  uint64_t left_empty_, left_nonempty_, left_ranges_;
  uint64_t ingest_done_ = 0;
  uint64_t emitted_ = 0;

  std::vector<uint64_t> live_;
  std::unordered_map<uint64_t, size_t> live_pos_;
  std::unordered_set<uint64_t> used_;
  uint64_t min_used_ = UINT64_MAX, max_used_ = 0;
  Status status_;
};

// Whole stream in memory; for tests and small workloads.
StatusOr<std::vector<Operation>> GenerateWorkload(const WorkloadSpec& spec, uint64_t lookup_start = 0);

// Ingestion operations issued before lookups start under interleaving: the
// capacity of levels 1..L-1 in entries, L from the level-count estimate.
uint64_t InterleavedLookupStart(const WorkloadSpec& spec, uint64_t entries_per_buffer, int size_ratio);

// "I k v", "U k v", "D k", "P k", "S lo hi".
std::string FormatOperation(const Operation& op);
StatusOr<Operation> ParseOperation(std::string_view line);

class WorkloadWriter {
 public:
  explicit WorkloadWriter(std::ostream* out) : out_(out) {}
  void Comment(std::string_view text);
  void Write(const Operation& op);

 private:
  std::ostream* out_;
};

// Reads one line at a time; blank lines and '#' comments are skipped.
class WorkloadReader {
 public:
  explicit WorkloadReader(std::istream* in) : in_(in) {}
  // OK with *done=false and *op filled, OK with *done=true at end of input,
  // or a ParseError naming the line.
  Status Next(Operation* op, bool* done);
  uint64_t line_number() const { return line_no_; }

 private:
  std::istream* in_;
  std::string line_;
  uint64_t line_no_ = 0;
};

}  // namespace lsmclab
