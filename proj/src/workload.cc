#include "lsmclab/workload.h"

#include <algorithm>
#include <cmath>

#include "lsmclab/cost_model.h"
#include "lsmclab/entry.h"
#include "lsmclab/hash.h"
#include "lsmclab/strutil.h"

namespace lsmclab {

namespace {

const char* DistKindName(Distribution::Kind k) {
  switch (k) {
    case Distribution::Kind::kUniform: return "uniform";
    case Distribution::Kind::kNormal: return "normal";
    case Distribution::Kind::kZipfian: return "zipf";
    case Distribution::Kind::kPrefixZipf: return "prefix_zipf";
  }
  return "?";
}

uint64_t Pow10(int p) {
  uint64_t v = 1;
  for (int i = 0; i < p && v < UINT64_MAX / 10; ++i) v *= 10;
  return v;
}

}  // namespace

Status Distribution::Validate() const {
  if (kind == Kind::kNormal && !(stddev_pct > 0 && stddev_pct <= 100)) {
    return Status::InvalidArgument("normal stddev_pct must be in (0,100]");
  }
  if ((kind == Kind::kZipfian || kind == Kind::kPrefixZipf) && !(s > 0)) {
    return Status::InvalidArgument("zipf exponent must be > 0");
  }
  if (kind == Kind::kPrefixZipf && (prefix_bytes < 1 || prefix_bytes > 18)) {
    return Status::InvalidArgument("prefix_bytes must be in [1,18]");
  }
  return Status::OK();
}

std::string Distribution::ToString() const {
  switch (kind) {
    case Kind::kUniform: return "uniform";
    case Kind::kNormal: return StringPrintf("normal:%g", stddev_pct);
    case Kind::kZipfian: return StringPrintf("zipf:%g", s);
    case Kind::kPrefixZipf: return StringPrintf("prefix_zipf:%g:%d", s, prefix_bytes);
  }
  return DistKindName(kind);
}

StatusOr<Distribution> ParseDistribution(std::string_view text) {
  auto parts = Split(text, ':');
  if (parts.empty()) return Status::ParseError("empty distribution");
  Distribution d;
  auto num = [&](size_t i, double* out) -> Status {
    if (parts.size() <= i) return Status::OK();
    auto v = ParseDouble(parts[i]);
    if (!v) return Status::ParseError("bad number in distribution: " + std::string(text));
    *out = *v;
    return Status::OK();
  };
  const std::string_view name = parts[0];
  size_t max_parts = 1;
  if (name == "uniform") {
    d = Distribution::Uniform();
  } else if (name == "normal") {
    d = Distribution::Normal();
    LSMCLAB_RETURN_IF_ERROR(num(1, &d.stddev_pct));
    max_parts = 2;
  } else if (name == "zipf" || name == "zipfian") {
    d = Distribution::Zipfian();
    LSMCLAB_RETURN_IF_ERROR(num(1, &d.s));
    max_parts = 2;
  } else if (name == "prefix_zipf") {
    d = Distribution::PrefixZipf();
    LSMCLAB_RETURN_IF_ERROR(num(1, &d.s));
    if (parts.size() > 2) {
      auto p = ParseInt(parts[2]);
      if (!p) return Status::ParseError("bad prefix_bytes: " + std::string(text));
      d.prefix_bytes = static_cast<int>(*p);
    }
    max_parts = 3;
  } else {
    return Status::ParseError("unknown distribution: " + std::string(text));
  }
  if (parts.size() > max_parts) return Status::ParseError("too many fields in distribution: " + std::string(text));
  LSMCLAB_RETURN_IF_ERROR(d.Validate());
  return d;
}

uint64_t WorkloadSpec::unique_inserts() const {
  if (inserts == 0) return 0;
  const auto u = static_cast<uint64_t>(std::llround(static_cast<double>(inserts) / (1.0 + update_ratio)));
  return std::clamp<uint64_t>(u, 1, inserts);
}

uint64_t WorkloadSpec::deletes() const {
  return static_cast<uint64_t>(std::llround(delete_fraction * static_cast<double>(unique_inserts())));
}

uint64_t WorkloadSpec::empty_lookups() const {
  return static_cast<uint64_t>(std::llround(alpha * static_cast<double>(point_lookups)));
}

uint32_t WorkloadSpec::value_bytes() const {
  const uint64_t fixed = kEntryHeaderBytes + key_bytes;
  return entry_bytes > fixed ? static_cast<uint32_t>(entry_bytes - fixed) : 0;
}

Status WorkloadSpec::Validate() const {
  if (!(update_ratio >= 0) || !std::isfinite(update_ratio)) return Status::InvalidArgument("update_ratio must be >= 0");
  if (!(delete_fraction >= 0 && delete_fraction <= 1)) return Status::InvalidArgument("delete_fraction must be in [0,1]");
  if (!(alpha >= 0 && alpha <= 1)) return Status::InvalidArgument("alpha must be in [0,1]");
  if (!(selectivity > 0 && selectivity <= 1)) return Status::InvalidArgument("selectivity must be in (0,1]");
  if (key_bytes < 1 || key_bytes > 64) return Status::InvalidArgument("key_bytes must be in [1,64]");
  if (entry_bytes < key_bytes + kEntryHeaderBytes) {
    return Status::InvalidArgument("entry_bytes must be >= key_bytes + header");
  }
  LSMCLAB_RETURN_IF_ERROR(insert_dist.Validate());
  LSMCLAB_RETURN_IF_ERROR(lookup_dist.Validate());
  if (unique_inserts() > KeyDomain(key_bytes)) return Status::InvalidArgument("key_bytes too small for the insert count");
  return Status::OK();
}

std::string WorkloadSpec::ToString() const {
  return StringPrintf(
      "inserts=%llu update_ratio=%.17g delete_fraction=%.17g point_lookups=%llu alpha=%.17g range_lookups=%llu "
      "selectivity=%.17g entry_bytes=%u key_bytes=%u insert_dist=%s lookup_dist=%s interleaving=%s seed=%llu",
      static_cast<unsigned long long>(inserts), update_ratio, delete_fraction,
      static_cast<unsigned long long>(point_lookups), alpha, static_cast<unsigned long long>(range_lookups),
      selectivity, entry_bytes, key_bytes, insert_dist.ToString().c_str(), lookup_dist.ToString().c_str(),
      interleaving == Interleaving::kSerial ? "serial" : "interleaved", static_cast<unsigned long long>(seed));
}

uint64_t WorkloadSpec::Hash() const { return Hash64(ToString()); }

uint64_t UniformInt(std::mt19937_64& rng, uint64_t n) {
  if (n <= 1) return 0;
  // Rejection keeps the draw unbiased and the sequence portable.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

double Uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double StandardNormal(std::mt19937_64& rng) {
  double u1;
  do {
    u1 = Uniform01(rng);
  } while (u1 <= 0);
  const double u2 = Uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

namespace {

double Helper1(double x) {
  return std::abs(x) > 1e-8 ? std::log1p(x) / x : 1 - x * (0.5 - x * (1.0 / 3 - 0.25 * x));
}
double Helper2(double x) {
  return std::abs(x) > 1e-8 ? std::expm1(x) / x : 1 + x * 0.5 * (1 + x / 3 * (1 + 0.25 * x));
}

}  // namespace

IndexSampler::IndexSampler(const Distribution& d, uint64_t n) : d_(d), n_(n == 0 ? 1 : n) {
  if (d_.kind == Distribution::Kind::kZipfian) {
    zipf_n_ = n_;
  } else if (d_.kind == Distribution::Kind::kPrefixZipf) {
    zipf_n_ = std::min<uint64_t>(Pow10(d_.prefix_bytes), n_);
    bucket_width_ = n_ / zipf_n_;
  }
  if (zipf_n_ > 0) {
    h_x1_ = H(1.5) - 1;
    h_n_ = H(static_cast<double>(zipf_n_) + 0.5);
    s_val_ = 2 - HInverse(H(2.5) - h(2));
  }
}

double IndexSampler::h(double x) const { return std::exp(-d_.s * std::log(x)); }

// Integral of h, (x^(1-s) - 1) / (1-s), continuous through s = 1.
double IndexSampler::H(double x) const {
  const double lx = std::log(x);
  return Helper2((1 - d_.s) * lx) * lx;
}

double IndexSampler::HInverse(double x) const {
  double t = x * (1 - d_.s);
  if (t < -1) t = -1;
  return std::exp(Helper1(t) * x);
}

// Rejection-inversion (Hormann and Derflinger); returns a rank in [1, zipf_n_].
uint64_t IndexSampler::SampleZipf(std::mt19937_64& rng) {
  for (;;) {
    const double u = h_n_ + Uniform01(rng) * (h_x1_ - h_n_);
    const double x = HInverse(u);
    double kd = std::floor(x + 0.5);
    if (kd < 1) kd = 1;
    if (kd > static_cast<double>(zipf_n_)) kd = static_cast<double>(zipf_n_);
    const auto k = static_cast<uint64_t>(kd);
    if (kd - x <= s_val_ || u >= H(kd + 0.5) - h(kd)) return k;
  }
}

uint64_t IndexSampler::Sample(std::mt19937_64& rng) {
  switch (d_.kind) {
    case Distribution::Kind::kUniform:
      return UniformInt(rng, n_);
    case Distribution::Kind::kNormal: {
      const double mean = static_cast<double>(n_) / 2;
      const double sd = d_.stddev_pct / 100.0 * static_cast<double>(n_);
      for (;;) {
        const double x = std::floor(mean + sd * StandardNormal(rng));
        if (x >= 0 && x < static_cast<double>(n_)) return static_cast<uint64_t>(x);
      }
    }
    case Distribution::Kind::kZipfian:
      return SampleZipf(rng) - 1;
    case Distribution::Kind::kPrefixZipf: {
      const uint64_t bucket = SampleZipf(rng) - 1;
      const uint64_t idx = bucket * bucket_width_ + UniformInt(rng, bucket_width_);
      return std::min(idx, n_ - 1);
    }
  }
  return 0;
}

std::string EncodeKey(uint64_t v, uint32_t key_bytes) {
  std::string digits = std::to_string(v);
  if (digits.size() >= key_bytes) return digits;
  return std::string(key_bytes - digits.size(), '0') + digits;
}

uint64_t KeyDomain(uint32_t key_bytes) {
  if (key_bytes >= 19) return uint64_t{1} << 62;
  return Pow10(static_cast<int>(key_bytes)) / 2;
}

WorkloadGenerator::WorkloadGenerator(WorkloadSpec spec, uint64_t lookup_start)
    : spec_(std::move(spec)),
      rng_(spec_.seed),
      insert_sampler_(spec_.insert_dist, KeyDomain(spec_.key_bytes)),
      domain_(KeyDomain(spec_.key_bytes)) {
  status_ = spec_.Validate();
  left_inserts_ = spec_.unique_inserts();
  left_updates_ = spec_.updates();
  left_deletes_ = spec_.deletes();
  left_empty_ = spec_.empty_lookups();
  left_nonempty_ = spec_.point_lookups - left_empty_;
  left_ranges_ = spec_.range_lookups;
  const uint64_t ingest_total = left_inserts_ + left_updates_ + left_deletes_;
  lookup_start_ = spec_.interleaving == Interleaving::kSerial ? ingest_total : std::min(lookup_start, ingest_total);
}

bool WorkloadGenerator::Fail(Status s) {
  status_ = std::move(s);
  return false;
}

std::string WorkloadGenerator::MakeValue() {
  const uint32_t n = spec_.value_bytes();
  std::string v = StringPrintf("%016llx", static_cast<unsigned long long>(rng_()));
  v.resize(n, '.');
  return v;
}

uint64_t WorkloadGenerator::DrawFreshKey() {
  uint64_t u = insert_sampler_.Sample(rng_);
  for (int tries = 0; tries < 8 && used_.count(u); ++tries) u = insert_sampler_.Sample(rng_);
  while (used_.count(u)) u = (u + 1) % domain_;
  return u;
}

bool WorkloadGenerator::NextIngest(Operation* op) {
  const uint64_t total = left_inserts_ + left_updates_ + left_deletes_;
  uint64_t r = UniformInt(rng_, total);
  Operation::Type type;
  if (r < left_inserts_) {
    type = Operation::Type::kInsert;
  } else if (r < left_inserts_ + left_updates_) {
    type = Operation::Type::kUpdate;
  } else {
    type = Operation::Type::kDelete;
  }
  if (type != Operation::Type::kInsert && live_.empty()) {
    if (left_inserts_ == 0) {
      return Fail(Status::InvalidArgument("spec asks for an update or delete with no live key left"));
    }
    type = Operation::Type::kInsert;
  }
  op->type = type;
  if (type == Operation::Type::kInsert) {
    const uint64_t u = DrawFreshKey();
    used_.insert(u);
    min_used_ = std::min(min_used_, u);
    max_used_ = std::max(max_used_, u);
    live_pos_[u] = live_.size();
    live_.push_back(u);
    op->key = EncodeKey(2 * u, spec_.key_bytes);
    op->arg = MakeValue();
    --left_inserts_;
  } else {
    IndexSampler pick(spec_.insert_dist, live_.size());
    const size_t idx = pick.Sample(rng_);
    const uint64_t u = live_[idx];
    op->key = EncodeKey(2 * u, spec_.key_bytes);
    if (type == Operation::Type::kUpdate) {
      op->arg = MakeValue();
      --left_updates_;
    } else {
      op->arg.clear();
      live_pos_.erase(u);
      if (idx + 1 != live_.size()) {
        live_[idx] = live_.back();
        live_pos_[live_[idx]] = idx;
      }
      live_.pop_back();
      --left_deletes_;
    }
  }
  ++ingest_done_;
  return true;
}

bool WorkloadGenerator::NextLookup(Operation* op) {
  const uint64_t total = left_empty_ + left_nonempty_ + left_ranges_;
  const uint64_t r = UniformInt(rng_, total);
  if (r < left_empty_) {
    IndexSampler pick(spec_.lookup_dist, domain_);
    op->type = Operation::Type::kPointLookup;
    op->key = EncodeKey(2 * pick.Sample(rng_) + 1, spec_.key_bytes);
    op->arg.clear();
    --left_empty_;
  } else if (r < left_empty_ + left_nonempty_) {
    if (live_.empty()) return Fail(Status::InvalidArgument("spec asks for a non-empty lookup with no live key"));
    IndexSampler pick(spec_.lookup_dist, live_.size());
    op->type = Operation::Type::kPointLookup;
    op->key = EncodeKey(2 * live_[pick.Sample(rng_)], spec_.key_bytes);
    op->arg.clear();
    --left_nonempty_;
  } else {
    // The range covers a `selectivity` share of the span of inserted keys.
    const uint64_t lo_bound = used_.empty() ? 0 : min_used_;
    const uint64_t span = used_.empty() ? 1 : max_used_ - min_used_ + 1;
    const uint64_t width = std::clamp<uint64_t>(
        static_cast<uint64_t>(std::ceil(spec_.selectivity * static_cast<double>(span))), 1, span);
    const uint64_t lo = lo_bound + UniformInt(rng_, span - width + 1);
    op->type = Operation::Type::kRangeLookup;
    op->key = EncodeKey(2 * lo, spec_.key_bytes);
    op->arg = EncodeKey(2 * (lo + width) - 1, spec_.key_bytes);
    --left_ranges_;
  }
  return true;
}

bool WorkloadGenerator::Next(Operation* op) {
  if (!status_.ok()) return false;
  const uint64_t ingest_left = left_inserts_ + left_updates_ + left_deletes_;
  const uint64_t lookups_left = left_empty_ + left_nonempty_ + left_ranges_;
  if (ingest_left + lookups_left == 0) return false;
  bool ingest;
  if (ingest_done_ < lookup_start_ || lookups_left == 0) {
    ingest = ingest_left > 0;
  } else if (ingest_left == 0) {
    ingest = false;
  } else {
    // Past the start point lookups are spread uniformly over what remains.
    ingest = UniformInt(rng_, ingest_left + lookups_left) < ingest_left;
  }
  const bool ok = ingest ? NextIngest(op) : NextLookup(op);
  if (ok) ++emitted_;
  return ok;
}

StatusOr<std::vector<Operation>> GenerateWorkload(const WorkloadSpec& spec, uint64_t lookup_start) {
  WorkloadGenerator gen(spec, lookup_start);
  std::vector<Operation> ops;
  Operation op;
  while (gen.Next(&op)) ops.push_back(op);
  if (!gen.status().ok()) return gen.status();
  return ops;
}

uint64_t InterleavedLookupStart(const WorkloadSpec& spec, uint64_t entries_per_buffer, int size_ratio) {
  const int L = model::LevelCount(static_cast<double>(spec.unique_inserts()), 1.0,
                                  static_cast<double>(entries_per_buffer), size_ratio);
  uint64_t total = 0;
  uint64_t level_entries = entries_per_buffer;
  for (int i = 1; i <= L - 1; ++i) {
    level_entries *= static_cast<uint64_t>(size_ratio);
    total += level_entries;
  }
  return total;
}

std::string FormatOperation(const Operation& op) {
  switch (op.type) {
    case Operation::Type::kInsert: return op.arg.empty() ? "I " + op.key : "I " + op.key + " " + op.arg;
    case Operation::Type::kUpdate: return op.arg.empty() ? "U " + op.key : "U " + op.key + " " + op.arg;
    case Operation::Type::kDelete: return "D " + op.key;
    case Operation::Type::kPointLookup: return "P " + op.key;
    case Operation::Type::kRangeLookup: return "S " + op.key + " " + op.arg;
  }
  return "";
}

StatusOr<Operation> ParseOperation(std::string_view line) {
  std::vector<std::string_view> tok;
  size_t pos = 0;
  while (pos <= line.size()) {
    const size_t sp = line.find(' ', pos);
    const size_t end = sp == std::string_view::npos ? line.size() : sp;
    tok.push_back(line.substr(pos, end - pos));
    if (sp == std::string_view::npos) break;
    pos = sp + 1;
  }
  if (tok.size() < 2 || tok[0].size() != 1 || tok[1].empty()) return Status::ParseError("malformed operation");
  Operation op;
  op.key = std::string(tok[1]);
  const char c = tok[0][0];
  size_t want_min = 2, want_max = 2;
  switch (c) {
    case 'I': op.type = Operation::Type::kInsert; want_max = 3; break;
    case 'U': op.type = Operation::Type::kUpdate; want_max = 3; break;
    case 'D': op.type = Operation::Type::kDelete; break;
    case 'P': op.type = Operation::Type::kPointLookup; break;
    case 'S': op.type = Operation::Type::kRangeLookup; want_min = want_max = 3; break;
    default: return Status::ParseError(std::string("unknown operation '") + c + "'");
  }
  if (tok.size() < want_min || tok.size() > want_max) return Status::ParseError("wrong field count");
  if (tok.size() == 3) {
    if (c == 'S' && tok[2].empty()) return Status::ParseError("empty range bound");
    op.arg = std::string(tok[2]);
  }
  return op;
}

void WorkloadWriter::Comment(std::string_view text) { *out_ << "# " << text << '\n'; }

void WorkloadWriter::Write(const Operation& op) { *out_ << FormatOperation(op) << '\n'; }

Status WorkloadReader::Next(Operation* op, bool* done) {
  while (std::getline(*in_, line_)) {
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    if (line_.empty() || line_[0] == '#') continue;
    auto parsed = ParseOperation(line_);
    if (!parsed.ok()) {
      return Status::ParseError(StringPrintf("line %llu: %s", static_cast<unsigned long long>(line_no_),
                                             parsed.status().message().c_str()));
    }
    *op = std::move(parsed).value();
    *done = false;
    return Status::OK();
  }
  if (in_->bad()) return Status::IOError("read error");
  *done = true;
  return Status::OK();
}

}  // namespace lsmclab
