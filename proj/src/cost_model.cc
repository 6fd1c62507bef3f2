#include "lsmclab/cost_model.h"

#include <algorithm>
#include <cmath>

#include "lsmclab/strutil.h"

namespace lsmclab::model {

int LevelCount(double N, double P, double B, int T) {
  const long double pb = static_cast<long double>(P) * B;
  if (N <= pb || T < 2) return 1;
  const long double x = static_cast<long double>(N) / pb * (T - 1) / T;
  // Smallest L with T^L >= x, without trusting log() at exact powers.
  int L = 0;
  long double pow = 1;
  while (pow < x * (1 - 1e-12L)) {
    pow *= T;
    ++L;
  }
  return L < 1 ? 1 : L;
}

int LeveledLevels(const DataLayout& layout, int L) {
  int l = 0;
  for (int i = 1; i <= L; ++i) l += layout.IsTiered(i, L) ? 0 : 1;
  return l;
}

double WriteAmpEstimate(int T, int L, int leveled_levels) {
  return static_cast<double>(L - leveled_levels) + static_cast<double>(T) * leveled_levels;
}

double WriteAmpEstimate(const DataLayout& layout, int T, int L) {
  return WriteAmpEstimate(T, L, LeveledLevels(layout, L));
}

double PointLookupCost(const DataLayout& layout, int T, int L, double bpk, bool existing) {
  double runs = 0;
  for (int i = 1; i <= L; ++i) runs += layout.IsTiered(i, L) ? T : 1;
  return (existing ? 1.0 : 0.0) + runs * std::exp(-bpk);
}

double RangeLookupCost(const DataLayout& layout, int T, int L, double N, double B, double s, bool short_range) {
  const int l = LeveledLevels(layout, L);
  const double runs = l + static_cast<double>(T) * (L - l);
  if (short_range) return runs;
  if (L <= 0) return 0;
  return runs / L * s * N / B;
}

double SpaceAmpEstimate(const DataLayout& layout, int T, double N, double lambda, bool with_deletes) {
  const bool tiered = layout.IsTiered(1 << 20, 1 << 20);
  if (!with_deletes) return tiered ? static_cast<double>(T) : 1.0 / T;
  if (tiered) return ((1 - lambda) * N + 1) / (lambda * T);
  return N / (1 - lambda);
}

double DeletePersistenceLatency(const DataLayout& layout, int T, int L, double P, double B, double I) {
  const bool tiered = layout.IsTiered(std::max(L, 1), std::max(L, 1));
  const int exponent = tiered ? L : L - 1;
  return std::pow(static_cast<double>(T), exponent) * P * B / I;
}

std::string FormatTable(const ModelParams& p) {
  const int L = LevelCount(p.N, p.P, p.B, p.T);
  DataLayout leveling{DataLayout::Kind::kLeveling, {}};
  DataLayout tiering{DataLayout::Kind::kTiering, {}};
  DataLayout one{DataLayout::Kind::kOneLeveling, {}};
  std::string out;
  out += StringPrintf("# estimates (unit constants)\n");
  out += StringPrintf("N=%.0f P=%.0f B=%.0f T=%d bpk=%.3f s=%.6f lambda=%.3f I=%.3f\n", p.N, p.P, p.B, p.T, p.bpk,
                      p.s, p.lambda, p.I);
  out += StringPrintf("levels=%d\n", L);
  out += StringPrintf("%-28s %14s %14s %14s\n", "metric", "leveling", "tiering", "1-leveling");
  auto row = [&](const char* name, double a, double b, double c) {
    out += StringPrintf("%-28s %14.6g %14.6g %14.6g\n", name, a, b, c);
  };
  row("write_amp", WriteAmpEstimate(leveling, p.T, L), WriteAmpEstimate(tiering, p.T, L),
      WriteAmpEstimate(one, p.T, L));
  row("point_lookup_existing", PointLookupCost(leveling, p.T, L, p.bpk, true),
      PointLookupCost(tiering, p.T, L, p.bpk, true), PointLookupCost(one, p.T, L, p.bpk, true));
  row("point_lookup_empty", PointLookupCost(leveling, p.T, L, p.bpk, false),
      PointLookupCost(tiering, p.T, L, p.bpk, false), PointLookupCost(one, p.T, L, p.bpk, false));
  row("range_lookup_long", RangeLookupCost(leveling, p.T, L, p.N, p.B, p.s, false),
      RangeLookupCost(tiering, p.T, L, p.N, p.B, p.s, false), RangeLookupCost(one, p.T, L, p.N, p.B, p.s, false));
  row("range_lookup_short", RangeLookupCost(leveling, p.T, L, p.N, p.B, p.s, true),
      RangeLookupCost(tiering, p.T, L, p.N, p.B, p.s, true), RangeLookupCost(one, p.T, L, p.N, p.B, p.s, true));
  row("space_amp", SpaceAmpEstimate(leveling, p.T, p.N, p.lambda, false),
      SpaceAmpEstimate(tiering, p.T, p.N, p.lambda, false), SpaceAmpEstimate(one, p.T, p.N, p.lambda, false));
  row("space_amp_with_deletes", SpaceAmpEstimate(leveling, p.T, p.N, p.lambda, true),
      SpaceAmpEstimate(tiering, p.T, p.N, p.lambda, true), SpaceAmpEstimate(one, p.T, p.N, p.lambda, true));
  row("delete_persistence_ticks", DeletePersistenceLatency(leveling, p.T, L, p.P, p.B, p.I),
      DeletePersistenceLatency(tiering, p.T, L, p.P, p.B, p.I), DeletePersistenceLatency(one, p.T, L, p.P, p.B, p.I));
  return out;
}

}  // namespace lsmclab::model
