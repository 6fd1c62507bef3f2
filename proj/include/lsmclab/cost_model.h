#pragma once

#include <string>

#include "lsmclab/strategy.h"

// Closed-form cost estimates. Every asymptotic term is evaluated with a unit
// constant, so results are estimates to compare and rank, not predictions of
// exact counts.
namespace lsmclab::model {

struct ModelParams {
  double N = 0;          // total entries
  double P = 512;        // pages per buffer
  double B = 128;        // entries per page
  int T = 10;            // size ratio
  double bpk = 10;       // bits per key
  double s = 0.001;      // range selectivity
  double lambda = 0.1;   // tombstone size / average entry size
  double I = 1;          // unique entries ingested per tick
};

// ceil(log_T(N / (P*B) * (T-1) / T)), at least 1. N <= P*B gives 1.
int LevelCount(double N, double P, double B, int T);

// Leveled levels among 1..L for a layout.
int LeveledLevels(const DataLayout& layout, int L);

// T*L for leveling, L for tiering, (L-l) + T*l with l leveled levels.
double WriteAmpEstimate(const DataLayout& layout, int T, int L);
double WriteAmpEstimate(int T, int L, int leveled_levels);

// Sum over levels of (runs probed) * e^-bpk, plus one page when the key exists.
double PointLookupCost(const DataLayout& layout, int T, int L, double bpk, bool existing);

// Long: s*N/B per leveled run and T*s*N/B for tiering. Short: one page per run.
double RangeLookupCost(const DataLayout& layout, int T, int L, double N, double B, double s, bool short_range);

// Without deletes: 1/T (leveling) or T (tiering). With deletes the expressions
// N/(1-lambda) and ((1-lambda)*N+1)/(lambda*T) are used as written; the first
// is not normalised and grows with N. The layout of the last level decides.
double SpaceAmpEstimate(const DataLayout& layout, int T, double N, double lambda, bool with_deletes);

// T^(L-1)*P*B/I for a leveled last level, T^L*P*B/I for a tiered one.
double DeletePersistenceLatency(const DataLayout& layout, int T, int L, double P, double B, double I);

// Formula table for the CLI.
std::string FormatTable(const ModelParams& p);

}  // namespace lsmclab::model
