#pragma once

// Threshold sweeps and spam-proportion tables. A sweep evaluates every
// valid cell (h1 <= h2) of a uniform threshold grid; a table evaluates a
// fixed list of threshold pairs across spam proportions. Cells aggregate
// per-seed runs into mean and sample standard deviation; aggregation sorts
// the run values first, so run order never changes the output and reports
// are byte-identical for identical specs.
//
// Modes:
//   Analytic   - closed-form expectations (one run per cell, stddev 0)
//   Empirical  - per-seed corpora, expected traffic and confusion given
//                the realized partition
//   MonteCarlo - per-seed corpora pushed through the delivery simulation

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hybridspam/classifier.hpp"
#include "hybridspam/corpus.hpp"
#include "hybridspam/simnet.hpp"
#include "hybridspam/traffic.hpp"

namespace hybridspam {

enum class Mode : std::uint8_t { Analytic, Empirical, MonteCarlo };

const char* to_string(Mode mode);

struct SweepSpec {
  MixtureParams base;  // spam_share is overridden per proportion
  double grid_step = 1.0 / 30.0;
  std::vector<double> proportions = {0.1, 0.2, 0.3, 0.4, 0.5,
                                     0.6, 0.7, 0.8, 0.9};
  double e1 = 0.02;
  double e2 = 0.01;
  std::vector<std::uint64_t> seeds;  // one run per seed
  Mode mode = Mode::Empirical;
  HopAccounting accounting = HopAccounting::PathCount;
  Protocol protocol = Protocol::P1;  // MonteCarlo only

  // Throws std::invalid_argument on bad rates, proportions, grid step, or
  // an empty seed list outside Analytic mode.
  void validate() const;
};

struct SweepCell {
  double proportion = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
  double ta_mean = 0.0;
  double ta_std = 0.0;
  double ratio_mean = 0.0;
  double ratio_std = 0.0;
  double acc_mean = 0.0;
  double acc_std = 0.0;
  std::uint32_t runs = 0;
};

struct RunStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1); 0 when count == 1
  std::uint32_t count = 0;
};

// Mean and sample standard deviation, order-independent. Throws
// std::domain_error on an empty input.
RunStats aggregate(std::vector<double> values);

// {0, step, 2*step, ..., 1}. Throws std::invalid_argument unless step
// divides 1 (within 1e-9) and lies in (0, 1].
std::vector<double> threshold_grid(double step);

// All valid grid cells for one proportion, ordered by (h1, h2).
std::vector<SweepCell> sweep_thresholds(const SweepSpec& spec,
                                        double proportion);

// One row per (proportion, pair), proportions outer, pairs in given order.
std::vector<SweepCell> spam_proportion_table(
    const SweepSpec& spec, const std::vector<ThresholdPair>& pairs);

// The four threshold pairs the published traffic table reports.
std::vector<ThresholdPair> default_table_pairs();

// CSV: proportion,h1,h2,ta_mean,ta_std,ratio_mean,ratio_std,acc_mean,
// acc_std,runs
void write_sweep_csv(const std::vector<SweepCell>& cells, std::ostream& out);

// JSON sidecar describing the spec that produced a report.
void write_sweep_sidecar(const SweepSpec& spec, std::ostream& out);

}  // namespace hybridspam
