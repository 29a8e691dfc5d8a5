#include "hybridspam/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace hybridspam {
namespace {

// Sorted per-class scores: every grid cell's region counts come from two
// binary searches instead of a corpus scan. Agrees with partition_corpus
// by construction (same inclusive boundaries); property-tested.
struct PartitionIndex {
  std::vector<double> normal_scores;
  std::vector<double> spam_scores;

  explicit PartitionIndex(const Corpus& corpus) {
    for (const Message& m : corpus.messages)
      (m.truth == ClassLabel::Normal ? normal_scores : spam_scores)
          .push_back(m.kappa);
    std::sort(normal_scores.begin(), normal_scores.end());
    std::sort(spam_scores.begin(), spam_scores.end());
  }

  static std::uint64_t below(const std::vector<double>& xs, double h) {
    return static_cast<std::uint64_t>(
        std::lower_bound(xs.begin(), xs.end(), h) - xs.begin());
  }

  RegionCounts counts(const ThresholdPair& t) const {
    RegionCounts rc;
    const std::uint64_t n1 = below(normal_scores, t.h1);
    const std::uint64_t n2 = below(normal_scores, t.h2);
    const std::uint64_t s1 = below(spam_scores, t.h1);
    const std::uint64_t s2 = below(spam_scores, t.h2);
    rc.at(ClassLabel::Normal, Region::Spam) = n1;
    rc.at(ClassLabel::Normal, Region::Uncertain) = n2 - n1;
    rc.at(ClassLabel::Normal, Region::Normal) = normal_scores.size() - n2;
    rc.at(ClassLabel::Spam, Region::Spam) = s1;
    rc.at(ClassLabel::Spam, Region::Uncertain) = s2 - s1;
    rc.at(ClassLabel::Spam, Region::Normal) = spam_scores.size() - s2;
    return rc;
  }

  double filtering_only(double h) const {
    const std::uint64_t total = normal_scores.size() + spam_scores.size();
    const std::uint64_t kept = (normal_scores.size() - below(normal_scores, h)) +
                               (spam_scores.size() - below(spam_scores, h));
    return 2.0 * static_cast<double>(kept) +
           1.0 * static_cast<double>(total - kept);
  }
};

struct CellMetrics {
  double ta = 0.0;
  double ratio = 0.0;
  double acc = 0.0;
};

CellMetrics metrics_from_counts(const PartitionIndex& index,
                                const ThresholdPair& t, const SweepSpec& spec) {
  const RegionCounts counts = index.counts(t);
  CellMetrics m;
  m.ta = traffic_hybrid_expected(counts, spec.e1, spec.e2, spec.accounting)
             .hybrid_total;
  m.ratio = m.ta / index.filtering_only(t.h1);
  m.acc = accuracy(expected_confusion_hybrid(counts, spec.e1, spec.e2));
  return m;
}

MixtureParams params_for(const SweepSpec& spec, double proportion) {
  MixtureParams params = spec.base;
  params.spam_share = proportion;
  return params;
}

SweepCell finish_cell(double proportion, const ThresholdPair& t,
                      std::vector<double> tas, std::vector<double> ratios,
                      std::vector<double> accs) {
  SweepCell cell;
  cell.proportion = proportion;
  cell.h1 = t.h1;
  cell.h2 = t.h2;
  const RunStats ta = aggregate(std::move(tas));
  const RunStats ratio = aggregate(std::move(ratios));
  const RunStats acc = aggregate(std::move(accs));
  cell.ta_mean = ta.mean;
  cell.ta_std = ta.stddev;
  cell.ratio_mean = ratio.mean;
  cell.ratio_std = ratio.stddev;
  cell.acc_mean = acc.mean;
  cell.acc_std = acc.stddev;
  cell.runs = ta.count;
  return cell;
}

// Evaluates all requested cells for one proportion. Corpora are generated
// once per seed and shared by every cell.
std::vector<SweepCell> evaluate_cells(const SweepSpec& spec, double proportion,
                                      const std::vector<ThresholdPair>& cells) {
  const MixtureParams params = params_for(spec, proportion);

  if (spec.mode == Mode::Analytic) {
    std::vector<SweepCell> out;
    out.reserve(cells.size());
    for (const ThresholdPair& t : cells) {
      const RegionMasses masses = analytic_region_masses(params, t);
      CellMetrics m;
      m.ta = traffic_hybrid_expected(masses, spec.e1, spec.e2, spec.accounting)
                 .hybrid_total;
      m.ratio = m.ta / analytic_filtering_only(params, t.h1);
      m.acc = accuracy(expected_confusion_hybrid(masses, spec.e1, spec.e2));
      out.push_back(finish_cell(proportion, t, {m.ta}, {m.ratio}, {m.acc}));
    }
    return out;
  }

  std::vector<std::vector<double>> tas(cells.size()), ratios(cells.size()),
      accs(cells.size());
  for (std::uint64_t seed : spec.seeds) {
    const Corpus corpus = generate_corpus(params, seed);
    if (spec.mode == Mode::Empirical) {
      const PartitionIndex index(corpus);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const CellMetrics m = metrics_from_counts(index, cells[i], spec);
        tas[i].push_back(m.ta);
        ratios[i].push_back(m.ratio);
        accs[i].push_back(m.acc);
      }
    } else {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        SimPolicy policy{cells[i], spec.e1, spec.e2, spec.protocol, seed};
        const SimReport report = run_corpus(corpus, policy);
        const double ta = static_cast<double>(report.total_hops);
        tas[i].push_back(ta);
        ratios[i].push_back(ta / traffic_filtering_only(corpus, cells[i].h1));
        accs[i].push_back(accuracy(report.confusion));
      }
    }
  }

  std::vector<SweepCell> out;
  out.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    out.push_back(finish_cell(proportion, cells[i], std::move(tas[i]),
                              std::move(ratios[i]), std::move(accs[i])));
  return out;
}

}  // namespace

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Analytic: return "analytic";
    case Mode::Empirical: return "empirical";
    case Mode::MonteCarlo: return "montecarlo";
  }
  return "?";
}

void SweepSpec::validate() const {
  MixtureParams check = base;
  check.spam_share = 0.0;
  check.validate();
  if (!(e1 >= 0.0 && e1 <= 1.0) || !(e2 >= 0.0 && e2 <= 1.0))
    throw std::invalid_argument("error rates must lie in [0, 1]");
  threshold_grid(grid_step);
  if (proportions.empty())
    throw std::invalid_argument("at least one spam proportion is required");
  for (double p : proportions)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("spam proportions must lie in [0, 1]");
  if (mode != Mode::Analytic && seeds.empty())
    throw std::invalid_argument("empirical modes need at least one seed");
}

RunStats aggregate(std::vector<double> values) {
  if (values.empty())
    throw std::domain_error("aggregate of an empty run list");
  std::sort(values.begin(), values.end());
  RunStats stats;
  stats.count = static_cast<std::uint32_t>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return stats;
}

std::vector<double> threshold_grid(double step) {
  if (!(step > 0.0 && step <= 1.0))
    throw std::invalid_argument("grid step must lie in (0, 1]");
  const double divisions = 1.0 / step;
  const long long t = std::llround(divisions);
  if (t < 1 || std::fabs(static_cast<double>(t) * step - 1.0) > 1e-9)
    throw std::invalid_argument("grid step must divide 1");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(t) + 1);
  for (long long i = 0; i < t; ++i)
    grid.push_back(static_cast<double>(i) * step);
  grid.push_back(1.0);
  return grid;
}

std::vector<SweepCell> sweep_thresholds(const SweepSpec& spec,
                                        double proportion) {
  spec.validate();
  if (!(proportion >= 0.0 && proportion <= 1.0))
    throw std::invalid_argument("spam proportions must lie in [0, 1]");
  const std::vector<double> grid = threshold_grid(spec.grid_step);
  std::vector<ThresholdPair> cells;
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i; j < grid.size(); ++j)
      cells.push_back(ThresholdPair{grid[i], grid[j]});
  return evaluate_cells(spec, proportion, cells);
}

std::vector<SweepCell> spam_proportion_table(
    const SweepSpec& spec, const std::vector<ThresholdPair>& pairs) {
  spec.validate();
  if (pairs.empty())
    throw std::invalid_argument("at least one threshold pair is required");
  for (const ThresholdPair& t : pairs) ThresholdPair::checked(t.h1, t.h2);
  std::vector<SweepCell> out;
  out.reserve(spec.proportions.size() * pairs.size());
  for (double proportion : spec.proportions) {
    std::vector<SweepCell> rows = evaluate_cells(spec, proportion, pairs);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

std::vector<ThresholdPair> default_table_pairs() {
  return {ThresholdPair{0.1, 0.2}, ThresholdPair{0.1, 0.9},
          ThresholdPair{0.4, 0.6}, ThresholdPair{0.8, 0.9}};
}

void write_sweep_csv(const std::vector<SweepCell>& cells, std::ostream& out) {
  out << "proportion,h1,h2,ta_mean,ta_std,ratio_mean,ratio_std,acc_mean,"
         "acc_std,runs\n";
  char buf[256];
  for (const SweepCell& c : cells) {
    std::snprintf(buf, sizeof buf,
                  "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%u\n",
                  c.proportion, c.h1, c.h2, c.ta_mean, c.ta_std, c.ratio_mean,
                  c.ratio_std, c.acc_mean, c.acc_std, c.runs);
    out << buf;
  }
}

void write_sweep_sidecar(const SweepSpec& spec, std::ostream& out) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(spec.mode);
  j["accounting"] = to_string(spec.accounting);
  j["protocol"] = to_string(spec.protocol);
  j["grid_step"] = spec.grid_step;
  j["proportions"] = spec.proportions;
  j["e1"] = spec.e1;
  j["e2"] = spec.e2;
  j["n"] = spec.base.n;
  j["spam_alpha"] = spec.base.spam_alpha;
  j["spam_beta"] = spec.base.spam_beta;
  j["normal_alpha"] = spec.base.normal_alpha;
  j["normal_beta"] = spec.base.normal_beta;
  j["seeds"] = spec.seeds;
  j["rng"] = kRngAlgorithmId;
  out << j.dump(2) << '\n';
}

}  // namespace hybridspam
