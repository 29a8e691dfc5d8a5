#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hybridspam/corpus.hpp"
#include "hybridspam/experiments.hpp"
#include "hybridspam/protocol_scenarios.hpp"
#include "hybridspam/simnet.hpp"
#include "hybridspam/traffic.hpp"

namespace {

using namespace hybridspam;

Protocol parse_protocol(const std::string& s) {
  if (s == "1" || s == "p1") return Protocol::P1;
  if (s == "2" || s == "p2") return Protocol::P2;
  if (s == "3" || s == "p3") return Protocol::P3;
  if (s == "4" || s == "p4") return Protocol::P4;
  throw CLI::ValidationError("--protocol", "expected one of p1, p2, p3, p4");
}

Mode parse_mode(const std::string& s) {
  if (s == "analytic") return Mode::Analytic;
  if (s == "empirical") return Mode::Empirical;
  if (s == "montecarlo") return Mode::MonteCarlo;
  throw CLI::ValidationError("--mode",
                             "expected analytic, empirical, or montecarlo");
}

HopAccounting parse_accounting(const std::string& s) {
  if (s == "path") return HopAccounting::PathCount;
  if (s == "surcharge") return HopAccounting::ChallengeSurcharge;
  throw CLI::ValidationError("--accounting", "expected path or surcharge");
}

// "h1:h2,h1:h2,..."
std::vector<ThresholdPair> parse_pairs(const std::string& s) {
  std::vector<ThresholdPair> pairs;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    std::string item = s.substr(pos, comma == std::string::npos
                                         ? std::string::npos
                                         : comma - pos);
    std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw CLI::ValidationError("--pairs", "expected h1:h2[,h1:h2...]");
    pairs.push_back(ThresholdPair::checked(std::stod(item.substr(0, colon)),
                                           std::stod(item.substr(colon + 1))));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (pairs.empty())
    throw CLI::ValidationError("--pairs", "expected h1:h2[,h1:h2...]");
  return pairs;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, std::uint32_t runs) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(runs);
  for (std::uint32_t i = 0; i < runs; ++i) seeds.push_back(base + i);
  return seeds;
}

void write_or_fail(const std::string& path,
                   const std::function<void(std::ostream&)>& emit) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  emit(out);
  if (!out) throw std::runtime_error("write failed for " + path);
}

struct GenerateArgs {
  std::string out = "corpus.csv";
  MixtureParams params;
  std::uint64_t seed = 0;
};

struct SimulateArgs {
  std::string corpus;
  std::string out = "simreport.json";
  SimPolicy policy;
  std::string protocol = "p1";
};

struct SweepArgs {
  std::string out = "sweep.csv";
  SweepSpec spec;
  std::string mode = "empirical";
  std::string accounting = "path";
  std::string protocol = "p1";
  std::uint64_t seed = 0;
  std::uint32_t runs = 50;
};

struct TableArgs : SweepArgs {
  std::string pairs = "0.1:0.2,0.1:0.9,0.4:0.6,0.8:0.9";
};

int cmd_generate(const GenerateArgs& args) {
  args.params.validate();
  Corpus corpus = generate_corpus(args.params, args.seed);
  save_corpus(corpus, args.out);
  std::uint64_t spam = 0;
  for (const Message& m : corpus.messages)
    if (m.truth == ClassLabel::Spam) ++spam;
  std::cout << "wrote " << args.out << " and " << args.out << ".meta.json ("
            << corpus.messages.size() << " messages, " << spam << " spam)\n";
  return 0;
}

int cmd_simulate(SimulateArgs args) {
  args.policy.thresholds =
      ThresholdPair::checked(args.policy.thresholds.h1,
                             args.policy.thresholds.h2);
  args.policy.protocol = parse_protocol(args.protocol);
  Corpus corpus = load_corpus(args.corpus);
  SimReport report = run_corpus(corpus, args.policy);
  if (args.out == "-") {
    write_sim_report(report, std::cout);
  } else {
    write_or_fail(args.out,
                  [&report](std::ostream& o) { write_sim_report(report, o); });
    TrafficBreakdown expected =
        traffic_ratio(corpus, args.policy.thresholds, args.policy.e1,
                      args.policy.e2, HopAccounting::PathCount);
    std::cout << "wrote " << args.out << ": total_hops=" << report.total_hops
              << " (expected " << expected.hybrid_total
              << "), delivered=" << report.confusion.tp + report.confusion.fp
              << "\n";
  }
  return 0;
}

SweepSpec finish_spec(SweepArgs& args) {
  args.spec.mode = parse_mode(args.mode);
  args.spec.accounting = parse_accounting(args.accounting);
  args.spec.protocol = parse_protocol(args.protocol);
  args.spec.seeds = seed_range(args.seed, args.runs);
  args.spec.validate();
  return args.spec;
}

void write_report(const std::string& out, const SweepSpec& spec,
                  const std::vector<SweepCell>& cells) {
  write_or_fail(out, [&cells](std::ostream& o) { write_sweep_csv(cells, o); });
  const std::string sidecar = out + ".spec.json";
  write_or_fail(sidecar,
                [&spec](std::ostream& o) { write_sweep_sidecar(spec, o); });
  std::cout << "wrote " << out << " (" << cells.size() << " rows) and "
            << sidecar << "\n";
}

int cmd_sweep(SweepArgs args) {
  SweepSpec spec = finish_spec(args);
  std::vector<SweepCell> cells;
  for (double proportion : spec.proportions) {
    std::vector<SweepCell> rows = sweep_thresholds(spec, proportion);
    cells.insert(cells.end(), rows.begin(), rows.end());
  }
  write_report(args.out, spec, cells);
  return 0;
}

int cmd_table(TableArgs args) {
  SweepSpec spec = finish_spec(args);
  std::vector<ThresholdPair> pairs = parse_pairs(args.pairs);
  std::vector<SweepCell> cells = spam_proportion_table(spec, pairs);
  write_report(args.out, spec, cells);
  return 0;
}

int cmd_verify_protocols(const std::string& trace_dir) {
  std::vector<ScenarioResult> results = run_protocol_scenarios();
  std::size_t failed = 0;
  for (const ScenarioResult& r : results) {
    if (r.passed) {
      std::cout << "[ ok ] " << r.name << "\n";
    } else {
      ++failed;
      std::cout << "[FAIL] " << r.name << ": " << r.detail << "\n";
    }
    if (!trace_dir.empty()) {
      std::string flat = r.name;
      for (char& c : flat)
        if (c == '/') c = '_';
      const std::string path = trace_dir + "/" + flat + ".jsonl";
      write_or_fail(path, [&r](std::ostream& o) { o << r.trace; });
    }
  }
  std::cout << results.size() - failed << "/" << results.size()
            << " scenarios passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid spam filtering simulator"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand(
      "generate", "generate a synthetic corpus (CSV plus JSON sidecar)");
  generate->add_option("--out", gen.out, "output CSV path");
  generate->add_option("--n", gen.params.n, "corpus size");
  generate->add_option("--q", gen.params.spam_share, "spam share in [0, 1]");
  generate->add_option("--spam-alpha", gen.params.spam_alpha, "spam Beta alpha");
  generate->add_option("--spam-beta", gen.params.spam_beta, "spam Beta beta");
  generate->add_option("--normal-alpha", gen.params.normal_alpha,
                       "normal Beta alpha");
  generate->add_option("--normal-beta", gen.params.normal_beta,
                       "normal Beta beta");
  generate->add_option("--seed", gen.seed, "RNG seed")
      ->envname("HYBRIDSPAM_SEED");

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "run the delivery simulation over a corpus");
  simulate->add_option("--corpus", sim.corpus, "corpus CSV path")->required();
  simulate->add_option("--out", sim.out, "report JSON path ('-' for stdout)");
  simulate->add_option("--h1", sim.policy.thresholds.h1, "lower threshold");
  simulate->add_option("--h2", sim.policy.thresholds.h2, "upper threshold");
  simulate->add_option("--e1", sim.policy.e1, "human challenge failure rate");
  simulate->add_option("--e2", sim.policy.e2, "bot challenge pass rate");
  simulate->add_option("--protocol", sim.protocol, "p1|p2|p3|p4");
  simulate->add_option("--seed", sim.policy.seed, "simulation seed")
      ->envname("HYBRIDSPAM_SEED");

  auto add_spec_options = [](CLI::App* cmd, SweepArgs& args) {
    cmd->add_option("--out", args.out, "output CSV path");
    cmd->add_option("--n", args.spec.base.n, "corpus size per run");
    cmd->add_option("--proportions", args.spec.proportions,
                    "spam proportions to evaluate")
        ->delimiter(',');
    cmd->add_option("--e1", args.spec.e1, "human challenge failure rate");
    cmd->add_option("--e2", args.spec.e2, "bot challenge pass rate");
    cmd->add_option("--runs", args.runs, "runs (seeds) per cell");
    cmd->add_option("--seed", args.seed, "base seed; run i uses seed+i")
        ->envname("HYBRIDSPAM_SEED");
    cmd->add_option("--mode", args.mode, "analytic|empirical|montecarlo");
    cmd->add_option("--accounting", args.accounting,
                    "hop accounting: path (outcome-path totals) or surcharge "
                    "(challenge legs billed on top)");
    cmd->add_option("--protocol", args.protocol,
                    "challenge protocol for montecarlo mode");
  };

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "evaluate every valid threshold-grid cell per proportion");
  add_spec_options(sweep_cmd, sweep);
  sweep_cmd->add_option("--step", sweep.spec.grid_step, "threshold grid step");

  TableArgs table;
  table.accounting = "surcharge";
  table.spec.proportions = {0.1, 0.2, 0.3, 0.4, 0.5};
  table.out = "table.csv";
  CLI::App* table_cmd = app.add_subcommand(
      "table", "traffic and accuracy for fixed threshold pairs across "
               "spam proportions");
  add_spec_options(table_cmd, table);
  table_cmd->add_option("--pairs", table.pairs,
                        "threshold pairs as h1:h2[,h1:h2...]");

  std::string trace_dir;
  CLI::App* verify = app.add_subcommand(
      "verify-protocols", "run the challenge-protocol conformance suite");
  verify->add_option("--trace-out", trace_dir,
                     "directory for per-scenario wire traces");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(generate)) return cmd_generate(gen);
    if (app.got_subcommand(simulate)) return cmd_simulate(sim);
    if (app.got_subcommand(sweep_cmd)) return cmd_sweep(sweep);
    if (app.got_subcommand(table_cmd)) return cmd_table(table);
    if (app.got_subcommand(verify)) return cmd_verify_protocols(trace_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
