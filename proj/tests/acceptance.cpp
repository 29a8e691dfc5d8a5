// Acceptance gate: seven end-to-end checks over the whole pipeline, one
// pass/fail line each. Exit 0 iff all pass.

#include <hybridspam/challenge.hpp>
#include <hybridspam/classifier.hpp>
#include <hybridspam/corpus.hpp>
#include <hybridspam/experiments.hpp>
#include <hybridspam/protocol_scenarios.hpp>
#include <hybridspam/rng.hpp>
#include <hybridspam/simnet.hpp>
#include <hybridspam/traffic.hpp>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdint>
#include <string>
#include <vector>

using namespace hybridspam;

namespace {

struct CheckResult {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

// Reference rows for the traffic-and-accuracy table: spam proportion,
// thresholds, expected traffic amount (surcharge accounting), traffic
// ratio against filtering-only, and classification accuracy.
struct ReferenceRow {
    double proportion, h1, h2, ta, ratio, acc;
};

const ReferenceRow kReferenceTable[20] = {
    {0.1, 0.1, 0.2, 10218.8, 1.0239, 0.91847},
    {0.1, 0.1, 0.9, 27698.96, 2.7754, 0.98312},
    {0.1, 0.4, 0.6, 13563.78, 1.4218, 0.95266},
    {0.1, 0.8, 0.9, 10493.06, 1.6081, 0.39682},
    {0.2, 0.1, 0.2, 10450.56, 1.0487, 0.83314},
    {0.2, 0.1, 0.9, 27859.08, 2.7957, 0.98391},
    {0.2, 0.4, 0.6, 13561.34, 1.4659, 0.94151},
    {0.2, 0.8, 0.9, 10050.6, 1.5731, 0.46933},
    {0.3, 0.1, 0.2, 10662.46, 1.0707, 0.74703},
    {0.3, 0.1, 0.9, 28114.76, 2.8233, 0.98462},
    {0.3, 0.4, 0.6, 13682.54, 1.5179, 0.94212},
    {0.3, 0.8, 0.9, 9404.9, 1.5167, 0.53119},
    {0.4, 0.1, 0.2, 10915.14, 1.0972, 0.6635},
    {0.4, 0.1, 0.9, 28188.34, 2.8336, 0.9853},
    {0.4, 0.4, 0.6, 13717.14, 1.5641, 0.93292},
    {0.4, 0.8, 0.9, 8721.52, 1.4442, 0.59632},
    {0.5, 0.1, 0.2, 11139.94, 1.1214, 0.58259},
    {0.5, 0.1, 0.9, 28341.5, 2.853, 0.98627},
    {0.5, 0.4, 0.6, 13523.66, 1.5946, 0.92748},
    {0.5, 0.8, 0.9, 8182.46, 1.3902, 0.66251},
};

// 1. Reference-table reproduction: mean TA/ratio/ACC over 50 seeds per
// proportion, surcharge accounting, within 3% / 3% / 0.02 of the rows.
CheckResult check_reference_table() {
    SweepSpec spec;
    spec.mode = Mode::Empirical;
    spec.accounting = HopAccounting::ChallengeSurcharge;
    spec.proportions = {0.1, 0.2, 0.3, 0.4, 0.5};
    for (std::uint64_t s = 1; s <= 50; ++s) spec.seeds.push_back(s);

    std::vector<SweepCell> rows =
        spam_proportion_table(spec, default_table_pairs());
    if (rows.size() != 20) return {false, "expected 20 table rows"};

    double worst_ta = 0.0, worst_ratio = 0.0, worst_acc = 0.0;
    bool ok = true;
    std::string first_bad;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ReferenceRow& ref = kReferenceTable[i];
        const SweepCell& row = rows[i];
        if (row.proportion != ref.proportion || row.h1 != ref.h1 ||
            row.h2 != ref.h2)
            return {false, "row order mismatch"};
        double dta = std::abs(row.ta_mean / ref.ta - 1.0);
        double dratio = std::abs(row.ratio_mean / ref.ratio - 1.0);
        double dacc = std::abs(row.acc_mean - ref.acc);
        worst_ta = std::max(worst_ta, dta);
        worst_ratio = std::max(worst_ratio, dratio);
        worst_acc = std::max(worst_acc, dacc);
        if ((dta > 0.03 || dratio > 0.03 || dacc > 0.02) && first_bad.empty()) {
            ok = false;
            first_bad = fmt(" first miss at q=%.1f (%.1f,%.1f): ta %.1f vs %.1f",
                            ref.proportion, ref.h1, ref.h2, row.ta_mean, ref.ta);
        }
    }
    return {ok, fmt("20 rows, 50 seeds; max dev ta %.2f%%, ratio %.2f%%, "
                    "acc %.4f%s",
                    100.0 * worst_ta, 100.0 * worst_ratio, worst_acc,
                    first_bad.c_str())};
}

// 2. Collapse identity: at h1 == h2 the hybrid is the plain filter, as an
// exact equality, both in expectation and in the delivery simulation.
CheckResult check_collapse_identity() {
    Rng pick(20260819);
    int exact = 0;
    const int trials = 1000;
    for (int k = 0; k < trials; ++k) {
        MixtureParams params;
        params.n = 50 + pick.next_u64() % 351;
        params.spam_share = pick.uniform01();
        Corpus corpus = generate_corpus(params, 100000 + k);
        double h = pick.uniform01();
        ThresholdPair t{h, h};

        TrafficBreakdown tb = traffic_ratio(corpus, t, 0.02, 0.01);
        bool good = tb.ratio == 1.0 && tb.hybrid_total == tb.filtering_only;

        SimPolicy policy;
        policy.thresholds = t;
        policy.seed = k;
        SimReport report = run_corpus(corpus, policy);
        good = good &&
               static_cast<double>(report.total_hops) == tb.filtering_only;
        if (good) ++exact;
    }
    return {exact == trials, fmt("%d/%d exact", exact, trials)};
}

// 3. Analytic oracle agreement: empirical grid means within 4 standard
// errors of the closed-form expectations at the default mixture.
CheckResult check_analytic_grid() {
    SweepSpec emp;
    emp.grid_step = 0.1;
    emp.mode = Mode::Empirical;
    for (std::uint64_t s = 1; s <= 40; ++s) emp.seeds.push_back(s);
    SweepSpec ana = emp;
    ana.mode = Mode::Analytic;
    ana.seeds.clear();

    std::vector<SweepCell> e = sweep_thresholds(emp, 0.1457);
    std::vector<SweepCell> a = sweep_thresholds(ana, 0.1457);
    if (e.size() != a.size() || e.size() != 66)
        return {false, "expected 66 grid cells"};

    int misses = 0;
    double worst_z = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        double se = e[i].ta_std / std::sqrt(static_cast<double>(e[i].runs));
        double diff = std::abs(e[i].ta_mean - a[i].ta_mean);
        if (diff > 4.0 * se + 1e-6) ++misses;
        if (se > 0.0) worst_z = std::max(worst_z, diff / se);
    }
    return {misses == 0,
            fmt("66 cells, 40 seeds; %d outside 4 SE (worst z %.2f)", misses,
                worst_z)};
}

// 4. Simulation against the closed form: mean hops over 100 delivery runs
// within 1% of the expected traffic on the same corpus.
CheckResult check_simulation_agreement() {
    Rng pick(777);
    double worst = 0.0;
    bool ok = true;
    for (int k = 0; k < 10; ++k) {
        MixtureParams params;
        Corpus corpus = generate_corpus(params, 9000 + k);
        double a = pick.uniform01(), b = pick.uniform01();
        ThresholdPair t{std::min(a, b), std::max(a, b)};
        double e1 = 0.1 * pick.uniform01();
        double e2 = 0.05 * pick.uniform01();

        RegionCounts counts = partition_corpus(corpus, t);
        double expected = traffic_hybrid_expected(counts, e1, e2).hybrid_total;

        double sum = 0.0;
        for (int r = 0; r < 100; ++r) {
            SimPolicy policy;
            policy.thresholds = t;
            policy.e1 = e1;
            policy.e2 = e2;
            policy.protocol = static_cast<Protocol>(1 + k % 4);
            policy.seed = 100 * k + r;
            sum += static_cast<double>(run_corpus(corpus, policy).total_hops);
        }
        double mean = sum / 100.0;
        double rel = std::abs(mean / expected - 1.0);
        worst = std::max(worst, rel);
        if (rel > 0.01) ok = false;
    }
    return {ok, fmt("10 policies x 100 runs; worst dev %.3f%%", 100.0 * worst)};
}

// 5. Monotonicity: expected hybrid traffic never rises in h1 and never
// falls in h2, across the full 1/30 grid on 100 random corpora.
CheckResult check_monotonicity() {
    Rng pick(555);
    std::vector<double> grid = threshold_grid(1.0 / 30.0);
    const std::size_t g = grid.size();
    long long violations = 0;

    for (int c = 0; c < 100; ++c) {
        MixtureParams params;
        params.n = 500;
        params.spam_share = pick.uniform01();
        Corpus corpus = generate_corpus(params, 40000 + c);

        std::vector<std::vector<double>> ta(g, std::vector<double>(g, 0.0));
        for (std::size_t i = 0; i < g; ++i) {
            for (std::size_t j = i; j < g; ++j) {
                RegionCounts counts =
                    partition_corpus(corpus, ThresholdPair{grid[i], grid[j]});
                ta[i][j] =
                    traffic_hybrid_expected(counts, 0.02, 0.01).hybrid_total;
            }
        }
        for (std::size_t i = 0; i < g; ++i) {
            for (std::size_t j = i; j < g; ++j) {
                if (i + 1 <= j && ta[i + 1][j] > ta[i][j] + 1e-9) ++violations;
                if (j + 1 < g && ta[i][j + 1] < ta[i][j] - 1e-9) ++violations;
            }
        }
    }
    return {violations == 0,
            fmt("100 corpora x 496 cells; %lld violations", violations)};
}

// 6. Protocol trace suite: every scenario passes and the traces are
// byte-identical across two runs.
CheckResult check_protocol_suite() {
    std::vector<ScenarioResult> first = run_protocol_scenarios();
    std::vector<ScenarioResult> second = run_protocol_scenarios();
    if (first.size() != second.size()) return {false, "suite size changed"};

    int failed = 0;
    std::string first_bad;
    for (const ScenarioResult& r : first) {
        if (!r.passed) {
            ++failed;
            if (first_bad.empty()) first_bad = " first: " + r.name;
        }
    }
    // The named behaviors that must be present in the suite.
    const char* required[] = {
        "p1/honest-delivery", "p2/honest-delivery", "p3/honest-delivery",
        "p4/honest-delivery", "p1/bot-drop",        "p2/bot-drop",
        "p3/bot-drop",        "p4/bot-drop",        "p1/tampered-submit",
        "p1/replayed-response", "p2/token-resubmit", "p4/token-resubmit",
        "p2/expired-token",   "p4/expired-token",   "p2/forged-token",
        "p4/forged-token",
    };
    for (const char* name : required) {
        bool found = false;
        for (const ScenarioResult& r : first)
            if (r.name == name) found = true;
        if (!found) return {false, std::string("missing scenario ") + name};
    }

    std::string trace_a, trace_b;
    for (const ScenarioResult& r : first) trace_a += r.trace;
    for (const ScenarioResult& r : second) trace_b += r.trace;
    bool reproducible = trace_a == trace_b && !trace_a.empty();

    return {failed == 0 && reproducible,
            fmt("%zu scenarios, %d failed, traces %s%s", first.size(), failed,
                reproducible ? "reproducible" : "DIVERGED", first_bad.c_str())};
}

// 7. Small-instance brute force: the library's partition, traffic, and
// confusion numbers match an independent per-message enumeration.
CheckResult check_brute_force() {
    Rng pick(999);
    const int trials = 200;
    int exact = 0;
    for (int k = 0; k < trials; ++k) {
        MixtureParams params;
        params.n = 1 + pick.next_u64() % 20;
        params.spam_share = pick.uniform01();
        Corpus corpus = generate_corpus(params, 60000 + k);

        double h1, h2;
        if (k % 4 == 0) {
            h1 = h2 = pick.uniform01();
        } else {
            double a = pick.uniform01(), b = pick.uniform01();
            h1 = std::min(a, b);
            h2 = std::max(a, b);
        }
        ThresholdPair t{h1, h2};
        double e1 = pick.uniform01();
        double e2 = pick.uniform01();

        // Independent enumeration: raw comparisons, one message at a time.
        RegionCounts oracle_counts;
        double oracle_filter_hops = 0.0;
        double oracle_path_hops = 0.0;
        double oracle_surcharge_hops = 0.0;
        ConfusionMatrix oracle_filter_cm, oracle_hybrid_cm;
        for (const Message& m : corpus.messages) {
            bool is_normal_truth = m.truth == ClassLabel::Normal;
            if (m.kappa >= t.h2) {
                ++oracle_counts.at(m.truth, Region::Normal);
                oracle_path_hops += 2.0;
                oracle_surcharge_hops += 2.0;
                (is_normal_truth ? oracle_hybrid_cm.tp : oracle_hybrid_cm.fp) += 1.0;
            } else if (m.kappa < t.h1) {
                ++oracle_counts.at(m.truth, Region::Spam);
                oracle_path_hops += 1.0;
                oracle_surcharge_hops += 1.0;
                (is_normal_truth ? oracle_hybrid_cm.fn : oracle_hybrid_cm.tn) += 1.0;
            } else {
                ++oracle_counts.at(m.truth, Region::Uncertain);
                double p_deliver = is_normal_truth ? 1.0 - e1 : e2;
                oracle_path_hops += 4.0 * p_deliver + 2.0 * (1.0 - p_deliver);
                oracle_surcharge_hops += 6.0 * (1.0 - e1) + 4.0 * e1;
                if (is_normal_truth) {
                    oracle_hybrid_cm.tp += 1.0 - e1;
                    oracle_hybrid_cm.fn += e1;
                } else {
                    oracle_hybrid_cm.fp += e2;
                    oracle_hybrid_cm.tn += 1.0 - e2;
                }
            }
            bool kept = m.kappa >= t.h1;
            oracle_filter_hops += kept ? 2.0 : 1.0;
            if (is_normal_truth)
                (kept ? oracle_filter_cm.tp : oracle_filter_cm.fn) += 1.0;
            else
                (kept ? oracle_filter_cm.fp : oracle_filter_cm.tn) += 1.0;
        }

        bool good = partition_corpus(corpus, t) == oracle_counts;
        good = good && traffic_filtering_only(corpus, t.h1) == oracle_filter_hops;

        TrafficBreakdown path = traffic_hybrid_expected(oracle_counts, e1, e2);
        good = good && std::abs(path.hybrid_total - oracle_path_hops) <= 1e-9;
        TrafficBreakdown surcharge = traffic_hybrid_expected(
            oracle_counts, e1, e2, HopAccounting::ChallengeSurcharge);
        good = good &&
               std::abs(surcharge.hybrid_total - oracle_surcharge_hops) <= 1e-9;

        ConfusionMatrix filter_cm = confusion_filtering(corpus, t.h1);
        good = good && filter_cm.tp == oracle_filter_cm.tp &&
               filter_cm.tn == oracle_filter_cm.tn &&
               filter_cm.fp == oracle_filter_cm.fp &&
               filter_cm.fn == oracle_filter_cm.fn;

        ConfusionMatrix hybrid_cm = expected_confusion_hybrid(oracle_counts, e1, e2);
        good = good && std::abs(hybrid_cm.tp - oracle_hybrid_cm.tp) <= 1e-9 &&
               std::abs(hybrid_cm.tn - oracle_hybrid_cm.tn) <= 1e-9 &&
               std::abs(hybrid_cm.fp - oracle_hybrid_cm.fp) <= 1e-9 &&
               std::abs(hybrid_cm.fn - oracle_hybrid_cm.fn) <= 1e-9;

        if (good) ++exact;
    }
    return {exact == trials, fmt("%d/%d corpora exact", exact, trials)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        CheckResult (*run)();
    };
    const Criterion criteria[] = {
        {"reference-table reproduction", check_reference_table},
        {"threshold-collapse identity", check_collapse_identity},
        {"analytic-grid agreement", check_analytic_grid},
        {"simulation/closed-form agreement", check_simulation_agreement},
        {"traffic monotonicity", check_monotonicity},
        {"protocol trace suite", check_protocol_suite},
        {"small-instance brute force", check_brute_force},
    };

    int failed = 0;
    for (std::size_t i = 0; i < 7; ++i) {
        CheckResult result = criteria[i].run();
        std::printf("[%s] %zu/7 %-33s %s\n", result.passed ? " ok " : "FAIL",
                    i + 1, criteria[i].name, result.detail.c_str());
        std::fflush(stdout);
        if (!result.passed) ++failed;
    }
    if (failed == 0) {
        std::printf("all 7 criteria passed\n");
        return 0;
    }
    std::printf("%d of 7 criteria FAILED\n", failed);
    return 1;
}
