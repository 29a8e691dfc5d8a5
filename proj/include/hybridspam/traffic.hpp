#pragma once

// Hop accounting for the hybrid pipeline. Direct deliveries cost 2 hops
// (sender -> center -> recipient), filtered spam costs 1 (sender -> center),
// and uncertain messages go through a challenge exchange whose cost depends
// on the accounting profile:
//
//   PathCount          - each uncertain message costs the hops of the path
//                        it ends on: 4 when delivered after the challenge,
//                        2 when dropped. Delivery probability is 1 - e1 for
//                        genuine senders and e2 for spammers. This matches
//                        the simulated network exactly, so totals never
//                        exceed 4 hops per message.
//   ChallengeSurcharge - the 2-leg challenge exchange is billed on top of
//                        the outcome path, and the outcome is gated only by
//                        the genuine-sender failure rate e1: 6 hops with
//                        probability 1 - e1, 4 with probability e1,
//                        regardless of ground truth. This is the accounting
//                        behind the published traffic tables.

#include "hybridspam/classifier.hpp"
#include "hybridspam/corpus.hpp"

namespace hybridspam {

enum class HopAccounting : std::uint8_t { PathCount, ChallengeSurcharge };

const char* to_string(HopAccounting accounting);

struct TrafficBreakdown {
  double normal_hops = 0.0;
  double challenged_delivered_hops = 0.0;
  double challenged_dropped_hops = 0.0;
  double direct_spam_hops = 0.0;
  double hybrid_total = 0.0;
  double filtering_only = 0.0;
  double ratio = 0.0;
};

// Plain binary filter at threshold h: 2 hops per kept message, 1 per drop.
double traffic_filtering_only(const Corpus& corpus, double h);

// Expected hybrid traffic for a partition. Fills the four component fields
// and hybrid_total; filtering_only and ratio stay 0 (see traffic_ratio).
TrafficBreakdown traffic_hybrid_expected(
    const RegionCounts& counts, double e1, double e2,
    HopAccounting accounting = HopAccounting::PathCount);
TrafficBreakdown traffic_hybrid_expected(
    const RegionMasses& masses, double e1, double e2,
    HopAccounting accounting = HopAccounting::PathCount);

// Complete breakdown for a corpus: hybrid at (h1, h2) against the binary
// filter at h1. Throws std::domain_error on an empty corpus.
TrafficBreakdown traffic_ratio(const Corpus& corpus, const ThresholdPair& t,
                               double e1, double e2,
                               HopAccounting accounting = HopAccounting::PathCount);

// Expected region occupancies under the mixture model (Beta CDF masses
// scaled by n and the class shares).
RegionMasses analytic_region_masses(const MixtureParams& params,
                                    const ThresholdPair& t);

// Closed-form expectation of hybrid traffic under the mixture model.
double analytic_expected_traffic(
    const MixtureParams& params, const ThresholdPair& t, double e1, double e2,
    HopAccounting accounting = HopAccounting::PathCount);

// Closed-form expectation of the binary-filter baseline at threshold h.
double analytic_filtering_only(const MixtureParams& params, double h);

// Regularized incomplete beta I_x(a, b), evaluated with the Lentz
// continued-fraction method (symmetry switch at x = (a+1)/(a+b+2)),
// absolute error below 1e-10 over the parameter ranges used here.
// Throws std::invalid_argument unless a, b > 0 and x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace hybridspam
