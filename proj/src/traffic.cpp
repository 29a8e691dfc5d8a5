#include "hybridspam/traffic.hpp"

#include <cmath>

namespace hybridspam {

const char* to_string(HopAccounting accounting) {
  return accounting == HopAccounting::PathCount ? "path" : "surcharge";
}

double traffic_filtering_only(const Corpus& corpus, double h) {
  std::uint64_t kept = 0;
  for (const Message& m : corpus.messages)
    if (classify_binary(m.kappa, h) == ClassLabel::Normal) ++kept;
  std::uint64_t dropped = corpus.messages.size() - kept;
  return 2.0 * static_cast<double>(kept) + 1.0 * static_cast<double>(dropped);
}

TrafficBreakdown traffic_hybrid_expected(const RegionCounts& counts, double e1,
                                         double e2, HopAccounting accounting) {
  return traffic_hybrid_expected(to_masses(counts), e1, e2, accounting);
}

TrafficBreakdown traffic_hybrid_expected(const RegionMasses& masses, double e1,
                                         double e2, HopAccounting accounting) {
  if (!(e1 >= 0.0 && e1 <= 1.0) || !(e2 >= 0.0 && e2 <= 1.0))
    throw std::invalid_argument("error rates must lie in [0, 1]");

  const double un_n = masses.at(ClassLabel::Normal, Region::Uncertain);
  const double un_s = masses.at(ClassLabel::Spam, Region::Uncertain);

  TrafficBreakdown tb;
  tb.normal_hops = 2.0 * masses.region_total(Region::Normal);
  tb.direct_spam_hops = 1.0 * masses.region_total(Region::Spam);
  if (accounting == HopAccounting::PathCount) {
    tb.challenged_delivered_hops = 4.0 * (un_n * (1.0 - e1) + un_s * e2);
    tb.challenged_dropped_hops = 2.0 * (un_s * (1.0 - e2) + un_n * e1);
  } else {
    const double uncertain = un_n + un_s;
    tb.challenged_delivered_hops = 6.0 * uncertain * (1.0 - e1);
    tb.challenged_dropped_hops = 4.0 * uncertain * e1;
  }
  tb.hybrid_total = tb.normal_hops + tb.challenged_delivered_hops +
                    tb.challenged_dropped_hops + tb.direct_spam_hops;
  return tb;
}

TrafficBreakdown traffic_ratio(const Corpus& corpus, const ThresholdPair& t,
                               double e1, double e2,
                               HopAccounting accounting) {
  if (corpus.messages.empty())
    throw std::domain_error("traffic ratio of an empty corpus");
  RegionCounts counts = partition_corpus(corpus, t);
  TrafficBreakdown tb = traffic_hybrid_expected(counts, e1, e2, accounting);
  tb.filtering_only = traffic_filtering_only(corpus, t.h1);
  tb.ratio = tb.hybrid_total / tb.filtering_only;
  return tb;
}

RegionMasses analytic_region_masses(const MixtureParams& params,
                                    const ThresholdPair& t) {
  const double n = static_cast<double>(params.n);
  const double wn = n * params.normal_share();
  const double ws = n * params.spam_share;
  const double fn1 =
      regularized_incomplete_beta(params.normal_alpha, params.normal_beta, t.h1);
  const double fn2 =
      regularized_incomplete_beta(params.normal_alpha, params.normal_beta, t.h2);
  const double fs1 =
      regularized_incomplete_beta(params.spam_alpha, params.spam_beta, t.h1);
  const double fs2 =
      regularized_incomplete_beta(params.spam_alpha, params.spam_beta, t.h2);

  RegionMasses masses;
  masses.at(ClassLabel::Normal, Region::Normal) = wn * (1.0 - fn2);
  masses.at(ClassLabel::Normal, Region::Uncertain) = wn * (fn2 - fn1);
  masses.at(ClassLabel::Normal, Region::Spam) = wn * fn1;
  masses.at(ClassLabel::Spam, Region::Normal) = ws * (1.0 - fs2);
  masses.at(ClassLabel::Spam, Region::Uncertain) = ws * (fs2 - fs1);
  masses.at(ClassLabel::Spam, Region::Spam) = ws * fs1;
  return masses;
}

double analytic_expected_traffic(const MixtureParams& params,
                                 const ThresholdPair& t, double e1, double e2,
                                 HopAccounting accounting) {
  RegionMasses masses = analytic_region_masses(params, t);
  return traffic_hybrid_expected(masses, e1, e2, accounting).hybrid_total;
}

double analytic_filtering_only(const MixtureParams& params, double h) {
  const double n = static_cast<double>(params.n);
  const double fn =
      regularized_incomplete_beta(params.normal_alpha, params.normal_beta, h);
  const double fs =
      regularized_incomplete_beta(params.spam_alpha, params.spam_beta, h);
  const double kept =
      n * params.normal_share() * (1.0 - fn) + n * params.spam_share * (1.0 - fs);
  const double dropped =
      n * params.normal_share() * fn + n * params.spam_share * fs;
  return 2.0 * kept + 1.0 * dropped;
}

namespace {

// Continued fraction for the incomplete beta, modified Lentz method.
double beta_cont_fraction(double a, double b, double x) {
  constexpr double eps = 1e-15;
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("incomplete beta requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("incomplete beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_cont_fraction(a, b, x) / a;
  return 1.0 - front * beta_cont_fraction(b, a, 1.0 - x) / b;
}

}  // namespace hybridspam
