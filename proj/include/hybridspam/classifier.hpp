#pragma once

// Score-threshold classification. The binary filter keeps a message iff
// kappa >= h. The ternary variant splits [0, 1] at (h1, h2), h1 <= h2:
// kappa < h1 is Spam, kappa >= h2 is Normal, the half-open band [h1, h2)
// is Uncertain. Both boundaries are inclusive toward the keep side, so
// h1 == h2 collapses exactly onto the binary filter.

#include <array>
#include <cstdint>
#include <stdexcept>

#include "hybridspam/corpus.hpp"

namespace hybridspam {

enum class Region : std::uint8_t { Normal, Uncertain, Spam };

const char* to_string(Region region);

struct ThresholdPair {
  double h1 = 0.0;
  double h2 = 0.0;

  // Throws std::invalid_argument unless 0 <= h1 <= h2 <= 1.
  static ThresholdPair checked(double h1, double h2);

  bool operator==(const ThresholdPair&) const = default;
};

ClassLabel classify_binary(double kappa, double h);
Region classify_ternary(double kappa, const ThresholdPair& t);

// Counts indexed by (ground truth, assigned region).
struct RegionCounts {
  std::array<std::array<std::uint64_t, 3>, 2> c{};

  std::uint64_t& at(ClassLabel truth, Region region) {
    return c[static_cast<std::size_t>(truth)][static_cast<std::size_t>(region)];
  }
  std::uint64_t at(ClassLabel truth, Region region) const {
    return c[static_cast<std::size_t>(truth)][static_cast<std::size_t>(region)];
  }
  std::uint64_t region_total(Region region) const {
    return at(ClassLabel::Normal, region) + at(ClassLabel::Spam, region);
  }
  std::uint64_t total() const {
    return region_total(Region::Normal) + region_total(Region::Uncertain) +
           region_total(Region::Spam);
  }

  bool operator==(const RegionCounts&) const = default;
};

// Real-valued region occupancies: either observed counts widened to
// double, or expected masses from the mixture model. Traffic and expected
// confusion are linear in these, so both paths share one formula set.
struct RegionMasses {
  std::array<std::array<double, 3>, 2> m{};

  double& at(ClassLabel truth, Region region) {
    return m[static_cast<std::size_t>(truth)][static_cast<std::size_t>(region)];
  }
  double at(ClassLabel truth, Region region) const {
    return m[static_cast<std::size_t>(truth)][static_cast<std::size_t>(region)];
  }
  double region_total(Region region) const {
    return at(ClassLabel::Normal, region) + at(ClassLabel::Spam, region);
  }
  double total() const {
    return region_total(Region::Normal) + region_total(Region::Uncertain) +
           region_total(Region::Spam);
  }
};

RegionMasses to_masses(const RegionCounts& counts);

// Real-valued so expected (fractional) confusions fit the same type.
struct ConfusionMatrix {
  double tp = 0.0;
  double tn = 0.0;
  double fp = 0.0;
  double fn = 0.0;

  double total() const { return tp + tn + fp + fn; }
};

RegionCounts partition_corpus(const Corpus& corpus, const ThresholdPair& t);

// Expected confusion of the hybrid pipeline given region counts.
// Uncertain messages are delivered with probability 1 - e1 for genuine
// senders and e2 for spammers; delivered counts as predicted Normal.
// Throws std::invalid_argument unless e1, e2 lie in [0, 1].
ConfusionMatrix expected_confusion_hybrid(const RegionCounts& counts,
                                          double e1, double e2);
ConfusionMatrix expected_confusion_hybrid(const RegionMasses& masses,
                                          double e1, double e2);

// Confusion of the plain binary filter at threshold h (integer-valued).
ConfusionMatrix confusion_filtering(const Corpus& corpus, double h);

// (tp + tn) / total; throws std::domain_error when total is zero.
double accuracy(const ConfusionMatrix& cm);

}  // namespace hybridspam
