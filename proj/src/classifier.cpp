#include "hybridspam/classifier.hpp"

namespace hybridspam {

const char* to_string(Region region) {
  switch (region) {
    case Region::Normal: return "normal";
    case Region::Uncertain: return "uncertain";
    case Region::Spam: return "spam";
  }
  return "?";
}

ThresholdPair ThresholdPair::checked(double h1, double h2) {
  if (!(h1 >= 0.0 && h1 <= h2 && h2 <= 1.0))
    throw std::invalid_argument("thresholds must satisfy 0 <= h1 <= h2 <= 1");
  return ThresholdPair{h1, h2};
}

ClassLabel classify_binary(double kappa, double h) {
  return kappa >= h ? ClassLabel::Normal : ClassLabel::Spam;
}

Region classify_ternary(double kappa, const ThresholdPair& t) {
  if (kappa >= t.h2) return Region::Normal;
  if (kappa < t.h1) return Region::Spam;
  return Region::Uncertain;
}

RegionCounts partition_corpus(const Corpus& corpus, const ThresholdPair& t) {
  RegionCounts counts;
  for (const Message& m : corpus.messages)
    ++counts.at(m.truth, classify_ternary(m.kappa, t));
  return counts;
}

RegionMasses to_masses(const RegionCounts& counts) {
  RegionMasses masses;
  for (ClassLabel truth : {ClassLabel::Normal, ClassLabel::Spam})
    for (Region region : {Region::Normal, Region::Uncertain, Region::Spam})
      masses.at(truth, region) = static_cast<double>(counts.at(truth, region));
  return masses;
}

ConfusionMatrix expected_confusion_hybrid(const RegionCounts& counts,
                                          double e1, double e2) {
  return expected_confusion_hybrid(to_masses(counts), e1, e2);
}

ConfusionMatrix expected_confusion_hybrid(const RegionMasses& masses,
                                          double e1, double e2) {
  if (!(e1 >= 0.0 && e1 <= 1.0) || !(e2 >= 0.0 && e2 <= 1.0))
    throw std::invalid_argument("error rates must lie in [0, 1]");
  const double rn_n = masses.at(ClassLabel::Normal, Region::Normal);
  const double rn_s = masses.at(ClassLabel::Spam, Region::Normal);
  const double un_n = masses.at(ClassLabel::Normal, Region::Uncertain);
  const double un_s = masses.at(ClassLabel::Spam, Region::Uncertain);
  const double rs_n = masses.at(ClassLabel::Normal, Region::Spam);
  const double rs_s = masses.at(ClassLabel::Spam, Region::Spam);

  ConfusionMatrix cm;
  cm.tp = rn_n + un_n * (1.0 - e1);
  cm.fn = un_n * e1 + rs_n;
  cm.fp = rn_s + un_s * e2;
  cm.tn = un_s * (1.0 - e2) + rs_s;
  return cm;
}

ConfusionMatrix confusion_filtering(const Corpus& corpus, double h) {
  ConfusionMatrix cm;
  for (const Message& m : corpus.messages) {
    bool kept = classify_binary(m.kappa, h) == ClassLabel::Normal;
    if (m.truth == ClassLabel::Normal)
      (kept ? cm.tp : cm.fn) += 1.0;
    else
      (kept ? cm.fp : cm.tn) += 1.0;
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  double total = cm.total();
  if (total <= 0.0)
    throw std::domain_error("accuracy of an empty confusion matrix");
  return (cm.tp + cm.tn) / total;
}

}  // namespace hybridspam
