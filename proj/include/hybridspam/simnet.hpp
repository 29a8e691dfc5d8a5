#pragma once

// End-to-end delivery simulation. Each message is classified at (h1, h2);
// the certain regions ship directly (2 hops for keep, 1 for drop) and the
// uncertain band runs a real challenge exchange against a per-message
// center instance, so a run is pure in (corpus, policy) and messages are
// independent. Hop counts depend only on the outcome: a challenged message
// costs 4 hops when delivered and 2 when dropped, for every protocol.
//
// Whether the challenge succeeds is drawn once per message, before the
// protocol machinery runs: humans pass with probability 1 - e1, bots with
// probability e2. Draws come from substream (policy.seed, id), domain-
// separated from corpus generation so equal seeds stay independent.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hybridspam/challenge.hpp"
#include "hybridspam/classifier.hpp"
#include "hybridspam/corpus.hpp"
#include "hybridspam/rng.hpp"

namespace hybridspam {

struct SimPolicy {
  ThresholdPair thresholds;
  double e1 = 0.02;
  double e2 = 0.01;
  Protocol protocol = Protocol::P1;
  std::uint64_t seed = 0;
};

enum class Pathway : std::uint8_t {
  DirectNormal,         // kappa >= h2, delivered, 2 hops
  ChallengedDelivered,  // uncertain, challenge passed, 4 hops
  ChallengedDropped,    // uncertain, challenge failed, 2 hops
  DirectSpam,           // kappa < h1, dropped, 1 hop
};

const char* to_string(Pathway pathway);

struct DeliveryOutcome {
  std::uint64_t id = 0;
  Pathway pathway = Pathway::DirectNormal;
  std::uint32_t hops = 0;
  bool delivered = false;
  std::string drop_reason;  // reject or abort name for ChallengedDropped
};

struct SimReport {
  SimPolicy policy;
  std::uint64_t total_hops = 0;
  std::array<std::uint64_t, 4> pathway_counts{};  // indexed by Pathway
  ConfusionMatrix confusion;                      // delivered == predicted Normal
  std::map<std::string, std::uint64_t> rejects_by_reason;
  std::vector<DeliveryOutcome> outcomes;
};

// One challenge-success draw: true means the sender will decode the
// captcha (human with probability 1 - e1, bot with probability e2).
bool respond(Rng& rng, SenderKind kind, const SimPolicy& policy);

DeliveryOutcome run_message(const Message& message, const SimPolicy& policy);

SimReport run_corpus(const Corpus& corpus, const SimPolicy& policy);

// JSON: policy, seed, total_hops, pathway_counts, confusion,
// rejects_by_reason. Per-message outcomes stay in memory only.
void write_sim_report(const SimReport& report, std::ostream& out);

}  // namespace hybridspam
