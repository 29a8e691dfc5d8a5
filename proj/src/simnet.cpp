#include "hybridspam/simnet.hpp"

#include <ostream>

#include <json.hpp>

namespace hybridspam {
namespace {

// Domain separation from corpus substreams and from the per-message crypto
// provider seeds.
constexpr std::uint64_t kRespondSalt = 0x73696d2d72657370ull;
constexpr std::uint64_t kCryptoSalt = 0x73696d2d63727970ull;

}  // namespace

const char* to_string(Pathway pathway) {
  switch (pathway) {
    case Pathway::DirectNormal: return "direct_normal";
    case Pathway::ChallengedDelivered: return "challenged_delivered";
    case Pathway::ChallengedDropped: return "challenged_dropped";
    case Pathway::DirectSpam: return "direct_spam";
  }
  return "?";
}

bool respond(Rng& rng, SenderKind kind, const SimPolicy& policy) {
  const double pass =
      kind == SenderKind::Human ? 1.0 - policy.e1 : policy.e2;
  return rng.bernoulli(pass);
}

DeliveryOutcome run_message(const Message& message, const SimPolicy& policy) {
  DeliveryOutcome outcome;
  outcome.id = message.id;

  switch (classify_ternary(message.kappa, policy.thresholds)) {
    case Region::Normal:
      outcome.pathway = Pathway::DirectNormal;
      outcome.hops = 2;
      outcome.delivered = true;
      return outcome;
    case Region::Spam:
      outcome.pathway = Pathway::DirectSpam;
      outcome.hops = 1;
      outcome.delivered = false;
      return outcome;
    case Region::Uncertain:
      break;
  }

  // The success draw happens before any protocol work so the stream
  // position is identical for every protocol.
  Rng stream = Rng::substream(policy.seed ^ kRespondSalt, message.id);
  const bool can_decode = respond(stream, message.sender_kind(), policy);

  ToyCryptoProvider crypto(mix64(policy.seed ^ kCryptoSalt) + message.id);
  MessageCenter center("center", crypto);
  SenderAgent agent("s" + std::to_string(message.id), crypto,
                    center.signing_key(), center.captcha_key());

  Bytes payload(message.payload.begin(), message.payload.end());
  Submit submit = agent.make_submit(policy.protocol, "recipient", payload);
  SubmitOutcome challenge_leg = center.on_submit(submit, 0);

  if (challenge_leg.decision.kind != CenterDecision::Kind::ChallengeSent) {
    outcome.pathway = Pathway::ChallengedDropped;
    outcome.hops = 2;
    outcome.delivered = false;
    outcome.drop_reason = to_string(challenge_leg.decision.reason);
    return outcome;
  }

  auto reply = agent.on_challenge(*challenge_leg.challenge, can_decode);
  if (const Abort* abort = std::get_if<Abort>(&reply)) {
    outcome.pathway = Pathway::ChallengedDropped;
    outcome.hops = 2;
    outcome.delivered = false;
    outcome.drop_reason = to_string(abort->reason);
    return outcome;
  }

  CenterDecision decision =
      center.on_response(std::get<Response>(reply), 0);
  if (decision.kind == CenterDecision::Kind::Deliver) {
    outcome.pathway = Pathway::ChallengedDelivered;
    outcome.hops = 4;
    outcome.delivered = true;
  } else {
    outcome.pathway = Pathway::ChallengedDropped;
    outcome.hops = 2;
    outcome.delivered = false;
    outcome.drop_reason = to_string(decision.reason);
  }
  return outcome;
}

SimReport run_corpus(const Corpus& corpus, const SimPolicy& policy) {
  SimReport report;
  report.policy = policy;
  report.outcomes.reserve(corpus.messages.size());

  for (const Message& m : corpus.messages) {
    DeliveryOutcome outcome = run_message(m, policy);
    report.total_hops += outcome.hops;
    ++report.pathway_counts[static_cast<std::size_t>(outcome.pathway)];
    if (!outcome.drop_reason.empty())
      ++report.rejects_by_reason[outcome.drop_reason];

    if (m.truth == ClassLabel::Normal)
      (outcome.delivered ? report.confusion.tp : report.confusion.fn) += 1.0;
    else
      (outcome.delivered ? report.confusion.fp : report.confusion.tn) += 1.0;

    report.outcomes.push_back(std::move(outcome));
  }
  return report;
}

void write_sim_report(const SimReport& report, std::ostream& out) {
  nlohmann::ordered_json j;
  j["policy"] = {
      {"h1", report.policy.thresholds.h1},
      {"h2", report.policy.thresholds.h2},
      {"e1", report.policy.e1},
      {"e2", report.policy.e2},
      {"protocol", to_string(report.policy.protocol)},
  };
  j["seed"] = report.policy.seed;
  j["total_hops"] = report.total_hops;
  nlohmann::ordered_json paths;
  for (Pathway p : {Pathway::DirectNormal, Pathway::ChallengedDelivered,
                    Pathway::ChallengedDropped, Pathway::DirectSpam})
    paths[to_string(p)] = report.pathway_counts[static_cast<std::size_t>(p)];
  j["pathway_counts"] = paths;
  j["confusion"] = {
      {"tp", report.confusion.tp},
      {"tn", report.confusion.tn},
      {"fp", report.confusion.fp},
      {"fn", report.confusion.fn},
  };
  j["rejects_by_reason"] = report.rejects_by_reason;
  out << j.dump(2) << '\n';
}

}  // namespace hybridspam
