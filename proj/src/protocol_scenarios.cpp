#include "hybridspam/protocol_scenarios.hpp"

#include <json.hpp>

namespace hybridspam {
namespace {

Bytes text(const char* s) {
  const std::string str(s);
  return Bytes(str.begin(), str.end());
}

std::uint64_t u64_from(const Bytes& b) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

std::string hex(const Bytes& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

const char* kind_of(const WireMessage& m) {
  if (std::holds_alternative<Submit>(m)) return "submit";
  if (std::holds_alternative<Challenge>(m)) return "challenge";
  return "response";
}

Protocol protocol_of(const WireMessage& m) {
  if (const Submit* s = std::get_if<Submit>(&m)) return s->protocol;
  if (const Challenge* c = std::get_if<Challenge>(&m)) return c->protocol;
  return std::get<Response>(m).protocol;
}

// One center, one honest sender, a shared trace. Every message logged is
// serialized and parsed back; a round-trip mismatch fails the scenario.
struct Harness {
  MessageCenter center;
  SenderAgent agent;
  ScenarioResult& result;
  int t = 0;

  Harness(CryptoProvider& crypto, ScenarioResult& result,
          CenterPolicy policy = {})
      : center("center", crypto, policy),
        agent("alice", crypto, center.signing_key(), center.captcha_key()),
        result(result) {}

  void log(const char* dir, const WireMessage& m) {
    Bytes bytes = serialize_wire(m);
    if (!(parse_wire(bytes) == m)) {
      fail("wire round-trip mismatch");
      return;
    }
    nlohmann::ordered_json j;
    j["t"] = t++;
    j["dir"] = dir;
    j["protocol"] = to_string(protocol_of(m));
    j["kind"] = kind_of(m);
    j["bytes"] = hex(bytes);
    result.trace += j.dump();
    result.trace += '\n';
  }

  void expect(bool ok, const std::string& detail) {
    if (!ok) fail(detail);
  }

  void fail(const std::string& detail) {
    if (result.passed) {
      result.passed = false;
      result.detail = detail;
    }
  }
};

KeyId open_envelope(CryptoProvider& crypto, const MessageCenter& center,
                    const CaptchaEnvelope& envelope) {
  Bytes plain = crypto.sym_decrypt(center.captcha_key(),
                                   {envelope.wrapped.data(),
                                    envelope.wrapped.size()});
  return plain.size() == 8 ? u64_from(plain) : 0;
}

// Runs M1 -> M2 and returns the challenge (or reports failure).
std::optional<Challenge> open_exchange(Harness& h, Protocol protocol,
                                       const Bytes& payload,
                                       std::int64_t now = 0) {
  Submit sub = h.agent.make_submit(protocol, "bob", payload);
  h.log("sender->center", sub);
  SubmitOutcome so = h.center.on_submit(sub, now);
  if (so.decision.kind != CenterDecision::Kind::ChallengeSent) {
    h.fail("expected a challenge, got " +
           std::string(so.decision.kind == CenterDecision::Kind::Deliver
                           ? "delivery"
                           : to_string(so.decision.reason)));
    return std::nullopt;
  }
  h.log("center->sender", *so.challenge);
  return so.challenge;
}

void expect_abort(Harness& h, const std::variant<Response, Abort>& reply,
                  AbortReason want) {
  if (const Abort* abort = std::get_if<Abort>(&reply)) {
    h.expect(abort->reason == want,
             std::string("expected abort ") + to_string(want) + ", got " +
                 to_string(abort->reason));
  } else {
    h.fail(std::string("expected abort ") + to_string(want) +
           ", sender answered");
  }
}

void expect_reject(Harness& h, const CenterDecision& decision,
                   RejectReason want) {
  if (decision.kind != CenterDecision::Kind::Reject) {
    h.fail(std::string("expected reject ") + to_string(want) +
           ", message was delivered");
    return;
  }
  h.expect(decision.reason == want,
           std::string("expected reject ") + to_string(want) + ", got " +
               to_string(decision.reason));
}

// Full honest pass; returns the delivered decision for further checks.
std::optional<CenterDecision> honest_pass(Harness& h, Protocol protocol,
                                          const Bytes& payload,
                                          std::int64_t submit_at = 0,
                                          std::int64_t respond_at = 1) {
  auto challenge = open_exchange(h, protocol, payload, submit_at);
  if (!challenge) return std::nullopt;
  auto reply = h.agent.on_challenge(*challenge, true);
  const Response* response = std::get_if<Response>(&reply);
  if (!response) {
    h.fail(std::string("sender aborted with ") +
           to_string(std::get<Abort>(reply).reason));
    return std::nullopt;
  }
  h.log("sender->center", *response);
  return h.center.on_response(*response, respond_at);
}

void scenario_honest(Protocol p, CryptoProvider& crypto, ScenarioResult& r) {
  Harness h(crypto, r);
  const Bytes payload = text("hello");
  auto decision = honest_pass(h, p, payload);
  if (!decision) return;
  h.expect(decision->kind == CenterDecision::Kind::Deliver,
           "expected delivery");
  if (decision->kind == CenterDecision::Kind::Deliver) {
    h.expect(decision->recipient == "bob", "delivered to wrong recipient");
    h.expect(decision->payload == payload, "delivered payload differs");
  }
}

void scenario_bot(Protocol p, CryptoProvider& crypto, ScenarioResult& r) {
  Harness h(crypto, r);
  auto challenge = open_exchange(h, p, text("buy now"));
  if (!challenge) return;
  auto reply = h.agent.on_challenge(*challenge, false);
  expect_abort(h, reply, AbortReason::CannotDecode);
}

void scenario_tampered_submit(Protocol p, CryptoProvider& crypto,
                              ScenarioResult& r) {
  Harness h(crypto, r);
  Submit sub = h.agent.make_submit(p, "bob", text("hello"));
  h.log("sender->center", sub);
  Submit altered = sub;
  altered.payload[0] ^= 0xff;  // in-flight modification
  SubmitOutcome so = h.center.on_submit(altered, 0);
  if (so.decision.kind != CenterDecision::Kind::ChallengeSent) {
    h.fail("expected a challenge");
    return;
  }
  h.log("center->sender", *so.challenge);
  expect_abort(h, h.agent.on_challenge(*so.challenge, true),
               AbortReason::TamperedChallenge);
}

void scenario_tampered_challenge_p3(CryptoProvider& crypto, ScenarioResult& r) {
  Harness h(crypto, r);
  auto challenge = open_exchange(h, Protocol::P3, text("hello"));
  if (!challenge) return;
  Challenge altered = *challenge;
  altered.envelope.wrapped[0] ^= 0x01;  // breaks the signed body
  expect_abort(h, h.agent.on_challenge(altered, true),
               AbortReason::UnknownSigner);
}

void scenario_tampered_echo_p4(CryptoProvider& crypto, ScenarioResult& r) {
  Harness h(crypto, r);
  auto challenge = open_exchange(h, Protocol::P4, text("hello"));
  if (!challenge) return;
  Challenge altered = *challenge;
  altered.payload_echo[0] ^= 0x01;
  expect_abort(h, h.agent.on_challenge(altered, true),
               AbortReason::TamperedChallenge);
}

void scenario_replay(Protocol p, CryptoProvider& crypto, ScenarioResult& r) {
  Harness h(crypto, r);
  auto challenge = open_exchange(h, p, text("hello"));
  if (!challenge) return;
  auto reply = h.agent.on_challenge(*challenge, true);
  const Response* response = std::get_if<Response>(&reply);
  if (!response) {
    h.fail("sender aborted");
    return;
  }
  h.log("sender->center", *response);
  CenterDecision first = h.center.on_response(*response, 1);
  h.expect(first.kind == CenterDecision::Kind::Deliver, "expected delivery");
  h.log("sender->center", *response);  // replayed verbatim
  expect_reject(h, h.center.on_response(*response, 2),
                RejectReason::UnknownSession);
}

void scenario_token_resubmit(Protocol p, CryptoProvider& crypto,
                             ScenarioResult& r, std::int64_t resubmit_at,
                             std::optional<RejectReason> want_reject) {
  Harness h(crypto, r);
  auto challenge = open_exchange(h, p, text("hello"));
  if (!challenge) return;
  const KeyId session_key = open_envelope(crypto, h.center, challenge->envelope);
  auto reply = h.agent.on_challenge(*challenge, true);
  const Response* response = std::get_if<Response>(&reply);
  if (!response) {
    h.fail("sender aborted");
    return;
  }
  h.log("sender->center", *response);
  CenterDecision first = h.center.on_response(*response, 1);
  h.expect(first.kind == CenterDecision::Kind::Deliver, "expected delivery");

  const Bytes fresh = text("hello again");
  Response again;
  again.protocol = p;
  again.sender = "alice";
  again.recipient = "bob";
  again.enc_payload = crypto.sym_encrypt(session_key, {fresh.data(), fresh.size()});
  again.token = challenge->token;
  h.log("sender->center", again);
  CenterDecision second = h.center.on_response(again, resubmit_at);
  if (want_reject) {
    expect_reject(h, second, *want_reject);
  } else {
    h.expect(second.kind == CenterDecision::Kind::Deliver,
             "expected token resubmission to deliver");
    if (second.kind == CenterDecision::Kind::Deliver)
      h.expect(second.payload == fresh, "resubmitted payload differs");
  }
}

void scenario_expired_session(Protocol p, CryptoProvider& crypto,
                              ScenarioResult& r) {
  Harness h(crypto, r);
  auto challenge = open_exchange(h, p, text("hello"));
  if (!challenge) return;
  auto reply = h.agent.on_challenge(*challenge, true);
  const Response* response = std::get_if<Response>(&reply);
  if (!response) {
    h.fail("sender aborted");
    return;
  }
  h.log("sender->center", *response);
  const std::int64_t late = h.center.policy().ttl + 1;
  expect_reject(h, h.center.on_response(*response, late),
                RejectReason::UnknownSession);
}

void scenario_forged_token(Protocol p, CryptoProvider& crypto,
                           ScenarioResult& r) {
  Harness h(crypto, r);
  auto challenge = open_exchange(h, p, text("hello"));
  if (!challenge) return;
  const KeyId session_key = open_envelope(crypto, h.center, challenge->envelope);
  AuthToken forged = *challenge->token;
  forged.issued_at += 50;  // try to extend the lifetime
  const Bytes body = token_body(forged);
  forged.signature = crypto.sign(crypto.fresh_keypair(), {body.data(), body.size()});

  const Bytes payload = text("hello");
  Response response;
  response.protocol = p;
  response.sender = "alice";
  response.recipient = "bob";
  response.enc_payload =
      crypto.sym_encrypt(session_key, {payload.data(), payload.size()});
  response.token = forged;
  h.log("sender->center", response);
  expect_reject(h, h.center.on_response(response, 1),
                RejectReason::BadSignature);
}

void scenario_rogue_center(Protocol p, CryptoProvider& crypto,
                           ScenarioResult& r) {
  Harness h(crypto, r);
  MessageCenter rogue("rogue", crypto);
  Submit sub = h.agent.make_submit(p, "bob", text("hello"));
  h.log("sender->center", sub);
  SubmitOutcome so = rogue.on_submit(sub, 0);
  if (so.decision.kind != CenterDecision::Kind::ChallengeSent) {
    h.fail("expected a challenge");
    return;
  }
  h.log("center->sender", *so.challenge);
  expect_abort(h, h.agent.on_challenge(*so.challenge, true),
               AbortReason::UnknownSigner);
}

void scenario_wrong_nonce(Protocol p, CryptoProvider& crypto,
                          ScenarioResult& r) {
  Harness h(crypto, r);
  auto challenge = open_exchange(h, p, text("hello"));
  if (!challenge) return;
  const KeyId session_key = open_envelope(crypto, h.center, challenge->envelope);

  Response response;
  response.protocol = p;
  response.sender = "alice";
  if (p == Protocol::P1) {
    Bytes sealed_plain =
        crypto.sym_decrypt(session_key,
                           {challenge->sealed.data(), challenge->sealed.size()});
    if (sealed_plain.size() != 16) {
      h.fail("unexpected sealed block");
      return;
    }
    Bytes reply(sealed_plain.begin(), sealed_plain.begin() + 8);
    std::uint64_t nonce =
        u64_from(Bytes(sealed_plain.begin() + 8, sealed_plain.end()));
    for (int i = 0; i < 8; ++i)
      reply.push_back(static_cast<std::uint8_t>((nonce + 2) >> (8 * i)));
    response.recipient = "center";
    response.sealed = crypto.sym_encrypt(session_key, {reply.data(), reply.size()});
  } else {
    Bytes reply;
    for (int i = 0; i < 8; ++i)
      reply.push_back(
          static_cast<std::uint8_t>((challenge->nonce_plain + 2) >> (8 * i)));
    response.recipient = "bob";
    response.sealed = crypto.sym_encrypt(session_key, {reply.data(), reply.size()});
  }
  h.log("sender->center", response);
  expect_reject(h, h.center.on_response(response, 1),
                RejectReason::NonceMismatch);
}

void scenario_altered_payload(Protocol p, CryptoProvider& crypto,
                              ScenarioResult& r) {
  Harness h(crypto, r);
  auto challenge = open_exchange(h, p, text("hello"));
  if (!challenge) return;
  const KeyId session_key = open_envelope(crypto, h.center, challenge->envelope);

  const Bytes altered = text("HELLO");
  Response response;
  response.protocol = p;
  response.sender = "alice";
  response.recipient = "bob";
  response.enc_payload =
      crypto.sym_encrypt(session_key, {altered.data(), altered.size()});
  response.token = challenge->token;
  h.log("sender->center", response);
  expect_reject(h, h.center.on_response(response, 1),
                RejectReason::HashMismatch);
}

void scenario_duplicate_submit(Protocol p, CryptoProvider& crypto,
                               ScenarioResult& r) {
  Harness h(crypto, r);
  Submit sub = h.agent.make_submit(p, "bob", text("hello"));
  h.log("sender->center", sub);
  SubmitOutcome first = h.center.on_submit(sub, 0);
  if (first.decision.kind != CenterDecision::Kind::ChallengeSent) {
    h.fail("expected a challenge");
    return;
  }
  h.log("center->sender", *first.challenge);
  h.log("sender->center", sub);  // sender retries
  SubmitOutcome second = h.center.on_submit(sub, 5);
  if (second.decision.kind != CenterDecision::Kind::ChallengeSent) {
    h.fail("expected a re-issued challenge");
    return;
  }
  h.log("center->sender", *second.challenge);
  h.expect(serialize_wire(*first.challenge) == serialize_wire(*second.challenge),
           "re-issued challenge differs from the original");
  auto reply = h.agent.on_challenge(*second.challenge, true);
  const Response* response = std::get_if<Response>(&reply);
  if (!response) {
    h.fail("sender aborted");
    return;
  }
  h.log("sender->center", *response);
  h.expect(h.center.on_response(*response, 6).kind ==
               CenterDecision::Kind::Deliver,
           "expected delivery after retry");
}

void scenario_ttl_boundary(Protocol p, CryptoProvider& crypto,
                           ScenarioResult& r) {
  Harness h(crypto, r);
  const std::int64_t ttl = h.center.policy().ttl;
  auto decision = honest_pass(h, p, text("hello"), 0, ttl);
  if (!decision) return;
  h.expect(decision->kind == CenterDecision::Kind::Deliver,
           "expected delivery exactly at the TTL boundary");
}

struct NamedScenario {
  std::string name;
  std::function<void(CryptoProvider&, ScenarioResult&)> run;
};

std::vector<NamedScenario> build_suite() {
  std::vector<NamedScenario> suite;
  auto add = [&suite](std::string name, auto fn) {
    suite.push_back(NamedScenario{std::move(name), fn});
  };
  const Protocol all[] = {Protocol::P1, Protocol::P2, Protocol::P3,
                          Protocol::P4};
  for (Protocol p : all) {
    std::string pfx = to_string(p);
    add(pfx + "/honest-delivery",
        [p](CryptoProvider& c, ScenarioResult& r) { scenario_honest(p, c, r); });
    add(pfx + "/bot-drop",
        [p](CryptoProvider& c, ScenarioResult& r) { scenario_bot(p, c, r); });
  }
  add("p1/tampered-submit", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_tampered_submit(Protocol::P1, c, r);
  });
  add("p2/tampered-submit", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_tampered_submit(Protocol::P2, c, r);
  });
  add("p3/tampered-challenge", scenario_tampered_challenge_p3);
  add("p4/tampered-echo", scenario_tampered_echo_p4);
  add("p1/replayed-response", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_replay(Protocol::P1, c, r);
  });
  add("p3/replayed-response", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_replay(Protocol::P3, c, r);
  });
  add("p2/token-resubmit", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_token_resubmit(Protocol::P2, c, r, 10, std::nullopt);
  });
  add("p4/token-resubmit", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_token_resubmit(Protocol::P4, c, r, 10, std::nullopt);
  });
  add("p2/expired-token", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_token_resubmit(Protocol::P2, c, r, 101,
                            RejectReason::TokenExpired);
  });
  add("p4/expired-token", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_token_resubmit(Protocol::P4, c, r, 101,
                            RejectReason::TokenExpired);
  });
  add("p1/expired-session", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_expired_session(Protocol::P1, c, r);
  });
  add("p3/expired-session", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_expired_session(Protocol::P3, c, r);
  });
  add("p2/forged-token", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_forged_token(Protocol::P2, c, r);
  });
  add("p4/forged-token", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_forged_token(Protocol::P4, c, r);
  });
  add("p3/rogue-center", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_rogue_center(Protocol::P3, c, r);
  });
  add("p4/rogue-center", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_rogue_center(Protocol::P4, c, r);
  });
  add("p1/wrong-nonce", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_wrong_nonce(Protocol::P1, c, r);
  });
  add("p3/wrong-nonce", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_wrong_nonce(Protocol::P3, c, r);
  });
  add("p2/altered-payload", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_altered_payload(Protocol::P2, c, r);
  });
  add("p4/altered-payload", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_altered_payload(Protocol::P4, c, r);
  });
  add("p1/duplicate-submit", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_duplicate_submit(Protocol::P1, c, r);
  });
  add("p2/duplicate-submit", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_duplicate_submit(Protocol::P2, c, r);
  });
  add("p1/ttl-boundary", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_ttl_boundary(Protocol::P1, c, r);
  });
  add("p2/ttl-boundary", [](CryptoProvider& c, ScenarioResult& r) {
    scenario_ttl_boundary(Protocol::P2, c, r);
  });
  return suite;
}

}  // namespace

ProviderFactory toy_provider_factory() {
  return [](std::uint64_t seed) {
    return std::make_unique<ToyCryptoProvider>(seed);
  };
}

std::vector<ScenarioResult> run_protocol_scenarios(
    const ProviderFactory& make_provider) {
  std::vector<NamedScenario> suite = build_suite();
  std::vector<ScenarioResult> results;
  results.reserve(suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    ScenarioResult result;
    result.name = suite[i].name;
    result.passed = true;
    std::unique_ptr<CryptoProvider> crypto = make_provider(1000 + i);
    try {
      suite[i].run(*crypto, result);
    } catch (const std::exception& e) {
      result.passed = false;
      result.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace hybridspam
