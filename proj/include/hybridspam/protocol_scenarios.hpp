#pragma once

// Deterministic conformance scenarios for the four challenge protocols:
// honest delivery, bots, tampering, replay, token reuse and expiry, forged
// credentials, nonce errors, idempotent re-challenges, TTL boundaries.
// Every wire message a scenario moves is serialized, round-tripped through
// the parser, and appended to the scenario's trace as one JSON object per
// line: {"t": <logical time>, "dir": "...", "protocol": "...", "kind":
// "submit|challenge|response", "bytes": "<hex>"}. Traces are byte-identical
// across runs of the same build.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hybridspam/challenge.hpp"

namespace hybridspam {

struct ScenarioResult {
  std::string name;
  bool passed = false;
  std::string detail;  // what was expected vs observed on failure
  std::string trace;   // JSON lines
};

using ProviderFactory =
    std::function<std::unique_ptr<CryptoProvider>(std::uint64_t seed)>;

ProviderFactory toy_provider_factory();

// Runs the full suite; one fresh provider per scenario, seeded by the
// scenario's position so runs are reproducible. The factory hook exists
// for fault injection in tests.
std::vector<ScenarioResult> run_protocol_scenarios(
    const ProviderFactory& make_provider = toy_provider_factory());

}  // namespace hybridspam
