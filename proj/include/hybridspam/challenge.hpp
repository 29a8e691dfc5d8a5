#pragma once

// Challenge-response protocols between a sender S, the message center M,
// and a recipient R. Four variants:
//
//   P1 - session state at the center; the challenge carries the session
//        hash and nonce sealed under the session key.
//   P2 - signed token {key material, pair hash, timestamp}; the sender
//        returns the token with the payload, so delivery needs no session
//        lookup and the token can be reused with fresh payloads until it
//        expires.
//   P3 - like P1 but the challenge body is signed by the center, for
//        channels where the sender must authenticate the challenger.
//   P4 - signed token plus a signed payload echo; the key material inside
//        the token stays wrapped in the captcha envelope.
//
// The captcha is modeled as a capability gate: opening the envelope that
// wraps the session key succeeds only for parties that can decode it
// (humans by assumption, bots only when the caller injects a lucky guess).
// Crypto is pluggable; the toy provider is deterministic so protocol
// traces are byte-identical across runs.
//
// Wire format (serialize_wire / parse_wire): byte 0 is the protocol tag
// (1..4), byte 1 the message index (1 submit, 2 challenge, 3 response),
// then the message's fields in fixed order, each as a 32-bit little-endian
// length followed by the raw bytes. Unsigned 64-bit values travel as
// 8-byte little-endian fields.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hybridspam {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 8>;
using Signature = std::array<std::uint8_t, 8>;
using KeyId = std::uint64_t;

enum class Protocol : std::uint8_t { P1 = 1, P2 = 2, P3 = 3, P4 = 4 };

const char* to_string(Protocol protocol);

class CryptoProvider {
 public:
  virtual ~CryptoProvider() = default;
  virtual Digest hash(std::span<const std::uint8_t> data) = 0;
  // Symmetric keystream cipher; encrypt and decrypt are the same map.
  virtual Bytes sym_encrypt(KeyId key, std::span<const std::uint8_t> data) = 0;
  virtual Bytes sym_decrypt(KeyId key, std::span<const std::uint8_t> data) = 0;
  virtual Signature sign(KeyId keypair, std::span<const std::uint8_t> data) = 0;
  virtual bool verify(KeyId keypair, std::span<const std::uint8_t> data,
                      const Signature& sig) = 0;
  virtual std::uint64_t fresh_nonce() = 0;
  virtual KeyId fresh_key() = 0;
  virtual KeyId fresh_keypair() = 0;
};

// Deterministic stand-in crypto: FNV-1a digests, splitmix64 keystreams,
// digest-under-key signatures, counter-based freshness. Not secure; it
// exists so protocol behavior (including mismatch detection) is exact and
// reproducible.
class ToyCryptoProvider : public CryptoProvider {
 public:
  explicit ToyCryptoProvider(std::uint64_t seed = 0);
  Digest hash(std::span<const std::uint8_t> data) override;
  Bytes sym_encrypt(KeyId key, std::span<const std::uint8_t> data) override;
  Bytes sym_decrypt(KeyId key, std::span<const std::uint8_t> data) override;
  Signature sign(KeyId keypair, std::span<const std::uint8_t> data) override;
  bool verify(KeyId keypair, std::span<const std::uint8_t> data,
              const Signature& sig) override;
  std::uint64_t fresh_nonce() override;
  KeyId fresh_key() override;
  KeyId fresh_keypair() override;

 private:
  std::uint64_t seed_;
  std::uint64_t nonce_counter_ = 0;
  std::uint64_t key_counter_ = 0;
};

// Session key wrapped under the center's captcha key. Whoever can decode
// the captcha can unwrap it.
struct CaptchaEnvelope {
  Bytes wrapped;
  bool operator==(const CaptchaEnvelope&) const = default;
};

struct AuthToken {
  Bytes key_material;  // P2: the session key itself; P4: the envelope bytes
  Digest pair_hash{};  // binds the token to (sender, recipient)
  std::int64_t issued_at = 0;
  Signature signature{};
  bool operator==(const AuthToken&) const = default;
};

struct Submit {
  Protocol protocol = Protocol::P1;
  std::string sender;
  std::string recipient;
  Bytes payload;
  bool operator==(const Submit&) const = default;
};

struct Challenge {
  Protocol protocol = Protocol::P1;
  std::string center;
  std::string sender;
  CaptchaEnvelope envelope;
  Bytes sealed;                  // P1: {hash, nonce} under the session key;
                                 // P2: {hash} under the session key
  std::uint64_t nonce_plain = 0; // P3: nonce inside the signed body
  std::optional<Signature> body_sig;  // P3: over (envelope, nonce)
  std::optional<AuthToken> token;     // P2, P4
  Bytes payload_echo;                 // P4
  std::optional<Signature> payload_echo_sig;  // P4: over the echo
  bool operator==(const Challenge&) const = default;
};

struct Response {
  Protocol protocol = Protocol::P1;
  std::string sender;
  std::string recipient;  // P1: the center id (response returns to M)
  Bytes sealed;           // P1: {hash, nonce+1}; P3: {nonce+1}
  Bytes enc_payload;      // P2, P4: payload under the session key
  std::optional<AuthToken> token;  // P2, P4
  bool operator==(const Response&) const = default;
};

using WireMessage = std::variant<Submit, Challenge, Response>;

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Bytes serialize_wire(const WireMessage& message);
// Throws WireError on unknown tags, truncation, trailing bytes, or a field
// layout that does not match the (protocol, index) pair.
WireMessage parse_wire(std::span<const std::uint8_t> bytes);

enum class RejectReason : std::uint8_t {
  UnknownSession,
  NonceMismatch,
  HashMismatch,
  TokenExpired,
  BadSignature,
  Overload,
};

enum class AbortReason : std::uint8_t {
  CannotDecode,
  TamperedChallenge,
  UnknownSigner,
};

const char* to_string(RejectReason reason);
const char* to_string(AbortReason reason);

struct CenterDecision {
  enum class Kind : std::uint8_t { Deliver, Reject, ChallengeSent };
  Kind kind = Kind::Reject;
  std::string recipient;                // Deliver
  Bytes payload;                        // Deliver
  RejectReason reason = RejectReason::UnknownSession;  // Reject
};

struct SubmitOutcome {
  CenterDecision decision;
  std::optional<Challenge> challenge;  // present iff kind == ChallengeSent
};

struct CenterPolicy {
  std::int64_t ttl = 100;     // records and tokens live while
                              // created_at + ttl >= now (inclusive)
  bool session_reuse = false; // P1/P3: a delivered sender-recipient pair
                              // skips the challenge while its entry lives
  std::size_t max_records = 1u << 20;  // submit beyond this is rejected
};

class MessageCenter {
 public:
  MessageCenter(std::string id, CryptoProvider& crypto,
                CenterPolicy policy = {});

  const std::string& id() const { return id_; }
  KeyId signing_key() const { return signing_key_; }
  KeyId captcha_key() const { return captcha_key_; }
  const CenterPolicy& policy() const { return policy_; }

  // M1. Issues a challenge (idempotently re-sending the stored one while a
  // record for the same (sender, recipient, payload) is live), rejects with
  // Overload when the store is full, or delivers outright under
  // session_reuse for an already-verified pair.
  SubmitOutcome on_submit(const Submit& submit, std::int64_t now);

  // M3. Verifies and either delivers or rejects with a reason.
  CenterDecision on_response(const Response& response, std::int64_t now);

  // Evicts expired records; returns how many were removed.
  std::size_t session_gc(std::int64_t now);

  AuthToken token_issue(Protocol protocol, const std::string& sender,
                        const std::string& recipient, KeyId session_key,
                        std::int64_t now);
  bool token_validate(const AuthToken& token, const std::string& sender,
                      const std::string& recipient, std::int64_t now);

  std::size_t live_records(std::int64_t now) const;

 private:
  enum class TokenCheck : std::uint8_t { Ok, BadSignature, Expired };
  struct SessionRecord {
    KeyId session_key = 0;
    std::uint64_t nonce = 0;
    std::int64_t created_at = 0;
    Bytes payload;
    Digest triple_hash{};
    Challenge challenge;
  };
  struct PendingNote {
    std::int64_t created_at = 0;
    Challenge challenge;
  };
  using RecordKey = std::tuple<std::string, std::string, Digest>;

  bool live(std::int64_t created_at, std::int64_t now) const {
    return created_at + policy_.ttl >= now;
  }
  CaptchaEnvelope make_envelope(KeyId session_key);
  TokenCheck token_check(const AuthToken& token, const std::string& sender,
                         const std::string& recipient, std::int64_t now);
  CenterDecision respond_session(const Response& response, std::int64_t now);
  CenterDecision respond_token(const Response& response, std::int64_t now);

  std::string id_;
  CryptoProvider& crypto_;
  CenterPolicy policy_;
  KeyId signing_key_;
  KeyId captcha_key_;
  std::map<RecordKey, SessionRecord> sessions_;
  std::map<RecordKey, PendingNote> pending_;
  std::map<std::pair<std::string, std::string>, std::int64_t> verified_;
};

struct Abort {
  AbortReason reason = AbortReason::CannotDecode;
};

// A sender tracks its single outstanding submission; a fresh submit
// replaces the previous one.
class SenderAgent {
 public:
  SenderAgent(std::string id, CryptoProvider& crypto, KeyId center_signing_key,
              KeyId center_captcha_key);

  const std::string& id() const { return id_; }

  Submit make_submit(Protocol protocol, const std::string& recipient,
                     Bytes payload);

  // can_decode gates the captcha envelope. Signature checks run first
  // (P3/P4), then plaintext tamper checks (P4), then the decode gate, then
  // sealed-content tamper checks (P1/P2).
  std::variant<Response, Abort> on_challenge(const Challenge& challenge,
                                             bool can_decode);

 private:
  std::string id_;
  CryptoProvider& crypto_;
  KeyId center_signing_key_;
  KeyId center_captcha_key_;
  std::string out_recipient_;
  Bytes out_payload_;
};

// Shared hashing helpers so center and sender derive identical digests.
Digest triple_hash(CryptoProvider& crypto, const std::string& sender,
                   const std::string& recipient,
                   std::span<const std::uint8_t> payload);
Digest pair_hash(CryptoProvider& crypto, const std::string& sender,
                 const std::string& recipient);
Bytes token_body(const AuthToken& token);

}  // namespace hybridspam
