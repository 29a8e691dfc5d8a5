#include "hybridspam/challenge.hpp"

#include <algorithm>

#include "hybridspam/rng.hpp"

namespace hybridspam {
namespace {

constexpr std::uint64_t kSymSalt = 0x73796d6b65793131ull;
constexpr std::uint64_t kSigSalt = 0x7369676e6b657931ull;

void append_u32le(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_u64le(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

Bytes u64_bytes(std::uint64_t v) {
  Bytes out;
  append_u64le(out, v);
  return out;
}

std::uint64_t u64_from(std::span<const std::uint8_t> bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(bytes[static_cast<std::size_t>(i)])
         << (8 * i);
  return v;
}

void append_field(Bytes& out, std::span<const std::uint8_t> data) {
  append_u32le(out, static_cast<std::uint32_t>(data.size()));
  out.insert(out.end(), data.begin(), data.end());
}

void append_field(Bytes& out, const std::string& s) {
  append_field(out, std::span<const std::uint8_t>(
                        reinterpret_cast<const std::uint8_t*>(s.data()),
                        s.size()));
}

struct FieldReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  Bytes next() {
    if (pos + 4 > bytes.size()) throw WireError("truncated wire message");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
      len |= static_cast<std::uint32_t>(bytes[pos + static_cast<std::size_t>(i)])
             << (8 * i);
    pos += 4;
    if (pos + len > bytes.size()) throw WireError("truncated wire message");
    Bytes out(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
              bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
    return out;
  }

  std::string next_string() {
    Bytes b = next();
    return std::string(b.begin(), b.end());
  }

  std::uint64_t next_u64() {
    Bytes b = next();
    if (b.size() != 8) throw WireError("bad integer field width");
    return u64_from(b);
  }

  template <std::size_t N>
  std::array<std::uint8_t, N> next_array() {
    Bytes b = next();
    if (b.size() != N) throw WireError("bad fixed field width");
    std::array<std::uint8_t, N> out{};
    std::copy(b.begin(), b.end(), out.begin());
    return out;
  }

  void finish() const {
    if (pos != bytes.size()) throw WireError("trailing bytes");
  }
};

void append_token(Bytes& out, const std::optional<AuthToken>& token) {
  if (!token) throw WireError("missing token");
  append_field(out, token->key_material);
  append_field(out, token->pair_hash);
  append_field(out, u64_bytes(static_cast<std::uint64_t>(token->issued_at)));
  append_field(out, token->signature);
}

AuthToken read_token(FieldReader& r) {
  AuthToken token;
  token.key_material = r.next();
  token.pair_hash = r.next_array<8>();
  token.issued_at = static_cast<std::int64_t>(r.next_u64());
  token.signature = r.next_array<8>();
  return token;
}

Bytes lp_concat(std::initializer_list<std::span<const std::uint8_t>> parts) {
  Bytes out;
  for (auto part : parts) append_field(out, part);
  return out;
}

std::span<const std::uint8_t> as_span(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::span<const std::uint8_t> as_span(const Bytes& b) {
  return {b.data(), b.size()};
}

Bytes p3_challenge_body(const CaptchaEnvelope& envelope, std::uint64_t nonce) {
  Bytes body = lp_concat({as_span(envelope.wrapped)});
  append_u64le(body, nonce);
  return body;
}

}  // namespace

const char* to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::P1: return "p1";
    case Protocol::P2: return "p2";
    case Protocol::P3: return "p3";
    case Protocol::P4: return "p4";
  }
  return "?";
}

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::UnknownSession: return "unknown_session";
    case RejectReason::NonceMismatch: return "nonce_mismatch";
    case RejectReason::HashMismatch: return "hash_mismatch";
    case RejectReason::TokenExpired: return "token_expired";
    case RejectReason::BadSignature: return "bad_signature";
    case RejectReason::Overload: return "overload";
  }
  return "?";
}

const char* to_string(AbortReason reason) {
  switch (reason) {
    case AbortReason::CannotDecode: return "cannot_decode";
    case AbortReason::TamperedChallenge: return "tampered_challenge";
    case AbortReason::UnknownSigner: return "unknown_signer";
  }
  return "?";
}

ToyCryptoProvider::ToyCryptoProvider(std::uint64_t seed) : seed_(seed) {}

Digest ToyCryptoProvider::hash(std::span<const std::uint8_t> data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : data) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  Digest out{};
  for (int i = 0; i < 8; ++i)
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(h >> (8 * i));
  return out;
}

Bytes ToyCryptoProvider::sym_encrypt(KeyId key,
                                     std::span<const std::uint8_t> data) {
  Bytes out(data.begin(), data.end());
  Rng stream(mix64(key ^ kSymSalt));
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t w = stream.next_u64();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i)
      out[i] ^= static_cast<std::uint8_t>(w >> (8 * b));
  }
  return out;
}

Bytes ToyCryptoProvider::sym_decrypt(KeyId key,
                                     std::span<const std::uint8_t> data) {
  return sym_encrypt(key, data);
}

Signature ToyCryptoProvider::sign(KeyId keypair,
                                  std::span<const std::uint8_t> data) {
  Digest d = hash(data);
  std::uint64_t s = mix64(u64_from(d) ^ mix64(keypair ^ kSigSalt));
  Signature out{};
  for (int i = 0; i < 8; ++i)
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(s >> (8 * i));
  return out;
}

bool ToyCryptoProvider::verify(KeyId keypair,
                               std::span<const std::uint8_t> data,
                               const Signature& sig) {
  return sign(keypair, data) == sig;
}

std::uint64_t ToyCryptoProvider::fresh_nonce() {
  return mix64(seed_ + 0x6e6f6e6365ull + ++nonce_counter_);
}

KeyId ToyCryptoProvider::fresh_key() {
  return mix64(seed_ + (++key_counter_ << 1));
}

KeyId ToyCryptoProvider::fresh_keypair() {
  return mix64(seed_ + (++key_counter_ << 1) + 1);
}

Digest triple_hash(CryptoProvider& crypto, const std::string& sender,
                   const std::string& recipient,
                   std::span<const std::uint8_t> payload) {
  Bytes body = lp_concat({as_span(sender), as_span(recipient), payload});
  return crypto.hash(as_span(body));
}

Digest pair_hash(CryptoProvider& crypto, const std::string& sender,
                 const std::string& recipient) {
  Bytes body = lp_concat({as_span(sender), as_span(recipient)});
  return crypto.hash(as_span(body));
}

Bytes token_body(const AuthToken& token) {
  Bytes body;
  append_field(body, token.key_material);
  body.insert(body.end(), token.pair_hash.begin(), token.pair_hash.end());
  append_u64le(body, static_cast<std::uint64_t>(token.issued_at));
  return body;
}

Bytes serialize_wire(const WireMessage& message) {
  Bytes out;
  if (const Submit* m = std::get_if<Submit>(&message)) {
    out.push_back(static_cast<std::uint8_t>(m->protocol));
    out.push_back(1);
    append_field(out, m->sender);
    append_field(out, m->recipient);
    append_field(out, m->payload);
    return out;
  }
  if (const Challenge* m = std::get_if<Challenge>(&message)) {
    out.push_back(static_cast<std::uint8_t>(m->protocol));
    out.push_back(2);
    append_field(out, m->center);
    append_field(out, m->sender);
    switch (m->protocol) {
      case Protocol::P1:
        append_field(out, m->envelope.wrapped);
        append_field(out, m->sealed);
        break;
      case Protocol::P2:
        append_field(out, m->envelope.wrapped);
        append_field(out, m->sealed);
        append_token(out, m->token);
        break;
      case Protocol::P3:
        append_field(out, m->envelope.wrapped);
        append_field(out, u64_bytes(m->nonce_plain));
        if (!m->body_sig) throw WireError("missing signature");
        append_field(out, *m->body_sig);
        break;
      case Protocol::P4:
        append_token(out, m->token);
        append_field(out, m->payload_echo);
        if (!m->payload_echo_sig) throw WireError("missing signature");
        append_field(out, *m->payload_echo_sig);
        break;
    }
    return out;
  }
  const Response& m = std::get<Response>(message);
  out.push_back(static_cast<std::uint8_t>(m.protocol));
  out.push_back(3);
  append_field(out, m.sender);
  append_field(out, m.recipient);
  switch (m.protocol) {
    case Protocol::P1:
    case Protocol::P3:
      append_field(out, m.sealed);
      break;
    case Protocol::P2:
    case Protocol::P4:
      append_field(out, m.enc_payload);
      append_token(out, m.token);
      break;
  }
  return out;
}

WireMessage parse_wire(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) throw WireError("truncated wire message");
  std::uint8_t ptag = bytes[0];
  std::uint8_t mtag = bytes[1];
  if (ptag < 1 || ptag > 4) throw WireError("unknown protocol tag");
  if (mtag < 1 || mtag > 3) throw WireError("unknown message tag");
  Protocol protocol = static_cast<Protocol>(ptag);
  FieldReader r{bytes.subspan(2)};

  if (mtag == 1) {
    Submit m;
    m.protocol = protocol;
    m.sender = r.next_string();
    m.recipient = r.next_string();
    m.payload = r.next();
    r.finish();
    return m;
  }
  if (mtag == 2) {
    Challenge m;
    m.protocol = protocol;
    m.center = r.next_string();
    m.sender = r.next_string();
    switch (protocol) {
      case Protocol::P1:
        m.envelope.wrapped = r.next();
        m.sealed = r.next();
        break;
      case Protocol::P2:
        m.envelope.wrapped = r.next();
        m.sealed = r.next();
        m.token = read_token(r);
        break;
      case Protocol::P3:
        m.envelope.wrapped = r.next();
        m.nonce_plain = r.next_u64();
        m.body_sig = r.next_array<8>();
        break;
      case Protocol::P4:
        m.token = read_token(r);
        m.envelope.wrapped = m.token->key_material;
        m.payload_echo = r.next();
        m.payload_echo_sig = r.next_array<8>();
        break;
    }
    r.finish();
    return m;
  }
  Response m;
  m.protocol = protocol;
  m.sender = r.next_string();
  m.recipient = r.next_string();
  switch (protocol) {
    case Protocol::P1:
    case Protocol::P3:
      m.sealed = r.next();
      break;
    case Protocol::P2:
    case Protocol::P4:
      m.enc_payload = r.next();
      m.token = read_token(r);
      break;
  }
  r.finish();
  return m;
}

MessageCenter::MessageCenter(std::string id, CryptoProvider& crypto,
                             CenterPolicy policy)
    : id_(std::move(id)),
      crypto_(crypto),
      policy_(policy),
      signing_key_(crypto.fresh_keypair()),
      captcha_key_(crypto.fresh_key()) {}

CaptchaEnvelope MessageCenter::make_envelope(KeyId session_key) {
  Bytes plain = u64_bytes(session_key);
  return CaptchaEnvelope{crypto_.sym_encrypt(captcha_key_, as_span(plain))};
}

AuthToken MessageCenter::token_issue(Protocol protocol,
                                     const std::string& sender,
                                     const std::string& recipient,
                                     KeyId session_key, std::int64_t now) {
  AuthToken token;
  if (protocol == Protocol::P2)
    token.key_material = u64_bytes(session_key);
  else
    token.key_material = make_envelope(session_key).wrapped;
  token.pair_hash = pair_hash(crypto_, sender, recipient);
  token.issued_at = now;
  Bytes body = token_body(token);
  token.signature = crypto_.sign(signing_key_, as_span(body));
  return token;
}

MessageCenter::TokenCheck MessageCenter::token_check(
    const AuthToken& token, const std::string& sender,
    const std::string& recipient, std::int64_t now) {
  Bytes body = token_body(token);
  if (!crypto_.verify(signing_key_, as_span(body), token.signature))
    return TokenCheck::BadSignature;
  if (token.pair_hash != pair_hash(crypto_, sender, recipient))
    return TokenCheck::BadSignature;
  if (!live(token.issued_at, now)) return TokenCheck::Expired;
  return TokenCheck::Ok;
}

bool MessageCenter::token_validate(const AuthToken& token,
                                   const std::string& sender,
                                   const std::string& recipient,
                                   std::int64_t now) {
  return token_check(token, sender, recipient, now) == TokenCheck::Ok;
}

SubmitOutcome MessageCenter::on_submit(const Submit& submit, std::int64_t now) {
  SubmitOutcome out;
  const Protocol protocol = submit.protocol;
  const bool session_based =
      protocol == Protocol::P1 || protocol == Protocol::P3;

  if (policy_.session_reuse && session_based) {
    auto v = verified_.find({submit.sender, submit.recipient});
    if (v != verified_.end() && live(v->second, now)) {
      v->second = now;
      out.decision.kind = CenterDecision::Kind::Deliver;
      out.decision.recipient = submit.recipient;
      out.decision.payload = submit.payload;
      return out;
    }
  }

  const Digest th =
      triple_hash(crypto_, submit.sender, submit.recipient,
                  as_span(submit.payload));
  const RecordKey key{submit.sender, submit.recipient, th};

  if (session_based) {
    auto it = sessions_.find(key);
    if (it != sessions_.end()) {
      if (live(it->second.created_at, now)) {
        out.decision.kind = CenterDecision::Kind::ChallengeSent;
        out.challenge = it->second.challenge;
        return out;
      }
      sessions_.erase(it);
    }
  } else {
    auto it = pending_.find(key);
    if (it != pending_.end()) {
      if (live(it->second.created_at, now)) {
        out.decision.kind = CenterDecision::Kind::ChallengeSent;
        out.challenge = it->second.challenge;
        return out;
      }
      pending_.erase(it);
    }
  }

  if (sessions_.size() + pending_.size() >= policy_.max_records) {
    out.decision.kind = CenterDecision::Kind::Reject;
    out.decision.reason = RejectReason::Overload;
    return out;
  }

  const KeyId session_key = crypto_.fresh_key();
  Challenge ch;
  ch.protocol = protocol;
  ch.center = id_;
  ch.sender = submit.sender;

  switch (protocol) {
    case Protocol::P1: {
      const std::uint64_t nonce = crypto_.fresh_nonce();
      ch.envelope = make_envelope(session_key);
      Bytes plain(th.begin(), th.end());
      append_u64le(plain, nonce);
      ch.sealed = crypto_.sym_encrypt(session_key, as_span(plain));
      sessions_[key] =
          SessionRecord{session_key, nonce, now, submit.payload, th, ch};
      break;
    }
    case Protocol::P3: {
      const std::uint64_t nonce = crypto_.fresh_nonce();
      ch.envelope = make_envelope(session_key);
      ch.nonce_plain = nonce;
      Bytes body = p3_challenge_body(ch.envelope, nonce);
      ch.body_sig = crypto_.sign(signing_key_, as_span(body));
      sessions_[key] =
          SessionRecord{session_key, nonce, now, submit.payload, th, ch};
      break;
    }
    case Protocol::P2: {
      ch.envelope = make_envelope(session_key);
      Bytes plain(th.begin(), th.end());
      ch.sealed = crypto_.sym_encrypt(session_key, as_span(plain));
      ch.token = token_issue(Protocol::P2, submit.sender, submit.recipient,
                             session_key, now);
      pending_[key] = PendingNote{now, ch};
      break;
    }
    case Protocol::P4: {
      ch.token = token_issue(Protocol::P4, submit.sender, submit.recipient,
                             session_key, now);
      ch.envelope.wrapped = ch.token->key_material;
      ch.payload_echo = submit.payload;
      ch.payload_echo_sig = crypto_.sign(signing_key_, as_span(submit.payload));
      pending_[key] = PendingNote{now, ch};
      break;
    }
  }

  out.decision.kind = CenterDecision::Kind::ChallengeSent;
  out.challenge = ch;
  return out;
}

CenterDecision MessageCenter::respond_session(const Response& response,
                                              std::int64_t now) {
  bool nonce_mismatch = false;
  bool hash_mismatch = false;

  for (auto it = sessions_.begin(); it != sessions_.end(); ++it) {
    const auto& [sender, recipient, th] = it->first;
    if (sender != response.sender) continue;
    if (response.protocol == Protocol::P3 && recipient != response.recipient)
      continue;
    SessionRecord& rec = it->second;
    if (rec.challenge.protocol != response.protocol) continue;
    if (!live(rec.created_at, now)) continue;

    Bytes plain = crypto_.sym_decrypt(rec.session_key, as_span(response.sealed));
    if (response.protocol == Protocol::P1) {
      if (plain.size() != 16) continue;
      Digest d{};
      std::copy(plain.begin(), plain.begin() + 8, d.begin());
      std::uint64_t n = u64_from(std::span(plain).subspan(8));
      const bool hash_ok = d == rec.triple_hash;
      const bool nonce_ok = n == rec.nonce + 1;
      if (hash_ok && nonce_ok) {
        CenterDecision decision;
        decision.kind = CenterDecision::Kind::Deliver;
        decision.recipient = recipient;
        decision.payload = rec.payload;
        if (policy_.session_reuse) verified_[{sender, recipient}] = now;
        sessions_.erase(it);
        return decision;
      }
      if (hash_ok) nonce_mismatch = true;
      else if (nonce_ok) hash_mismatch = true;
    } else {
      if (plain.size() != 8) continue;
      std::uint64_t n = u64_from(std::span(plain));
      if (n == rec.nonce + 1) {
        CenterDecision decision;
        decision.kind = CenterDecision::Kind::Deliver;
        decision.recipient = recipient;
        decision.payload = rec.payload;
        if (policy_.session_reuse) verified_[{sender, recipient}] = now;
        sessions_.erase(it);
        return decision;
      }
      nonce_mismatch = true;
    }
  }

  CenterDecision decision;
  decision.kind = CenterDecision::Kind::Reject;
  if (nonce_mismatch)
    decision.reason = RejectReason::NonceMismatch;
  else if (hash_mismatch)
    decision.reason = RejectReason::HashMismatch;
  else
    decision.reason = RejectReason::UnknownSession;
  return decision;
}

CenterDecision MessageCenter::respond_token(const Response& response,
                                            std::int64_t now) {
  CenterDecision decision;
  decision.kind = CenterDecision::Kind::Reject;
  decision.reason = RejectReason::BadSignature;
  if (!response.token) return decision;

  switch (token_check(*response.token, response.sender, response.recipient,
                      now)) {
    case TokenCheck::BadSignature:
      return decision;
    case TokenCheck::Expired:
      decision.reason = RejectReason::TokenExpired;
      return decision;
    case TokenCheck::Ok:
      break;
  }

  KeyId session_key = 0;
  if (response.protocol == Protocol::P2) {
    if (response.token->key_material.size() != 8) return decision;
    session_key = u64_from(std::span(response.token->key_material));
  } else {
    Bytes plain =
        crypto_.sym_decrypt(captcha_key_, as_span(response.token->key_material));
    if (plain.size() != 8) return decision;
    session_key = u64_from(std::span(plain));
  }

  Bytes payload =
      crypto_.sym_decrypt(session_key, as_span(response.enc_payload));
  const Digest th =
      triple_hash(crypto_, response.sender, response.recipient,
                  as_span(payload));
  const RecordKey key{response.sender, response.recipient, th};

  auto it = pending_.find(key);
  if (it != pending_.end() && live(it->second.created_at, now)) {
    pending_.erase(it);
  } else {
    // An outstanding challenge for this pair with a different payload means
    // the response was altered in flight; a bare token resubmission (no
    // pending record at all) is legitimate.
    auto lo = pending_.lower_bound(
        {response.sender, response.recipient, Digest{}});
    for (; lo != pending_.end(); ++lo) {
      const auto& [sender, recipient, hash] = lo->first;
      if (sender != response.sender || recipient != response.recipient) break;
      if (live(lo->second.created_at, now)) {
        decision.reason = RejectReason::HashMismatch;
        return decision;
      }
    }
  }

  decision.kind = CenterDecision::Kind::Deliver;
  decision.recipient = response.recipient;
  decision.payload = payload;
  return decision;
}

CenterDecision MessageCenter::on_response(const Response& response,
                                          std::int64_t now) {
  if (response.protocol == Protocol::P1 || response.protocol == Protocol::P3)
    return respond_session(response, now);
  return respond_token(response, now);
}

std::size_t MessageCenter::session_gc(std::int64_t now) {
  std::size_t evicted = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (!live(it->second.created_at, now)) {
      it = sessions_.erase(it);
      ++evicted;
    } else {
      ++it;
    }
  }
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (!live(it->second.created_at, now)) {
      it = pending_.erase(it);
      ++evicted;
    } else {
      ++it;
    }
  }
  for (auto it = verified_.begin(); it != verified_.end();) {
    if (!live(it->second, now)) {
      it = verified_.erase(it);
      ++evicted;
    } else {
      ++it;
    }
  }
  return evicted;
}

std::size_t MessageCenter::live_records(std::int64_t now) const {
  std::size_t n = 0;
  for (const auto& [key, rec] : sessions_)
    if (live(rec.created_at, now)) ++n;
  for (const auto& [key, note] : pending_)
    if (live(note.created_at, now)) ++n;
  return n;
}

SenderAgent::SenderAgent(std::string id, CryptoProvider& crypto,
                         KeyId center_signing_key, KeyId center_captcha_key)
    : id_(std::move(id)),
      crypto_(crypto),
      center_signing_key_(center_signing_key),
      center_captcha_key_(center_captcha_key) {}

Submit SenderAgent::make_submit(Protocol protocol, const std::string& recipient,
                                Bytes payload) {
  out_recipient_ = recipient;
  out_payload_ = payload;
  return Submit{protocol, id_, recipient, std::move(payload)};
}

std::variant<Response, Abort> SenderAgent::on_challenge(
    const Challenge& challenge, bool can_decode) {
  // Signature checks come before everything else for the authenticated
  // variants: an unverifiable challenger is not answered at all.
  if (challenge.protocol == Protocol::P3) {
    if (!challenge.body_sig) return Abort{AbortReason::UnknownSigner};
    Bytes body = p3_challenge_body(challenge.envelope, challenge.nonce_plain);
    if (!crypto_.verify(center_signing_key_, as_span(body),
                        *challenge.body_sig))
      return Abort{AbortReason::UnknownSigner};
  }
  if (challenge.protocol == Protocol::P4) {
    if (!challenge.token) return Abort{AbortReason::TamperedChallenge};
    Bytes body = token_body(*challenge.token);
    if (!crypto_.verify(center_signing_key_, as_span(body),
                        challenge.token->signature))
      return Abort{AbortReason::UnknownSigner};
    if (!challenge.payload_echo_sig ||
        !crypto_.verify(center_signing_key_, as_span(challenge.payload_echo),
                        *challenge.payload_echo_sig))
      return Abort{AbortReason::TamperedChallenge};
    if (challenge.payload_echo != out_payload_)
      return Abort{AbortReason::TamperedChallenge};
  }

  if (!can_decode) return Abort{AbortReason::CannotDecode};
  Bytes key_plain =
      crypto_.sym_decrypt(center_captcha_key_, as_span(challenge.envelope.wrapped));
  if (key_plain.size() != 8) return Abort{AbortReason::TamperedChallenge};
  const KeyId session_key = u64_from(std::span(key_plain));

  Response response;
  response.protocol = challenge.protocol;
  response.sender = id_;

  switch (challenge.protocol) {
    case Protocol::P1: {
      Bytes plain = crypto_.sym_decrypt(session_key, as_span(challenge.sealed));
      if (plain.size() != 16) return Abort{AbortReason::TamperedChallenge};
      Digest d{};
      std::copy(plain.begin(), plain.begin() + 8, d.begin());
      const std::uint64_t nonce = u64_from(std::span(plain).subspan(8));
      if (d != triple_hash(crypto_, id_, out_recipient_, as_span(out_payload_)))
        return Abort{AbortReason::TamperedChallenge};
      Bytes reply(d.begin(), d.end());
      append_u64le(reply, nonce + 1);
      response.recipient = challenge.center;
      response.sealed = crypto_.sym_encrypt(session_key, as_span(reply));
      return response;
    }
    case Protocol::P2: {
      Bytes plain = crypto_.sym_decrypt(session_key, as_span(challenge.sealed));
      if (plain.size() != 8) return Abort{AbortReason::TamperedChallenge};
      Digest d{};
      std::copy(plain.begin(), plain.end(), d.begin());
      if (d != triple_hash(crypto_, id_, out_recipient_, as_span(out_payload_)))
        return Abort{AbortReason::TamperedChallenge};
      if (!challenge.token) return Abort{AbortReason::TamperedChallenge};
      response.recipient = out_recipient_;
      response.enc_payload = crypto_.sym_encrypt(session_key, as_span(out_payload_));
      response.token = challenge.token;
      return response;
    }
    case Protocol::P3: {
      response.recipient = out_recipient_;
      Bytes reply = u64_bytes(challenge.nonce_plain + 1);
      response.sealed = crypto_.sym_encrypt(session_key, as_span(reply));
      return response;
    }
    case Protocol::P4: {
      response.recipient = out_recipient_;
      response.enc_payload = crypto_.sym_encrypt(session_key, as_span(out_payload_));
      response.token = challenge.token;
      return response;
    }
  }
  return Abort{AbortReason::TamperedChallenge};
}

}  // namespace hybridspam
