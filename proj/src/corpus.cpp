#include "hybridspam/corpus.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace hybridspam {
namespace {

// Payloads live on their own substream so they can be regenerated from
// (seed, id) without replaying the data-dependent kappa draws.
constexpr std::uint64_t kPayloadSalt = 0x7061796c6f616416ull;

std::array<std::uint8_t, 16> payload_for(std::uint64_t seed, std::uint64_t id) {
  Rng stream = Rng::substream(seed ^ kPayloadSalt, id);
  return stream.bytes16();
}

[[noreturn]] void fail(const std::string& what, std::size_t line) {
  throw CorpusParseError(what, line);
}

}  // namespace

const char* to_string(ClassLabel label) {
  return label == ClassLabel::Normal ? "normal" : "spam";
}

void MixtureParams::validate() const {
  if (!(spam_share >= 0.0 && spam_share <= 1.0))
    throw std::invalid_argument("spam share must lie in [0, 1]");
  for (double shape : {spam_alpha, spam_beta, normal_alpha, normal_beta})
    if (!(shape > 0.0) || !std::isfinite(shape))
      throw std::invalid_argument("beta shape parameters must be positive");
  if (n < 1) throw std::invalid_argument("corpus size must be at least 1");
}

CorpusParseError::CorpusParseError(const std::string& what, std::size_t line)
    : std::runtime_error(what + " at line " + std::to_string(line)),
      line_(line) {}

ClassLabel sample_class(Rng& rng, const MixtureParams& params) {
  return rng.uniform01() < params.normal_share() ? ClassLabel::Normal
                                                 : ClassLabel::Spam;
}

double sample_kappa(Rng& rng, ClassLabel truth, const MixtureParams& params) {
  if (truth == ClassLabel::Normal)
    return rng.beta(params.normal_alpha, params.normal_beta);
  return rng.beta(params.spam_alpha, params.spam_beta);
}

Corpus generate_corpus(const MixtureParams& params, std::uint64_t seed) {
  params.validate();
  Corpus corpus;
  corpus.params = params;
  corpus.seed = seed;
  corpus.messages.resize(params.n);
  for (std::uint64_t i = 0; i < params.n; ++i) {
    Rng stream = Rng::substream(seed, i);
    Message& m = corpus.messages[i];
    m.id = i;
    m.truth = sample_class(stream, params);
    m.kappa = sample_kappa(stream, m.truth, params);
    m.payload = payload_for(seed, i);
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  out << "id,truth,kappa\n";
  char buf[64];
  for (const Message& m : corpus.messages) {
    std::snprintf(buf, sizeof buf, "%.17g", m.kappa);
    out << m.id << ',' << to_string(m.truth) << ',' << buf << '\n';
  }
}

void write_corpus_metadata(const Corpus& corpus, std::ostream& out) {
  nlohmann::ordered_json j;
  j["n"] = corpus.messages.size();
  j["spam_share"] = corpus.params.spam_share;
  j["spam_alpha"] = corpus.params.spam_alpha;
  j["spam_beta"] = corpus.params.spam_beta;
  j["normal_alpha"] = corpus.params.normal_alpha;
  j["normal_beta"] = corpus.params.normal_beta;
  j["seed"] = corpus.seed;
  j["rng"] = kRngAlgorithmId;
  out << j.dump(2) << '\n';
}

namespace {

Corpus read_corpus_rows(std::istream& csv) {
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(csv, line)) fail("missing header", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,truth,kappa") fail("malformed header", lineno);

  while (std::getline(csv, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (csv.peek() == std::char_traits<char>::eof()) break;
      fail("empty row", lineno);
    }

    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                             : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      fail("malformed row", lineno);

    const char* idb = line.data();
    const char* ide = line.data() + c1;
    std::uint64_t id = 0;
    auto idr = std::from_chars(idb, ide, id);
    if (idr.ec != std::errc() || idr.ptr != ide) fail("bad id", lineno);

    std::string label = line.substr(c1 + 1, c2 - c1 - 1);
    ClassLabel truth;
    if (label == "normal")
      truth = ClassLabel::Normal;
    else if (label == "spam")
      truth = ClassLabel::Spam;
    else
      fail("unknown class label", lineno);

    const char* kb = line.data() + c2 + 1;
    const char* ke = line.data() + line.size();
    double kappa = 0.0;
    auto kr = std::from_chars(kb, ke, kappa);
    if (kr.ec != std::errc() || kr.ptr != ke) fail("bad kappa", lineno);
    if (!(kappa >= 0.0 && kappa <= 1.0)) fail("kappa out of range", lineno);

    std::uint64_t expected = corpus.messages.size();
    if (id < expected) fail("duplicate id", lineno);
    if (id > expected) fail("non-contiguous id", lineno);

    corpus.messages.push_back(Message{id, truth, kappa, {}});
  }
  return corpus;
}

}  // namespace

Corpus read_corpus(std::istream& csv) {
  Corpus corpus = read_corpus_rows(csv);
  corpus.params.n = corpus.messages.size();
  for (Message& m : corpus.messages) m.payload = payload_for(corpus.seed, m.id);
  return corpus;
}

Corpus read_corpus(std::istream& csv, std::istream& metadata) {
  Corpus corpus = read_corpus_rows(csv);
  nlohmann::json j;
  try {
    metadata >> j;
    corpus.params.spam_share = j.at("spam_share").get<double>();
    corpus.params.spam_alpha = j.at("spam_alpha").get<double>();
    corpus.params.spam_beta = j.at("spam_beta").get<double>();
    corpus.params.normal_alpha = j.at("normal_alpha").get<double>();
    corpus.params.normal_beta = j.at("normal_beta").get<double>();
    corpus.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CorpusParseError(std::string("malformed metadata: ") + e.what(), 0);
  }
  corpus.params.n = corpus.messages.size();
  for (Message& m : corpus.messages) m.payload = payload_for(corpus.seed, m.id);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& csv_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  write_corpus(corpus, csv);
  std::string meta_path = csv_path + ".meta.json";
  std::ofstream meta(meta_path, std::ios::binary);
  if (!meta) throw std::runtime_error("cannot open " + meta_path);
  write_corpus_metadata(corpus, meta);
}

Corpus load_corpus(const std::string& csv_path) {
  std::ifstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  std::ifstream meta(csv_path + ".meta.json", std::ios::binary);
  if (meta) return read_corpus(csv, meta);
  return read_corpus(csv);
}

}  // namespace hybridspam
