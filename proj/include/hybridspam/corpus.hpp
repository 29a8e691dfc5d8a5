#pragma once

// Synthetic message corpus: each message carries a ground-truth class and a
// normality score kappa in [0, 1] drawn from a per-class Beta distribution.
// Generation is deterministic in (params, seed) and order-independent:
// message i draws only from substream (seed, i).

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridspam/rng.hpp"

namespace hybridspam {

enum class ClassLabel : std::uint8_t { Normal, Spam };
enum class SenderKind : std::uint8_t { Human, Bot };

const char* to_string(ClassLabel label);

struct MixtureParams {
  double spam_share = 0.1457;
  double spam_alpha = 3.0;
  double spam_beta = 5.0;
  double normal_alpha = 5.0;
  double normal_beta = 2.0;
  std::uint64_t n = 5000;

  // Shares are stored once; the pair always sums to 1 exactly.
  double normal_share() const { return 1.0 - spam_share; }

  // Throws std::invalid_argument. Generation requires n >= 1; corpora read
  // back from files may legitimately hold fewer messages.
  void validate() const;

  bool operator==(const MixtureParams&) const = default;
};

struct Message {
  std::uint64_t id = 0;
  ClassLabel truth = ClassLabel::Normal;
  double kappa = 0.0;
  std::array<std::uint8_t, 16> payload{};

  SenderKind sender_kind() const {
    return truth == ClassLabel::Normal ? SenderKind::Human : SenderKind::Bot;
  }

  bool operator==(const Message&) const = default;
};

struct Corpus {
  MixtureParams params;
  std::uint64_t seed = 0;
  std::vector<Message> messages;

  bool operator==(const Corpus&) const = default;
};

class CorpusParseError : public std::runtime_error {
 public:
  CorpusParseError(const std::string& what, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// One 64-bit draw per call, Normal with probability normal_share().
ClassLabel sample_class(Rng& rng, const MixtureParams& params);

// Beta draw under the class-conditional shape pair.
double sample_kappa(Rng& rng, ClassLabel truth, const MixtureParams& params);

Corpus generate_corpus(const MixtureParams& params, std::uint64_t seed);

// CSV with header "id,truth,kappa"; kappa is printed with 17 significant
// digits so read(write(c)) reproduces the exact doubles.
void write_corpus(const Corpus& corpus, std::ostream& out);

// JSON sidecar: mixture parameters, seed, RNG algorithm id.
void write_corpus_metadata(const Corpus& corpus, std::ostream& out);

// Reads the CSV alone. Params keep defaults except n (set to the message
// count), seed is 0, and payloads are regenerated from substream (0, id).
// Throws CorpusParseError naming the offending line.
Corpus read_corpus(std::istream& csv);

// Reads CSV plus sidecar; params and seed come from the sidecar and
// payloads are regenerated from it, so this inverts write_corpus +
// write_corpus_metadata field-for-field.
Corpus read_corpus(std::istream& csv, std::istream& metadata);

// Path-level convenience: csv_path plus "<csv_path>.meta.json".
void save_corpus(const Corpus& corpus, const std::string& csv_path);
Corpus load_corpus(const std::string& csv_path);

}  // namespace hybridspam
