#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace newsgate {

// Document class: 1 positive, -1 negative, 0 neutral.
enum class PolarityLabel : int {
  Negative = -1,
  Neutral = 0,
  Positive = 1,
};

// Accepts exactly {1, -1, 0}; anything else is a DataError.
PolarityLabel polarity_from_int(int value);

inline int to_int(PolarityLabel label) { return static_cast<int>(label); }

// One news item. weak_label is the class assigned by the rule-based
// scorer; gold_label is a human annotation when one exists.
struct NewsDocument {
  std::string id;
  std::string title;
  std::string body;
  std::optional<std::string> source;
  std::optional<PolarityLabel> gold_label;
  std::optional<PolarityLabel> weak_label;

  // Title and body concatenated (title first, single space); all scoring
  // and classification runs over this.
  std::string text() const;
};

struct Token {
  std::string surface;     // original whitespace-delimited chunk
  std::string normalized;  // lowercased, edge punctuation stripped
  bool is_allcaps = false; // >= 2 letters, all uppercase
  std::size_t position = 0;
};

struct TokenSequence {
  std::vector<Token> tokens;
  int exclamation_count = 0;  // '!' characters stripped during tokenization
  int question_count = 0;     // '?' characters stripped during tokenization

  bool empty() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }
};

// Term index shared by the DTM and the embedding lookup. Index 0 is
// padding, index 1 is out-of-vocabulary; real terms start at 2 and are
// ordered by descending corpus frequency, ties broken lexicographically.
class Vocabulary {
 public:
  static constexpr std::size_t kPaddingIndex = 0;
  static constexpr std::size_t kOovIndex = 1;
  static constexpr std::size_t kFirstTermIndex = 2;

  Vocabulary() = default;

  // Terms in index order (index = position + 2), each with its corpus
  // frequency. Frequencies below min_count are rejected.
  Vocabulary(std::vector<std::pair<std::string, std::uint64_t>> ordered_terms,
             std::uint64_t min_count);

  std::size_t index_of(const std::string& normalized) const;  // absent -> kOovIndex
  bool contains(const std::string& normalized) const;
  const std::string& token_at(std::size_t index) const;  // index >= 2
  std::uint64_t frequency_of(const std::string& normalized) const;  // absent -> 0

  std::size_t size() const { return terms_.size(); }       // terms only
  std::size_t dimension() const { return terms_.size() + kFirstTermIndex; }
  std::uint64_t min_count() const { return min_count_; }

  // (term, frequency) pairs in index order.
  const std::vector<std::pair<std::string, std::uint64_t>>& entries() const {
    return terms_;
  }

  // FNV-1a over the canonical serialization; used by model containers to
  // reject vectorizer mismatches.
  std::uint64_t content_hash() const;

 private:
  std::vector<std::pair<std::string, std::uint64_t>> terms_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t min_count_ = 1;
};

enum class CorpusFormat { Jsonl, Tsv };

CorpusFormat corpus_format_from_string(const std::string& name);
std::string to_string(CorpusFormat format);

struct DocumentSet {
  std::vector<NewsDocument> documents;
  std::string provenance;  // source path or a synthetic tag

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
};

// jsonl: one object per line with id/title/body, optional source,
// optional label and weak_label in {1,-1,0}.
// tsv: header `id<TAB>title<TAB>body<TAB>label`, label column may be empty.
DocumentSet load_corpus(const std::string& path, CorpusFormat format);
DocumentSet parse_corpus(std::istream& in, CorpusFormat format,
                         const std::string& provenance);
void save_corpus(const DocumentSet& docs, const std::string& path,
                 CorpusFormat format = CorpusFormat::Jsonl);
void write_corpus(const DocumentSet& docs, std::ostream& out,
                  CorpusFormat format = CorpusFormat::Jsonl);
std::string document_to_jsonl(const NewsDocument& doc);

// Deterministic whitespace tokenizer. Leading/trailing non-alphanumeric
// characters are stripped from each chunk (internal apostrophes/hyphens
// survive); stripped '!' and '?' are counted document-wide; chunks that
// strip to nothing are dropped.
TokenSequence tokenize(std::string_view text);

// Normalized tokens with corpus frequency >= min_count, over title+body
// of every document.
Vocabulary build_vocabulary(const DocumentSet& docs, std::uint64_t min_count);

// Deterministic partition with |test| = round(test_fraction * n),
// stratified by weak_label whenever any document carries one.
std::pair<DocumentSet, DocumentSet> train_test_split(const DocumentSet& docs,
                                                     double test_fraction,
                                                     std::uint64_t seed);

}  // namespace newsgate
