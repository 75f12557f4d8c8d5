#include "newsgate/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "newsgate/errors.hpp"
#include "newsgate/rng.hpp"

namespace newsgate {

namespace {

bool is_space_char(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Multibyte UTF-8 units count as word characters; only ASCII punctuation
// is ever stripped.
bool is_word_char(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool all_letters_upper(std::string_view s, std::size_t* letter_count) {
  std::size_t letters = 0;
  for (char ch : s) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalpha(c)) {
      ++letters;
      if (!std::isupper(c)) {
        *letter_count = letters;
        return false;
      }
    }
  }
  *letter_count = letters;
  return true;
}

std::string location(const std::string& origin, std::size_t line) {
  std::ostringstream os;
  os << origin << ":" << line;
  return os.str();
}

std::optional<PolarityLabel> parse_label_text(const std::string& text,
                                              const std::string& where) {
  if (text.empty()) return std::nullopt;
  std::size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(text, &pos);
  } catch (const std::exception&) {
    throw DataError(where + ": unknown label \"" + text + "\"");
  }
  if (pos != text.size()) {
    throw DataError(where + ": unknown label \"" + text + "\"");
  }
  if (value != 1 && value != -1 && value != 0) {
    throw DataError(where + ": unknown label \"" + text + "\"");
  }
  return polarity_from_int(value);
}

std::optional<PolarityLabel> label_from_json(const nlohmann::json& j,
                                             const char* key,
                                             const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& field = j.at(key);
  int value = 0;
  if (field.is_number_integer()) {
    value = field.get<int>();
  } else if (field.is_string()) {
    return parse_label_text(field.get<std::string>(), where);
  } else {
    throw DataError(where + ": unknown label");
  }
  if (value != 1 && value != -1 && value != 0) {
    throw DataError(where + ": unknown label \"" + std::to_string(value) +
                    "\"");
  }
  return polarity_from_int(value);
}

void check_document(const NewsDocument& doc, const std::string& where,
                    std::unordered_set<std::string>& seen_ids) {
  if (doc.id.empty()) {
    throw DataError(where + ": document id is empty");
  }
  if (doc.title.empty() && doc.body.empty()) {
    throw DataError(where + ": document \"" + doc.id +
                    "\" has neither title nor body");
  }
  if (!seen_ids.insert(doc.id).second) {
    throw DataError(where + ": duplicate id \"" + doc.id + "\"");
  }
}

DocumentSet parse_jsonl(std::istream& in, const std::string& origin) {
  DocumentSet set;
  set.provenance = origin;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = line.find_first_not_of(" \t") == std::string::npos;
    if (blank) continue;
    const std::string where = location(origin, line_no);
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError(where + ": malformed record");
    }
    NewsDocument doc;
    if (!j.contains("id") || !j.at("id").is_string()) {
      throw DataError(where + ": malformed record (missing string id)");
    }
    doc.id = j.at("id").get<std::string>();
    if (j.contains("title") && j.at("title").is_string()) {
      doc.title = j.at("title").get<std::string>();
    }
    if (j.contains("body") && j.at("body").is_string()) {
      doc.body = j.at("body").get<std::string>();
    }
    if (j.contains("source") && j.at("source").is_string()) {
      doc.source = j.at("source").get<std::string>();
    }
    doc.gold_label = label_from_json(j, "label", where);
    doc.weak_label = label_from_json(j, "weak_label", where);
    check_document(doc, where, seen_ids);
    set.documents.push_back(std::move(doc));
  }
  return set;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

DocumentSet parse_tsv(std::istream& in, const std::string& origin) {
  DocumentSet set;
  set.provenance = origin;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw DataError(origin + ": missing tsv header");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_tabs(line) !=
      std::vector<std::string>{"id", "title", "body", "label"}) {
    throw DataError(origin + ":1: expected header id<TAB>title<TAB>body<TAB>label");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = location(origin, line_no);
    auto fields = split_tabs(line);
    if (fields.size() != 4) {
      throw DataError(where + ": malformed record (" +
                      std::to_string(fields.size()) + " fields, expected 4)");
    }
    NewsDocument doc;
    doc.id = fields[0];
    doc.title = fields[1];
    doc.body = fields[2];
    doc.gold_label = parse_label_text(fields[3], where);
    check_document(doc, where, seen_ids);
    set.documents.push_back(std::move(doc));
  }
  return set;
}

std::string escape_tsv(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '\t' || c == '\n' || c == '\r') {
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

PolarityLabel polarity_from_int(int value) {
  switch (value) {
    case 1:
      return PolarityLabel::Positive;
    case -1:
      return PolarityLabel::Negative;
    case 0:
      return PolarityLabel::Neutral;
    default:
      throw DataError("unknown label \"" + std::to_string(value) + "\"");
  }
}

std::string NewsDocument::text() const {
  if (title.empty()) return body;
  if (body.empty()) return title;
  return title + " " + body;
}

Vocabulary::Vocabulary(
    std::vector<std::pair<std::string, std::uint64_t>> ordered_terms,
    std::uint64_t min_count)
    : terms_(std::move(ordered_terms)), min_count_(min_count) {
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& [token, freq] = terms_[i];
    if (token.empty()) {
      throw DataError("vocabulary term is empty");
    }
    if (freq < min_count_) {
      throw DataError("vocabulary term \"" + token +
                      "\" has frequency below min_count");
    }
    if (!index_.emplace(token, i + kFirstTermIndex).second) {
      throw DataError("vocabulary term \"" + token + "\" is duplicated");
    }
  }
}

std::size_t Vocabulary::index_of(const std::string& normalized) const {
  auto it = index_.find(normalized);
  return it == index_.end() ? kOovIndex : it->second;
}

bool Vocabulary::contains(const std::string& normalized) const {
  return index_.count(normalized) != 0;
}

const std::string& Vocabulary::token_at(std::size_t index) const {
  if (index < kFirstTermIndex || index - kFirstTermIndex >= terms_.size()) {
    throw DataError("vocabulary index " + std::to_string(index) +
                    " is out of range");
  }
  return terms_[index - kFirstTermIndex].first;
}

std::uint64_t Vocabulary::frequency_of(const std::string& normalized) const {
  auto it = index_.find(normalized);
  if (it == index_.end()) return 0;
  return terms_[it->second - kFirstTermIndex].second;
}

std::uint64_t Vocabulary::content_hash() const {
  std::uint64_t hash = 14695981039346656037ULL;
  auto feed = [&hash](std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash ^= c;
      hash *= 1099511628211ULL;
    }
  };
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    feed(terms_[i].first);
    feed("\t");
    feed(std::to_string(i + kFirstTermIndex));
    feed("\t");
    feed(std::to_string(terms_[i].second));
    feed("\n");
  }
  return hash;
}

CorpusFormat corpus_format_from_string(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::Jsonl;
  if (name == "tsv") return CorpusFormat::Tsv;
  throw IoError("unknown corpus format \"" + name + "\" (expected jsonl or tsv)");
}

std::string to_string(CorpusFormat format) {
  return format == CorpusFormat::Jsonl ? "jsonl" : "tsv";
}

DocumentSet parse_corpus(std::istream& in, CorpusFormat format,
                         const std::string& provenance) {
  return format == CorpusFormat::Jsonl ? parse_jsonl(in, provenance)
                                       : parse_tsv(in, provenance);
}

DocumentSet load_corpus(const std::string& path, CorpusFormat format) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open corpus file \"" + path + "\"");
  }
  return parse_corpus(in, format, path);
}

std::string document_to_jsonl(const NewsDocument& doc) {
  nlohmann::json j;
  j["id"] = doc.id;
  j["title"] = doc.title;
  j["body"] = doc.body;
  if (doc.source) j["source"] = *doc.source;
  if (doc.gold_label) j["label"] = to_int(*doc.gold_label);
  if (doc.weak_label) j["weak_label"] = to_int(*doc.weak_label);
  return j.dump();
}

void write_corpus(const DocumentSet& docs, std::ostream& out,
                  CorpusFormat format) {
  if (format == CorpusFormat::Jsonl) {
    for (const auto& doc : docs.documents) {
      out << document_to_jsonl(doc) << "\n";
    }
    return;
  }
  out << "id\ttitle\tbody\tlabel\n";
  for (const auto& doc : docs.documents) {
    out << escape_tsv(doc.id) << "\t" << escape_tsv(doc.title) << "\t"
        << escape_tsv(doc.body) << "\t";
    if (doc.gold_label) out << to_int(*doc.gold_label);
    out << "\n";
  }
}

void save_corpus(const DocumentSet& docs, const std::string& path,
                 CorpusFormat format) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write corpus file \"" + path + "\"");
  }
  write_corpus(docs, out, format);
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space_char(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < n && !is_space_char(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i) break;
    std::string_view chunk = text.substr(start, i - start);

    std::size_t b = 0;
    std::size_t e = chunk.size();
    auto count_stripped = [&seq](unsigned char c) {
      if (c == '!') ++seq.exclamation_count;
      if (c == '?') ++seq.question_count;
    };
    while (b < e && !is_word_char(static_cast<unsigned char>(chunk[b]))) {
      count_stripped(static_cast<unsigned char>(chunk[b]));
      ++b;
    }
    while (e > b && !is_word_char(static_cast<unsigned char>(chunk[e - 1]))) {
      count_stripped(static_cast<unsigned char>(chunk[e - 1]));
      --e;
    }
    if (b == e) continue;  // nothing but punctuation

    std::string_view core = chunk.substr(b, e - b);
    Token token;
    token.surface = std::string(chunk);
    token.normalized = to_lower_ascii(core);
    std::size_t letters = 0;
    token.is_allcaps = all_letters_upper(chunk, &letters) && letters >= 2;
    token.position = seq.tokens.size();
    seq.tokens.push_back(std::move(token));
  }
  return seq;
}

Vocabulary build_vocabulary(const DocumentSet& docs, std::uint64_t min_count) {
  if (min_count < 1) {
    throw DataError("min_count must be >= 1");
  }
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& doc : docs.documents) {
    TokenSequence seq = tokenize(doc.text());
    for (const auto& token : seq.tokens) {
      ++counts[token.normalized];
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> ordered;
  ordered.reserve(counts.size());
  for (auto& [token, freq] : counts) {
    if (freq >= min_count) ordered.emplace_back(token, freq);
  }
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return Vocabulary(std::move(ordered), min_count);
}

std::pair<DocumentSet, DocumentSet> train_test_split(const DocumentSet& docs,
                                                     double test_fraction,
                                                     std::uint64_t seed) {
  const std::size_t n = docs.size();
  if (n < 2) {
    throw DataError("train_test_split needs at least 2 documents");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DataError("test_fraction must lie in (0, 1)");
  }
  const auto test_size =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (test_size == 0 || test_size == n) {
    throw DataError("test_fraction " + std::to_string(test_fraction) +
                    " would leave an empty train or test partition");
  }

  // Strata keyed by weak label; documents without one form their own
  // stratum. Key order is fixed so the partition depends only on the seed.
  std::map<int, std::vector<std::size_t>> strata;
  bool any_label = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& label = docs.documents[i].weak_label;
    if (label) any_label = true;
    strata[label ? to_int(*label) : 2].push_back(i);
  }
  if (!any_label) {
    strata.clear();
    strata[0].reserve(n);
    for (std::size_t i = 0; i < n; ++i) strata[0].push_back(i);
  }

  // Largest-remainder allocation of the test quota across strata.
  struct Alloc {
    int key;
    std::size_t size;
    std::size_t quota;
    double remainder;
  };
  std::vector<Alloc> allocs;
  std::size_t assigned = 0;
  for (const auto& [key, members] : strata) {
    double exact = test_fraction * static_cast<double>(members.size());
    auto quota = static_cast<std::size_t>(exact);
    if (quota > members.size()) quota = members.size();
    allocs.push_back({key, members.size(), quota, exact - static_cast<double>(quota)});
    assigned += quota;
  }
  std::vector<std::size_t> order(allocs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (allocs[a].remainder != allocs[b].remainder)
      return allocs[a].remainder > allocs[b].remainder;
    if (allocs[a].size != allocs[b].size) return allocs[a].size > allocs[b].size;
    return allocs[a].key < allocs[b].key;
  });
  // Floor quotas never exceed round(f*n), so only top-ups are needed;
  // total capacity exceeds test_size, so this terminates.
  std::size_t cursor = 0;
  while (assigned < test_size) {
    Alloc& a = allocs[order[cursor % order.size()]];
    if (a.quota < a.size) {
      ++a.quota;
      ++assigned;
    }
    ++cursor;
  }

  Rng rng(mix_seed(seed));
  std::vector<bool> in_test(n, false);
  std::size_t alloc_i = 0;
  for (const auto& [key, members] : strata) {
    std::vector<std::size_t> shuffled = members;
    shuffle(shuffled, rng);
    for (std::size_t j = 0; j < allocs[alloc_i].quota; ++j) {
      in_test[shuffled[j]] = true;
    }
    ++alloc_i;
  }

  DocumentSet train;
  DocumentSet test;
  train.provenance = docs.provenance;
  test.provenance = docs.provenance;
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? test : train).documents.push_back(docs.documents[i]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace newsgate
