#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "newsgate/corpus.hpp"

namespace newsgate {

// Token valences in [-4, +4] plus the rule word lists. Negation
// membership takes precedence over a valence entry for the same token.
struct ValenceLexicon {
  std::unordered_map<std::string, double> valences;
  std::unordered_map<std::string, double> boosters;  // |increment| < 1
  std::unordered_set<std::string> negations;
  std::unordered_set<std::string> contrast_markers = {"but"};

  bool empty() const { return valences.empty(); }
};

// Rule constants. The defaults are the ones used by the reference
// lexical scorer; they are configuration, not claims.
struct ScorerConfig {
  double caps_boost = 0.733;
  double negation_scalar = -0.74;
  int negation_window = 3;
  double booster_decay_2 = 0.95;  // booster two tokens back
  double booster_decay_3 = 0.90;  // booster three tokens back
  double exclamation_step = 0.292;
  int max_exclamations = 4;
  double but_before_weight = 0.5;
  double but_after_weight = 1.5;
  double alpha = 15.0;
  double neutral_threshold = 0.05;

  void validate() const;  // neutral_threshold > 0, negation_window >= 1, alpha > 0
};

struct SentimentScore {
  double pos = 0.0;
  double neu = 0.0;
  double neg = 0.0;
  double compound = 0.0;  // s / sqrt(s^2 + alpha), in [-1, 1]
};

// Lexicon tsv: `token<TAB>valence` per line; lines `#BOOSTER`,
// `#NEGATION`, `#CONTRAST` switch section. Booster rows carry an
// increment; negation/contrast rows are bare tokens.
ValenceLexicon load_lexicon(const std::string& path);
ValenceLexicon parse_lexicon(std::istream& in, const std::string& origin);

// Adjusted valence per sentiment-bearing token, rules applied in order:
// caps boost, booster window (3 back, decayed), negation window
// (negation_window back), contrast reweighting around the first marker.
std::vector<std::pair<std::size_t, double>> token_valences(
    const TokenSequence& seq, const ValenceLexicon& lex,
    const ScorerConfig& cfg);

SentimentScore score_text(const TokenSequence& seq, const ValenceLexicon& lex,
                          const ScorerConfig& cfg);
SentimentScore score_document(const NewsDocument& doc,
                              const ValenceLexicon& lex,
                              const ScorerConfig& cfg);

// compound >= threshold -> Positive, <= -threshold -> Negative, else Neutral.
PolarityLabel assign_weak_label(const SentimentScore& score,
                                const ScorerConfig& cfg);

// Fills weak_label on every document; order and gold labels untouched.
DocumentSet annotate_corpus(const DocumentSet& docs, const ValenceLexicon& lex,
                            const ScorerConfig& cfg);

}  // namespace newsgate
