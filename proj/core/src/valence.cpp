#include "newsgate/valence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "newsgate/errors.hpp"

namespace newsgate {

namespace {

std::string lower(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

double parse_number(const std::string& text, const std::string& where) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw DataError(where + ": non-numeric value \"" + text + "\"");
  }
  if (pos != text.size()) {
    throw DataError(where + ": non-numeric value \"" + text + "\"");
  }
  return value;
}

enum class Section { Valence, Booster, Negation, Contrast };

}  // namespace

void ScorerConfig::validate() const {
  if (!(neutral_threshold > 0.0)) {
    throw DataError("neutral_threshold must be > 0");
  }
  if (negation_window < 1) {
    throw DataError("negation_window must be >= 1");
  }
  if (!(alpha > 0.0)) {
    throw DataError("alpha must be > 0");
  }
}

ValenceLexicon parse_lexicon(std::istream& in, const std::string& origin) {
  ValenceLexicon lex;
  lex.contrast_markers.clear();
  bool contrast_seen = false;
  Section section = Section::Valence;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line == "#BOOSTER") {
        section = Section::Booster;
      } else if (line == "#NEGATION") {
        section = Section::Negation;
      } else if (line == "#CONTRAST") {
        section = Section::Contrast;
        contrast_seen = true;
      }
      continue;  // other # lines are comments
    }
    const std::string where = origin + ":" + std::to_string(line_no);
    std::size_t tab = line.find('\t');
    std::string token = lower(tab == std::string::npos ? line : line.substr(0, tab));
    if (token.empty()) {
      throw DataError(where + ": empty token");
    }
    switch (section) {
      case Section::Valence: {
        if (tab == std::string::npos) {
          throw DataError(where + ": expected token<TAB>valence");
        }
        double valence = parse_number(line.substr(tab + 1), where);
        if (valence < -4.0 || valence > 4.0) {
          throw DataError(where + ": valence " + std::to_string(valence) +
                          " for token \"" + token +
                          "\" is outside [-4, +4]");
        }
        lex.valences[token] = valence;
        break;
      }
      case Section::Booster: {
        if (tab == std::string::npos) {
          throw DataError(where + ": expected token<TAB>increment");
        }
        double increment = parse_number(line.substr(tab + 1), where);
        if (std::abs(increment) >= 1.0) {
          throw DataError(where + ": booster increment for \"" + token +
                          "\" must have magnitude < 1");
        }
        lex.boosters[token] = increment;
        break;
      }
      case Section::Negation:
        lex.negations.insert(token);
        break;
      case Section::Contrast:
        lex.contrast_markers.insert(token);
        break;
    }
  }
  if (!contrast_seen) {
    lex.contrast_markers = {"but"};
  }
  return lex;
}

ValenceLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open lexicon file \"" + path + "\"");
  }
  return parse_lexicon(in, path);
}

std::vector<std::pair<std::size_t, double>> token_valences(
    const TokenSequence& seq, const ValenceLexicon& lex,
    const ScorerConfig& cfg) {
  std::vector<std::pair<std::size_t, double>> adjusted;
  if (seq.empty()) return adjusted;

  // Caps boost applies only when the document mixes cases.
  bool mixed_case = std::any_of(
      seq.tokens.begin(), seq.tokens.end(),
      [](const Token& t) { return !t.is_allcaps; });

  // First contrast marker, if any; valences before it are damped and
  // valences after it amplified.
  std::size_t contrast_pos = seq.size();
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (lex.contrast_markers.count(seq.tokens[i].normalized) != 0) {
      contrast_pos = i;
      break;
    }
  }

  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Token& token = seq.tokens[i];
    // Negation and booster membership take precedence over a valence
    // entry for the same token.
    if (lex.negations.count(token.normalized) != 0 ||
        lex.boosters.count(token.normalized) != 0) {
      continue;
    }
    auto it = lex.valences.find(token.normalized);
    if (it == lex.valences.end()) continue;
    const double base = it->second;
    double v = base;

    if (token.is_allcaps && mixed_case) {
      if (base > 0.0) v += cfg.caps_boost;
      if (base < 0.0) v -= cfg.caps_boost;
    }

    for (std::size_t dist = 1; dist <= 3 && dist <= i; ++dist) {
      const Token& prev = seq.tokens[i - dist];
      auto booster = lex.boosters.find(prev.normalized);
      if (booster == lex.boosters.end()) continue;
      double inc = booster->second;
      if (base < 0.0) inc = -inc;
      if (prev.is_allcaps && mixed_case) {
        inc += base < 0.0 ? -cfg.caps_boost : cfg.caps_boost;
      }
      if (dist == 2) inc *= cfg.booster_decay_2;
      if (dist == 3) inc *= cfg.booster_decay_3;
      v += inc;
    }

    for (std::size_t dist = 1;
         dist <= static_cast<std::size_t>(cfg.negation_window) && dist <= i;
         ++dist) {
      if (lex.negations.count(seq.tokens[i - dist].normalized) != 0) {
        v *= cfg.negation_scalar;
        break;
      }
    }

    if (contrast_pos < seq.size()) {
      if (i < contrast_pos) v *= cfg.but_before_weight;
      if (i > contrast_pos) v *= cfg.but_after_weight;
    }

    adjusted.emplace_back(i, v);
  }
  return adjusted;
}

SentimentScore score_text(const TokenSequence& seq, const ValenceLexicon& lex,
                          const ScorerConfig& cfg) {
  SentimentScore score;
  const auto adjusted = token_valences(seq, lex, cfg);

  double s = 0.0;
  for (const auto& [pos, v] : adjusted) s += v;

  const double punct_amp =
      cfg.exclamation_step *
      std::min(seq.exclamation_count, cfg.max_exclamations);
  if (s > 0.0) s += punct_amp;
  if (s < 0.0) s -= punct_amp;

  if (s != 0.0) {
    double compound = s / std::sqrt(s * s + cfg.alpha);
    score.compound = std::clamp(compound, -1.0, 1.0);
  }

  double pos_mass = 0.0;
  double neg_mass = 0.0;
  double neu_mass =
      static_cast<double>(seq.size() - adjusted.size());
  for (const auto& [pos, v] : adjusted) {
    if (v > 0.0) {
      pos_mass += v + 1.0;
    } else if (v < 0.0) {
      neg_mass += -v + 1.0;
    } else {
      neu_mass += 1.0;
    }
  }
  if (pos_mass > neg_mass) {
    pos_mass += punct_amp;
  } else if (neg_mass > pos_mass) {
    neg_mass += punct_amp;
  }
  const double total = pos_mass + neg_mass + neu_mass;
  if (total > 0.0) {
    score.pos = pos_mass / total;
    score.neg = neg_mass / total;
    score.neu = neu_mass / total;
  }
  return score;
}

SentimentScore score_document(const NewsDocument& doc,
                              const ValenceLexicon& lex,
                              const ScorerConfig& cfg) {
  return score_text(tokenize(doc.text()), lex, cfg);
}

PolarityLabel assign_weak_label(const SentimentScore& score,
                                const ScorerConfig& cfg) {
  if (score.compound >= cfg.neutral_threshold) return PolarityLabel::Positive;
  if (score.compound <= -cfg.neutral_threshold) return PolarityLabel::Negative;
  return PolarityLabel::Neutral;
}

DocumentSet annotate_corpus(const DocumentSet& docs, const ValenceLexicon& lex,
                            const ScorerConfig& cfg) {
  cfg.validate();
  DocumentSet annotated = docs;
  for (auto& doc : annotated.documents) {
    doc.weak_label = assign_weak_label(score_document(doc, lex, cfg), cfg);
  }
  return annotated;
}

}  // namespace newsgate
