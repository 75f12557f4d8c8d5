#include "newsgate/dtm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "newsgate/errors.hpp"

namespace newsgate {

SparseVector SparseVector::from_dense(const std::vector<double>& dense) {
  SparseVector v;
  v.dimension = dense.size();
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) v.entries.emplace_back(i, dense[i]);
  }
  return v;
}

double SparseVector::value_at(std::size_t index) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), index,
      [](const auto& entry, std::size_t idx) { return entry.first < idx; });
  if (it != entries.end() && it->first == index) return it->second;
  return 0.0;
}

double SparseVector::squared_norm() const {
  double sum = 0.0;
  for (const auto& [idx, value] : entries) sum += value * value;
  return sum;
}

double dot(const SparseVector& u, const SparseVector& v) {
  double sum = 0.0;
  auto a = u.entries.begin();
  auto b = v.entries.begin();
  while (a != u.entries.end() && b != v.entries.end()) {
    if (a->first == b->first) {
      sum += a->second * b->second;
      ++a;
      ++b;
    } else if (a->first < b->first) {
      ++a;
    } else {
      ++b;
    }
  }
  return sum;
}

double squared_distance(const SparseVector& u, const SparseVector& v) {
  double sum = 0.0;
  auto a = u.entries.begin();
  auto b = v.entries.begin();
  while (a != u.entries.end() || b != v.entries.end()) {
    if (b == v.entries.end() || (a != u.entries.end() && a->first < b->first)) {
      sum += a->second * a->second;
      ++a;
    } else if (a == u.entries.end() || b->first < a->first) {
      sum += b->second * b->second;
      ++b;
    } else {
      double d = a->second - b->second;
      sum += d * d;
      ++a;
      ++b;
    }
  }
  return sum;
}

std::string to_string(DtmWeighting weighting) {
  return weighting == DtmWeighting::Count ? "count" : "tfidf";
}

std::size_t DocumentTermMatrix::dimension() const {
  if (vocabulary) return vocabulary->dimension();
  return rows.empty() ? 0 : rows.front().dimension;
}

SparseVector vectorize_document(const NewsDocument& doc,
                                const Vocabulary& vocab) {
  std::map<std::size_t, double> counts;
  TokenSequence seq = tokenize(doc.text());
  for (const auto& token : seq.tokens) {
    std::size_t index = vocab.index_of(token.normalized);
    if (index == Vocabulary::kOovIndex) continue;
    counts[index] += 1.0;
  }
  SparseVector row;
  row.dimension = vocab.dimension();
  row.entries.assign(counts.begin(), counts.end());
  return row;
}

DocumentTermMatrix build_dtm(const DocumentSet& docs,
                             std::shared_ptr<const Vocabulary> vocab) {
  if (!vocab) {
    throw DataError("build_dtm requires a vocabulary");
  }
  DocumentTermMatrix dtm;
  dtm.vocabulary = std::move(vocab);
  dtm.weighting = DtmWeighting::Count;
  dtm.rows.reserve(docs.size());
  for (const auto& doc : docs.documents) {
    dtm.rows.push_back(vectorize_document(doc, *dtm.vocabulary));
  }
  return dtm;
}

IdfTable fit_idf(const DocumentTermMatrix& dtm) {
  if (dtm.weighting != DtmWeighting::Count) {
    throw DataError("fit_idf expects a count-weighted matrix");
  }
  const std::size_t dim = dtm.dimension();
  std::vector<std::size_t> df(dim, 0);
  for (const auto& row : dtm.rows) {
    for (const auto& [idx, value] : row.entries) ++df[idx];
  }
  IdfTable table;
  table.n_docs = dtm.n_rows();
  table.idf.resize(dim);
  const double n = static_cast<double>(table.n_docs);
  for (std::size_t t = 0; t < dim; ++t) {
    table.idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
  }
  return table;
}

SparseVector apply_tfidf_row(const SparseVector& row, const IdfTable& idf,
                             bool l2_normalize) {
  SparseVector out;
  out.dimension = row.dimension;
  out.entries.reserve(row.entries.size());
  for (const auto& [idx, value] : row.entries) {
    if (idx >= idf.idf.size()) {
      throw DataError("tf-idf index out of range");
    }
    out.entries.emplace_back(idx, value * idf.idf[idx]);
  }
  if (l2_normalize) {
    double norm = std::sqrt(out.squared_norm());
    if (norm > 0.0) {
      for (auto& [idx, value] : out.entries) value /= norm;
    }
  }
  return out;
}

DocumentTermMatrix apply_tfidf(const DocumentTermMatrix& dtm,
                               const IdfTable& idf, bool l2_normalize) {
  if (dtm.weighting != DtmWeighting::Count) {
    throw DataError("apply_tfidf expects a count-weighted matrix");
  }
  DocumentTermMatrix out;
  out.vocabulary = dtm.vocabulary;
  out.weighting = DtmWeighting::Tfidf;
  out.rows.reserve(dtm.rows.size());
  for (const auto& row : dtm.rows) {
    out.rows.push_back(apply_tfidf_row(row, idf, l2_normalize));
  }
  return out;
}

void write_dtm(const DocumentTermMatrix& dtm, std::ostream& out) {
  out << "%%dtm " << dtm.n_rows() << " " << dtm.dimension() << " "
      << to_string(dtm.weighting) << "\n";
  std::ostringstream value;
  value.precision(17);
  for (std::size_t r = 0; r < dtm.rows.size(); ++r) {
    for (const auto& [idx, v] : dtm.rows[r].entries) {
      value.str("");
      value << v;
      out << r << " " << idx << " " << value.str() << "\n";
    }
  }
}

void save_dtm(const DocumentTermMatrix& dtm, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write matrix file \"" + path + "\"");
  }
  write_dtm(dtm, out);
}

}  // namespace newsgate
