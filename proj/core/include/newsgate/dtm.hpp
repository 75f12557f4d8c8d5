#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "newsgate/corpus.hpp"

namespace newsgate {

// Sparse row vector: strictly increasing indices, no stored zeros.
struct SparseVector {
  std::vector<std::pair<std::size_t, double>> entries;
  std::size_t dimension = 0;

  static SparseVector from_dense(const std::vector<double>& dense);
  double value_at(std::size_t index) const;  // 0 when absent
  double squared_norm() const;
  std::size_t nnz() const { return entries.size(); }
};

double dot(const SparseVector& u, const SparseVector& v);
double squared_distance(const SparseVector& u, const SparseVector& v);

enum class DtmWeighting { Count, Tfidf };

std::string to_string(DtmWeighting weighting);

// Rows aligned with the DocumentSet that built them; dimension is
// |vocabulary| + 2 and the reserved indices are never populated.
struct DocumentTermMatrix {
  std::vector<SparseVector> rows;
  std::shared_ptr<const Vocabulary> vocabulary;
  DtmWeighting weighting = DtmWeighting::Count;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t dimension() const;
};

// Smoothed idf: idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1.
struct IdfTable {
  std::vector<double> idf;  // indexed by term index, size = dtm dimension
  std::size_t n_docs = 0;
};

DocumentTermMatrix build_dtm(const DocumentSet& docs,
                             std::shared_ptr<const Vocabulary> vocab);

// Term counts for a single document in the vocabulary's space; OOV
// tokens are dropped. This is the row builder behind build_dtm and the
// vectorizer used when gating unseen documents.
SparseVector vectorize_document(const NewsDocument& doc,
                                const Vocabulary& vocab);

IdfTable fit_idf(const DocumentTermMatrix& dtm);

DocumentTermMatrix apply_tfidf(const DocumentTermMatrix& dtm,
                               const IdfTable& idf, bool l2_normalize);
SparseVector apply_tfidf_row(const SparseVector& row, const IdfTable& idf,
                             bool l2_normalize);

// Coordinate text dump: header `%%dtm <n_rows> <n_cols> <weighting>`,
// then `row col value` per nonzero.
void save_dtm(const DocumentTermMatrix& dtm, const std::string& path);
void write_dtm(const DocumentTermMatrix& dtm, std::ostream& out);

}  // namespace newsgate
