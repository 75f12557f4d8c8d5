#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "newsgate/corpus.hpp"
#include "newsgate/dtm.hpp"

namespace newsgate {

// One-class nu-SVM with RBF kernel, trained on the documents that are to
// be treated as the reference (negative/neutral) distribution. A point
// with decision >= 0 is claimed by that distribution.
struct OneClassSvmModel {
  std::vector<SparseVector> support_vectors;  // exactly the x_i with alpha_i > 0
  std::vector<double> coefficients;           // aligned alpha_i
  double offset = 0.0;                        // rho
  double gamma = 1.0;
  double nu = 0.5;
  std::size_t train_size = 0;
  std::size_t dimension = 0;
};

// exp(-gamma * ||u - v||^2); dimensions must match.
double rbf_kernel(const SparseVector& u, const SparseVector& v, double gamma);

// Solves min 0.5 a'Ka  s.t.  0 <= a_i <= 1/(nu*l), sum a_i = 1 by pairwise
// coordinate updates on the maximal violating pair; stops when the KKT
// violation drops to tol or after max_passes updates.
OneClassSvmModel train_one_class(const std::vector<SparseVector>& data,
                                 double nu, double gamma, double tol = 1e-8,
                                 std::size_t max_passes = 200000);

// sum_j alpha_j K(x_j, v) - rho.
double decision(const OneClassSvmModel& model, const SparseVector& v);

// 0.5 a'Ka over the stored support vectors; the quantity the trainer
// minimizes, exposed for diagnostics.
double dual_objective(const OneClassSvmModel& model);

// Splits the weakly-positive pool: documents the model claims
// (decision >= margin) are quarantined, the rest are kept. Both halves
// preserve input order.
std::pair<DocumentSet, DocumentSet> filter_positive_pool(
    const OneClassSvmModel& model, const DocumentSet& positives,
    const std::vector<SparseVector>& vectors, double margin = 0.0);

struct CvCell {
  double nu = 0.0;
  double gamma = 0.0;
};

struct CvSearchResult {
  std::vector<CvCell> grid;
  std::vector<std::vector<double>> scores;  // per cell: folds*repeats values
  std::vector<double> mean_scores;          // per cell
  CvCell selected;
  double criterion_value = 0.0;
  std::size_t folds = 0;
  std::size_t repeats = 0;

  std::size_t total_fits() const;
};

// Repeated k-fold calibration search. Per cell, per repeat, per fold:
// train on the complement, score = |held-out accept rate - (1 - nu)|.
// The cell with the smallest mean score wins; ties go to the smaller
// gamma, then the smaller nu.
CvSearchResult cv_grid_search(const std::vector<SparseVector>& negatives,
                              const std::vector<CvCell>& grid,
                              std::size_t folds, std::size_t repeats,
                              std::uint64_t seed);

}  // namespace newsgate
