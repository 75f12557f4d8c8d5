#pragma once

#include <cstdint>
#include <vector>

#include "newsgate/dtm.hpp"

namespace newsgate {

// Binary linear SVM over DTM rows (positive vs non-positive), trained by
// Pegasos-style stochastic subgradient descent.
struct LinearSvmModel {
  std::vector<double> weights;  // dense, size = DTM dimension
  double bias = 0.0;
  double lambda = 1e-4;
  std::size_t epochs_trained = 0;

  std::size_t dimension() const { return weights.size(); }
};

// Minimizes lambda/2 ||w||^2 + mean hinge loss with step size 1/(lambda*t)
// at the t-th update, one seed-derived shuffled pass per epoch. The bias
// is unregularized. y must contain both +1 and -1.
LinearSvmModel train_linear_svm(const DocumentTermMatrix& X,
                                const std::vector<int>& y, double lambda,
                                std::size_t epochs, std::uint64_t seed);

double decision_value(const LinearSvmModel& model, const SparseVector& x);

// sign(w.x + b); sign(0) -> +1.
int predict(const LinearSvmModel& model, const SparseVector& x);

double hinge_objective(const LinearSvmModel& model,
                       const DocumentTermMatrix& X, const std::vector<int>& y);

}  // namespace newsgate
