#include "newsgate/linear_svm.hpp"

#include <cmath>

#include "newsgate/errors.hpp"
#include "newsgate/rng.hpp"

namespace newsgate {

namespace {

void check_labels(const std::vector<int>& y) {
  bool has_pos = false;
  bool has_neg = false;
  for (int label : y) {
    if (label == 1) {
      has_pos = true;
    } else if (label == -1) {
      has_neg = true;
    } else {
      throw DataError("labels must be +1 or -1");
    }
  }
  if (!has_pos || !has_neg) {
    throw DataError("training labels contain a single class");
  }
}

}  // namespace

LinearSvmModel train_linear_svm(const DocumentTermMatrix& X,
                                const std::vector<int>& y, double lambda,
                                std::size_t epochs, std::uint64_t seed) {
  if (X.n_rows() != y.size()) {
    throw DataError("train_linear_svm: " + std::to_string(X.n_rows()) +
                    " rows but " + std::to_string(y.size()) + " labels");
  }
  if (X.n_rows() == 0) {
    throw DataError("train_linear_svm: empty training set");
  }
  if (!(lambda > 0.0)) {
    throw DataError("lambda must be > 0");
  }
  check_labels(y);

  LinearSvmModel model;
  model.lambda = lambda;
  model.weights.assign(X.dimension(), 0.0);

  Rng rng(mix_seed(seed));
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    auto order = shuffled_indices(X.n_rows(), rng);
    for (std::size_t idx : order) {
      ++t;
      const double step = 1.0 / (lambda * static_cast<double>(t));
      const SparseVector& x = X.rows[idx];
      const double label = static_cast<double>(y[idx]);
      double wx = 0.0;
      for (const auto& [i, v] : x.entries) wx += model.weights[i] * v;
      const double margin = label * (wx + model.bias);

      const double shrink = 1.0 - step * lambda;  // = 1 - 1/t
      for (double& w : model.weights) w *= shrink;
      if (margin < 1.0) {
        for (const auto& [i, v] : x.entries) {
          model.weights[i] += step * label * v;
        }
        model.bias += step * label;
      }
    }
  }
  model.epochs_trained = epochs;
  return model;
}

double decision_value(const LinearSvmModel& model, const SparseVector& x) {
  if (x.dimension != model.dimension()) {
    throw DataError("predict: dimension mismatch (" +
                    std::to_string(x.dimension) + " vs model " +
                    std::to_string(model.dimension()) + ")");
  }
  double sum = model.bias;
  for (const auto& [i, v] : x.entries) sum += model.weights[i] * v;
  return sum;
}

int predict(const LinearSvmModel& model, const SparseVector& x) {
  return decision_value(model, x) >= 0.0 ? 1 : -1;
}

double hinge_objective(const LinearSvmModel& model,
                       const DocumentTermMatrix& X,
                       const std::vector<int>& y) {
  if (X.n_rows() != y.size()) {
    throw DataError("hinge_objective: misaligned inputs");
  }
  double norm_sq = 0.0;
  for (double w : model.weights) norm_sq += w * w;
  double hinge = 0.0;
  for (std::size_t i = 0; i < X.n_rows(); ++i) {
    double margin = static_cast<double>(y[i]) * decision_value(model, X.rows[i]);
    hinge += std::max(0.0, 1.0 - margin);
  }
  if (!X.rows.empty()) hinge /= static_cast<double>(X.n_rows());
  return 0.5 * model.lambda * norm_sq + hinge;
}

}  // namespace newsgate
