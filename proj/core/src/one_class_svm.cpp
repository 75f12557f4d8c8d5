#include "newsgate/one_class_svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "newsgate/errors.hpp"
#include "newsgate/eval.hpp"
#include "newsgate/rng.hpp"

namespace newsgate {

namespace {

void check_dimensions(const std::vector<SparseVector>& data) {
  for (std::size_t i = 1; i < data.size(); ++i) {
    if (data[i].dimension != data[0].dimension) {
      throw DataError("training vectors have mismatched dimensions");
    }
  }
}

}  // namespace

double rbf_kernel(const SparseVector& u, const SparseVector& v, double gamma) {
  if (u.dimension != v.dimension) {
    throw DataError("rbf_kernel: dimension mismatch (" +
                    std::to_string(u.dimension) + " vs " +
                    std::to_string(v.dimension) + ")");
  }
  if (!(gamma > 0.0)) {
    throw DataError("rbf_kernel: gamma must be > 0");
  }
  return std::exp(-gamma * squared_distance(u, v));
}

OneClassSvmModel train_one_class(const std::vector<SparseVector>& data,
                                 double nu, double gamma, double tol,
                                 std::size_t max_passes) {
  const std::size_t l = data.size();
  if (l == 0) {
    throw DataError("one-class training set is empty");
  }
  if (!(nu > 0.0 && nu <= 1.0)) {
    throw DataError("nu must lie in (0, 1]");
  }
  if (!(gamma > 0.0)) {
    throw DataError("gamma must be > 0");
  }
  if (nu * static_cast<double>(l) < 1.0) {
    throw DataError(
        "nu * l < 1 leaves the box constraints infeasible under sum(alpha)=1; "
        "increase nu or provide more training documents");
  }
  check_dimensions(data);

  const double box = 1.0 / (nu * static_cast<double>(l));

  // Full kernel matrix; fits are desk scale.
  std::vector<double> kernel(l * l);
  std::vector<double> norms(l);
  for (std::size_t i = 0; i < l; ++i) norms[i] = data[i].squared_norm();
  for (std::size_t i = 0; i < l; ++i) {
    kernel[i * l + i] = 1.0;
    for (std::size_t j = i + 1; j < l; ++j) {
      double sq = norms[i] + norms[j] - 2.0 * dot(data[i], data[j]);
      double k = std::exp(-gamma * std::max(sq, 0.0));
      kernel[i * l + j] = k;
      kernel[j * l + i] = k;
    }
  }

  // Feasible start: the first floor(nu*l) coefficients at the box, the
  // remainder on the next one, so sum(alpha) = 1 exactly.
  std::vector<double> alpha(l, 0.0);
  const double mass = nu * static_cast<double>(l);
  const auto full = static_cast<std::size_t>(mass);
  for (std::size_t i = 0; i < full && i < l; ++i) alpha[i] = box;
  if (full < l) alpha[full] = (mass - static_cast<double>(full)) * box;

  std::vector<double> grad(l, 0.0);  // K * alpha
  for (std::size_t i = 0; i < l; ++i) {
    if (alpha[i] == 0.0) continue;
    const double* row = kernel.data() + i * l;
    for (std::size_t j = 0; j < l; ++j) grad[j] += alpha[i] * row[j];
  }

  const double active_eps = box * 1e-12;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    // Maximal violating pair: mass moves from the highest gradient with
    // alpha > 0 to the lowest gradient with alpha < box.
    std::size_t up = l;
    std::size_t low = l;
    double g_up = std::numeric_limits<double>::infinity();
    double g_low = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < l; ++i) {
      if (box - alpha[i] > active_eps && grad[i] < g_up) {
        g_up = grad[i];
        up = i;
      }
      if (alpha[i] > active_eps && grad[i] > g_low) {
        g_low = grad[i];
        low = i;
      }
    }
    if (up == l || low == l) break;
    if (g_low - g_up <= tol) break;

    const double capacity = std::min(box - alpha[up], alpha[low]);
    const double eta =
        kernel[up * l + up] + kernel[low * l + low] - 2.0 * kernel[up * l + low];
    double delta = capacity;
    if (eta > 1e-15) {
      delta = std::min((g_low - g_up) / eta, capacity);
    }
    if (!(delta > 0.0)) break;

    alpha[up] += delta;
    alpha[low] -= delta;
    const double* row_up = kernel.data() + up * l;
    const double* row_low = kernel.data() + low * l;
    for (std::size_t k = 0; k < l; ++k) {
      grad[k] += delta * (row_up[k] - row_low[k]);
    }
  }

  OneClassSvmModel model;
  model.gamma = gamma;
  model.nu = nu;
  model.train_size = l;
  model.dimension = data[0].dimension;

  const double sv_eps = box * 1e-12;
  const double margin_eps = box * 1e-8;
  double rho = 0.0;
  std::size_t margin_count = 0;
  for (std::size_t i = 0; i < l; ++i) {
    if (alpha[i] > margin_eps && alpha[i] < box - margin_eps) {
      rho += grad[i];
      ++margin_count;
    }
  }
  if (margin_count > 0) {
    rho /= static_cast<double>(margin_count);
  } else {
    std::size_t sv_count = 0;
    for (std::size_t i = 0; i < l; ++i) {
      if (alpha[i] > sv_eps) {
        rho += grad[i];
        ++sv_count;
      }
    }
    if (sv_count > 0) rho /= static_cast<double>(sv_count);
  }
  model.offset = rho;

  for (std::size_t i = 0; i < l; ++i) {
    if (alpha[i] > sv_eps) {
      model.support_vectors.push_back(data[i]);
      model.coefficients.push_back(alpha[i]);
    }
  }
  return model;
}

double decision(const OneClassSvmModel& model, const SparseVector& v) {
  if (v.dimension != model.dimension) {
    throw DataError("decision: dimension mismatch (" +
                    std::to_string(v.dimension) + " vs model " +
                    std::to_string(model.dimension) + ")");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < model.support_vectors.size(); ++j) {
    sum += model.coefficients[j] *
           rbf_kernel(model.support_vectors[j], v, model.gamma);
  }
  return sum - model.offset;
}

double dual_objective(const OneClassSvmModel& model) {
  double sum = 0.0;
  const std::size_t m = model.support_vectors.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      sum += model.coefficients[i] * model.coefficients[j] *
             rbf_kernel(model.support_vectors[i], model.support_vectors[j],
                        model.gamma);
    }
  }
  return 0.5 * sum;
}

std::pair<DocumentSet, DocumentSet> filter_positive_pool(
    const OneClassSvmModel& model, const DocumentSet& positives,
    const std::vector<SparseVector>& vectors, double margin) {
  if (positives.size() != vectors.size()) {
    throw DataError("filter_positive_pool: " + std::to_string(positives.size()) +
                    " documents but " + std::to_string(vectors.size()) +
                    " vectors");
  }
  DocumentSet kept;
  DocumentSet quarantined;
  kept.provenance = positives.provenance;
  quarantined.provenance = positives.provenance;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (decision(model, vectors[i]) >= margin) {
      quarantined.documents.push_back(positives.documents[i]);
    } else {
      kept.documents.push_back(positives.documents[i]);
    }
  }
  return {std::move(kept), std::move(quarantined)};
}

std::size_t CvSearchResult::total_fits() const {
  std::size_t total = 0;
  for (const auto& cell_scores : scores) total += cell_scores.size();
  return total;
}

CvSearchResult cv_grid_search(const std::vector<SparseVector>& negatives,
                              const std::vector<CvCell>& grid,
                              std::size_t folds, std::size_t repeats,
                              std::uint64_t seed) {
  if (grid.empty()) {
    throw DataError("cv_grid_search: grid is empty");
  }
  if (negatives.size() < folds) {
    throw DataError("cv_grid_search: " + std::to_string(negatives.size()) +
                    " samples is fewer than " + std::to_string(folds) +
                    " folds");
  }
  if (repeats == 0) {
    throw DataError("cv_grid_search: repeats must be >= 1");
  }

  CvSearchResult result;
  result.grid = grid;
  result.folds = folds;
  result.repeats = repeats;
  result.scores.assign(grid.size(), {});
  for (auto& s : result.scores) s.reserve(folds * repeats);

  const std::size_t l = negatives.size();
  for (std::size_t r = 0; r < repeats; ++r) {
    auto fold_sets = kfold_indices(l, folds, mix_seed(seed, r));
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<bool> held(l, false);
      for (std::size_t idx : fold_sets[f]) held[idx] = true;
      std::vector<SparseVector> train;
      train.reserve(l - fold_sets[f].size());
      for (std::size_t i = 0; i < l; ++i) {
        if (!held[i]) train.push_back(negatives[i]);
      }
      for (std::size_t c = 0; c < grid.size(); ++c) {
        OneClassSvmModel model =
            train_one_class(train, grid[c].nu, grid[c].gamma);
        std::size_t accepted = 0;
        for (std::size_t idx : fold_sets[f]) {
          if (decision(model, negatives[idx]) >= 0.0) ++accepted;
        }
        double accept_rate = static_cast<double>(accepted) /
                             static_cast<double>(fold_sets[f].size());
        result.scores[c].push_back(
            std::abs(accept_rate - (1.0 - grid[c].nu)));
      }
    }
  }

  result.mean_scores.resize(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    double sum = 0.0;
    for (double s : result.scores[c]) sum += s;
    result.mean_scores[c] = sum / static_cast<double>(result.scores[c].size());
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < grid.size(); ++c) {
    const double mc = result.mean_scores[c];
    const double mb = result.mean_scores[best];
    bool wins = mc < mb;
    if (mc == mb) {
      wins = grid[c].gamma < grid[best].gamma ||
             (grid[c].gamma == grid[best].gamma && grid[c].nu < grid[best].nu);
    }
    if (wins) best = c;
  }
  result.selected = grid[best];
  result.criterion_value = result.mean_scores[best];
  return result;
}

}  // namespace newsgate
