#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace newsgate {

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

struct ClassMetrics {
  int class_value = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Zero-denominator metrics are reported as 0 and flagged rather than
  // erroring, so harness runs complete on degenerate folds.
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

struct EvalReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  bool accuracy_defined = true;
  std::vector<ClassMetrics> per_class;
  double macro_f1 = 0.0;
  ConfusionMatrix confusion;  // rows = gold, cols = predicted
  std::vector<int> classes;
};

// Entry (i, j) counts items with gold classes[i] predicted classes[j].
ConfusionMatrix confusion_matrix(const std::vector<int>& gold,
                                 const std::vector<int>& pred,
                                 const std::vector<int>& classes);

EvalReport metrics_from_confusion(const ConfusionMatrix& confusion,
                                  const std::vector<int>& classes);

EvalReport evaluate_predictions(const std::vector<int>& gold,
                                const std::vector<int>& pred,
                                const std::vector<int>& classes);

// k disjoint, exhaustive folds over 0..n-1 with sizes differing by at
// most one; stratified when strata labels are given; deterministic for a
// given seed.
std::vector<std::vector<std::size_t>> kfold_indices(
    std::size_t n, std::size_t k, std::uint64_t seed,
    const std::vector<int>* strata = nullptr);

// Flat key=value lines plus the confusion matrix as integer rows; key
// order is stable so reruns can be diffed.
std::string format_report(const EvalReport& report);
void write_report(const EvalReport& report, const std::string& path);

}  // namespace newsgate
