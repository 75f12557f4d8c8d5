#include "newsgate/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "newsgate/errors.hpp"
#include "newsgate/rng.hpp"

namespace newsgate {

namespace {

std::size_t class_index(int value, const std::vector<int>& classes,
                        const char* which) {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == value) return i;
  }
  throw DataError(std::string(which) + " label " + std::to_string(value) +
                  " is not in the class list");
}

std::string fixed4(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

}  // namespace

ConfusionMatrix confusion_matrix(const std::vector<int>& gold,
                                 const std::vector<int>& pred,
                                 const std::vector<int>& classes) {
  if (gold.size() != pred.size()) {
    throw DataError("confusion_matrix: " + std::to_string(gold.size()) +
                    " gold labels but " + std::to_string(pred.size()) +
                    " predictions");
  }
  if (classes.empty()) {
    throw DataError("confusion_matrix: class list is empty");
  }
  ConfusionMatrix confusion(classes.size(),
                            std::vector<std::size_t>(classes.size(), 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::size_t g = class_index(gold[i], classes, "gold");
    std::size_t p = class_index(pred[i], classes, "predicted");
    ++confusion[g][p];
  }
  return confusion;
}

EvalReport metrics_from_confusion(const ConfusionMatrix& confusion,
                                  const std::vector<int>& classes) {
  const std::size_t c = confusion.size();
  if (classes.size() != c) {
    throw DataError("metrics_from_confusion: class list size mismatch");
  }
  for (const auto& row : confusion) {
    if (row.size() != c) {
      throw DataError("metrics_from_confusion: matrix is not square");
    }
  }

  EvalReport report;
  report.classes = classes;
  report.confusion = confusion;

  std::size_t total = 0;
  std::size_t diag = 0;
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) total += confusion[i][j];
    diag += confusion[i][i];
  }
  report.n = total;
  report.accuracy_defined = total > 0;
  report.accuracy = total > 0 ? static_cast<double>(diag) / total : 0.0;

  double f1_sum = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    ClassMetrics m;
    m.class_value = classes[i];
    std::size_t col_sum = 0;
    std::size_t row_sum = 0;
    for (std::size_t j = 0; j < c; ++j) {
      col_sum += confusion[j][i];
      row_sum += confusion[i][j];
    }
    const double tp = static_cast<double>(confusion[i][i]);
    m.precision_defined = col_sum > 0;
    m.precision = col_sum > 0 ? tp / col_sum : 0.0;
    m.recall_defined = row_sum > 0;
    m.recall = row_sum > 0 ? tp / row_sum : 0.0;
    m.f1_defined = m.precision + m.recall > 0.0;
    m.f1 = m.f1_defined
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    f1_sum += m.f1;
    report.per_class.push_back(m);
  }
  report.macro_f1 = c > 0 ? f1_sum / static_cast<double>(c) : 0.0;
  return report;
}

EvalReport evaluate_predictions(const std::vector<int>& gold,
                                const std::vector<int>& pred,
                                const std::vector<int>& classes) {
  return metrics_from_confusion(confusion_matrix(gold, pred, classes), classes);
}

std::vector<std::vector<std::size_t>> kfold_indices(
    std::size_t n, std::size_t k, std::uint64_t seed,
    const std::vector<int>* strata) {
  if (k < 2) {
    throw DataError("kfold_indices: k must be >= 2");
  }
  if (n < k) {
    throw DataError("kfold_indices: n=" + std::to_string(n) +
                    " is smaller than k=" + std::to_string(k));
  }
  if (strata && strata->size() != n) {
    throw DataError("kfold_indices: strata size mismatch");
  }

  std::vector<std::vector<std::size_t>> folds(k);
  Rng rng(mix_seed(seed));

  if (!strata) {
    auto order = shuffled_indices(n, rng);
    // Contiguous blocks; the first n % k folds get the extra item.
    std::size_t base = n / k;
    std::size_t extra = n % k;
    std::size_t cursor = 0;
    for (std::size_t f = 0; f < k; ++f) {
      std::size_t size = base + (f < extra ? 1 : 0);
      for (std::size_t j = 0; j < size; ++j) folds[f].push_back(order[cursor++]);
    }
    return folds;
  }

  // Per-stratum shuffles dealt greedily to the least-loaded fold keeps
  // global sizes within one of each other and spreads every stratum.
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[(*strata)[i]].push_back(i);
  for (auto& [label, members] : groups) {
    shuffle(members, rng);
    for (std::size_t idx : members) {
      std::size_t target = 0;
      for (std::size_t f = 1; f < k; ++f) {
        if (folds[f].size() < folds[target].size()) target = f;
      }
      folds[target].push_back(idx);
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  out << "n=" << report.n << "\n";
  out << "accuracy=" << fixed4(report.accuracy) << "\n";
  out << "macro_f1=" << fixed4(report.macro_f1) << "\n";
  std::vector<std::string> undefined;
  for (const auto& m : report.per_class) {
    const std::string prefix = "class." + std::to_string(m.class_value);
    out << prefix << ".precision=" << fixed4(m.precision) << "\n";
    out << prefix << ".recall=" << fixed4(m.recall) << "\n";
    out << prefix << ".f1=" << fixed4(m.f1) << "\n";
    if (!m.precision_defined) undefined.push_back(prefix + ".precision");
    if (!m.recall_defined) undefined.push_back(prefix + ".recall");
    if (!m.f1_defined) undefined.push_back(prefix + ".f1");
  }
  if (!report.accuracy_defined) undefined.insert(undefined.begin(), "accuracy");
  out << "undefined=";
  for (std::size_t i = 0; i < undefined.size(); ++i) {
    if (i > 0) out << ",";
    out << undefined[i];
  }
  out << "\n";
  out << "confusion.classes=";
  for (std::size_t i = 0; i < report.classes.size(); ++i) {
    if (i > 0) out << ",";
    out << report.classes[i];
  }
  out << "\n";
  for (std::size_t i = 0; i < report.confusion.size(); ++i) {
    out << "confusion.row." << report.classes[i] << "=";
    for (std::size_t j = 0; j < report.confusion[i].size(); ++j) {
      if (j > 0) out << ",";
      out << report.confusion[i][j];
    }
    out << "\n";
  }
  return out.str();
}

void write_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write report file \"" + path + "\"");
  }
  out << format_report(report);
}

}  // namespace newsgate
