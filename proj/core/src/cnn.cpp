#include "newsgate/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "newsgate/errors.hpp"

namespace newsgate {

namespace {

void fill_uniform(double* begin, std::size_t count, double limit, Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    begin[i] = uniform_real(rng, -limit, limit);
  }
}

// Missing-row initialization depends only on (seed, row index), not on
// the order the vector file was scanned.
void init_embedding_row(EmbeddingTable& table, std::size_t row,
                        std::uint64_t seed) {
  Rng rng(mix_seed(seed, row));
  fill_uniform(table.row(row), table.dim, 0.25, rng);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (in >> field) fields.push_back(field);
  return fields;
}

double parse_value(const std::string& text, const std::string& where) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw DataError(where + ": non-numeric vector component \"" + text + "\"");
  }
  if (pos != text.size()) {
    throw DataError(where + ": non-numeric vector component \"" + text + "\"");
  }
  return value;
}

int resolve_label(const NewsDocument& doc) {
  auto cls = binary_gate_class(doc);
  if (!cls) {
    throw DataError("document \"" + doc.id + "\" carries no label");
  }
  return *cls;
}

double eval_accuracy(const TextCnnModel& model,
                     const std::vector<std::vector<double>>& inputs,
                     const std::vector<int>& labels) {
  if (inputs.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto probs = cnn_forward(model, inputs[i]);
    int predicted = probs[1] > probs[0] ? 1 : 0;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(inputs.size());
}

}  // namespace

void CnnConfig::validate() const {
  if (n_filters == 0) throw DataError("n_filters must be >= 1");
  if (kernel_size == 0) throw DataError("kernel_size must be >= 1");
  if (kernel_size > max_len) {
    throw DataError("kernel_size " + std::to_string(kernel_size) +
                    " exceeds max_len " + std::to_string(max_len));
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw DataError("dropout_p must lie in [0, 1)");
  }
  if (!(learning_rate > 0.0)) throw DataError("learning_rate must be > 0");
  if (batch_size == 0) throw DataError("batch_size must be >= 1");
}

EmbeddingTable parse_pretrained_embeddings(std::istream& in,
                                           const Vocabulary& vocab,
                                           std::size_t dim, std::uint64_t seed,
                                           const std::string& origin) {
  if (dim == 0) throw DataError("embedding dimension must be >= 1");
  EmbeddingTable table;
  table.dim = dim;
  table.vectors.assign(vocab.dimension() * dim, 0.0);
  std::vector<bool> filled(vocab.dimension(), false);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_ws(line);
    const std::string where = origin + ":" + std::to_string(line_no);
    if (fields.size() != dim + 1) {
      throw DataError(where + ": expected token plus " + std::to_string(dim) +
                      " values, found " + std::to_string(fields.size() - 1));
    }
    std::size_t index = vocab.index_of(fields[0]);
    if (index == Vocabulary::kOovIndex) continue;  // token not in vocabulary
    double* row = table.row(index);
    for (std::size_t d = 0; d < dim; ++d) {
      row[d] = parse_value(fields[d + 1], where);
    }
    filled[index] = true;
  }

  // OOV row and vocabulary tokens absent from the file get seeded
  // uniform(-0.25, 0.25); the padding row stays zero.
  for (std::size_t row = Vocabulary::kOovIndex; row < vocab.dimension();
       ++row) {
    if (row == Vocabulary::kOovIndex || !filled[row]) {
      init_embedding_row(table, row, seed);
    }
  }
  return table;
}

EmbeddingTable load_pretrained_embeddings(const std::string& path,
                                          const Vocabulary& vocab,
                                          std::size_t dim,
                                          std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open embedding file \"" + path + "\"");
  }
  return parse_pretrained_embeddings(in, vocab, dim, seed, path);
}

EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t dim,
                                 std::uint64_t seed) {
  if (dim == 0) throw DataError("embedding dimension must be >= 1");
  EmbeddingTable table;
  table.dim = dim;
  table.vectors.assign(vocab.dimension() * dim, 0.0);
  for (std::size_t row = Vocabulary::kOovIndex; row < vocab.dimension();
       ++row) {
    init_embedding_row(table, row, seed);
  }
  return table;
}

TextCnnModel init_text_cnn(const CnnConfig& cfg,
                           std::shared_ptr<const Vocabulary> vocab,
                           EmbeddingTable embeddings) {
  cfg.validate();
  if (!vocab) throw DataError("init_text_cnn requires a vocabulary");
  if (embeddings.rows() != vocab->dimension()) {
    throw DataError("embedding table has " +
                    std::to_string(embeddings.rows()) +
                    " rows, vocabulary needs " +
                    std::to_string(vocab->dimension()));
  }
  TextCnnModel model;
  model.config = cfg;
  model.vocabulary = std::move(vocab);
  model.embeddings = std::move(embeddings);

  const std::size_t d = model.embeddings.dim;
  const std::size_t window = cfg.kernel_size * d;
  model.filters.resize(cfg.n_filters * window);
  model.filter_bias.assign(cfg.n_filters, 0.0);
  model.dense_weights.resize(TextCnnModel::kClasses * cfg.n_filters);
  model.dense_bias.assign(TextCnnModel::kClasses, 0.0);

  Rng rng(mix_seed(cfg.seed, 0xf117e125));
  fill_uniform(model.filters.data(), model.filters.size(),
               std::sqrt(1.0 / static_cast<double>(window)), rng);
  fill_uniform(model.dense_weights.data(), model.dense_weights.size(),
               std::sqrt(1.0 / static_cast<double>(cfg.n_filters)), rng);
  return model;
}

std::vector<std::size_t> document_indices(const TokenSequence& seq,
                                          const Vocabulary& vocab,
                                          std::size_t max_len) {
  std::vector<std::size_t> indices(max_len, Vocabulary::kPaddingIndex);
  const std::size_t used = std::min(seq.size(), max_len);
  for (std::size_t i = 0; i < used; ++i) {
    indices[i] = vocab.index_of(seq.tokens[i].normalized);
  }
  return indices;
}

std::vector<double> embed_indices(const std::vector<std::size_t>& indices,
                                  const EmbeddingTable& table) {
  std::vector<double> input(indices.size() * table.dim);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const double* row = table.row(indices[i]);
    std::copy(row, row + table.dim, input.data() + i * table.dim);
  }
  return input;
}

std::vector<double> embed_document(const TokenSequence& seq,
                                   const EmbeddingTable& table,
                                   const Vocabulary& vocab,
                                   std::size_t max_len) {
  return embed_indices(document_indices(seq, vocab, max_len), table);
}

std::array<double, TextCnnModel::kClasses> cnn_forward(
    const TextCnnModel& model, const std::vector<double>& input,
    bool train_mode, Rng& rng, ForwardCache* cache) {
  const std::size_t d = model.embeddings.dim;
  if (d == 0 || input.size() % d != 0) {
    throw DataError("input matrix size is not a multiple of the embedding dim");
  }
  const std::size_t len = input.size() / d;
  const std::size_t k = model.config.kernel_size;
  if (len < k) {
    throw DataError("input length " + std::to_string(len) +
                    " is shorter than the kernel size " + std::to_string(k));
  }
  const std::size_t n_f = model.config.n_filters;
  const std::size_t t_len = len - k + 1;
  const std::size_t window = k * d;

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.input_len = len;
  c.conv_pre.resize(n_f * t_len);
  c.argmax.assign(n_f, 0);
  c.pooled.assign(n_f, 0.0);

  // Valid padding, stride 1: each output is a dot product of one filter
  // with a contiguous k*d slice of the input.
  for (std::size_t j = 0; j < n_f; ++j) {
    const double* filter = model.filters.data() + j * window;
    const double bias = model.filter_bias[j];
    double best = -1.0;
    std::size_t best_t = 0;
    double* pre_row = c.conv_pre.data() + j * t_len;
    for (std::size_t t = 0; t < t_len; ++t) {
      const double* slice = input.data() + t * d;
      double sum = bias;
      for (std::size_t w = 0; w < window; ++w) sum += filter[w] * slice[w];
      pre_row[t] = sum;
      const double activated = sum > 0.0 ? sum : 0.0;
      if (activated > best) {
        best = activated;
        best_t = t;
      }
    }
    c.pooled[j] = best;
    c.argmax[j] = best_t;
  }

  c.dropout_scale.assign(n_f, 1.0);
  if (train_mode && model.config.dropout_p > 0.0) {
    const double p = model.config.dropout_p;
    const double keep_scale = 1.0 / (1.0 - p);
    for (std::size_t j = 0; j < n_f; ++j) {
      c.dropout_scale[j] = uniform01(rng) < p ? 0.0 : keep_scale;
    }
  }
  c.pooled_dropped.resize(n_f);
  for (std::size_t j = 0; j < n_f; ++j) {
    c.pooled_dropped[j] = c.pooled[j] * c.dropout_scale[j];
  }

  std::array<double, TextCnnModel::kClasses> logits{};
  for (std::size_t cls = 0; cls < TextCnnModel::kClasses; ++cls) {
    const double* w = model.dense_weights.data() + cls * n_f;
    double sum = model.dense_bias[cls];
    for (std::size_t j = 0; j < n_f; ++j) sum += w[j] * c.pooled_dropped[j];
    logits[cls] = sum;
  }

  const double peak = std::max(logits[0], logits[1]);
  std::array<double, TextCnnModel::kClasses> probs{};
  double total = 0.0;
  for (std::size_t cls = 0; cls < TextCnnModel::kClasses; ++cls) {
    probs[cls] = std::exp(logits[cls] - peak);
    total += probs[cls];
  }
  for (auto& p : probs) p /= total;
  c.probs = probs;
  return probs;
}

std::array<double, TextCnnModel::kClasses> cnn_forward(
    const TextCnnModel& model, const std::vector<double>& input) {
  Rng unused(0);
  return cnn_forward(model, input, false, unused, nullptr);
}

void CnnGradients::resize_like(const TextCnnModel& model,
                               std::size_t input_size) {
  filters.assign(model.filters.size(), 0.0);
  filter_bias.assign(model.filter_bias.size(), 0.0);
  dense_weights.assign(model.dense_weights.size(), 0.0);
  dense_bias.assign(model.dense_bias.size(), 0.0);
  input.assign(input_size, 0.0);
}

void CnnGradients::add_scaled(const CnnGradients& other, double scale) {
  auto axpy = [scale](std::vector<double>& dst, const std::vector<double>& src) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += scale * src[i];
  };
  axpy(filters, other.filters);
  axpy(filter_bias, other.filter_bias);
  axpy(dense_weights, other.dense_weights);
  axpy(dense_bias, other.dense_bias);
  axpy(input, other.input);
}

void CnnGradients::clear() {
  std::fill(filters.begin(), filters.end(), 0.0);
  std::fill(filter_bias.begin(), filter_bias.end(), 0.0);
  std::fill(dense_weights.begin(), dense_weights.end(), 0.0);
  std::fill(dense_bias.begin(), dense_bias.end(), 0.0);
  std::fill(input.begin(), input.end(), 0.0);
}

double cnn_loss_and_gradients(const TextCnnModel& model,
                              const std::vector<double>& input, int label,
                              bool train_mode, Rng& rng, CnnGradients& grads) {
  if (label != 0 && label != 1) {
    throw DataError("label must be 0 or 1");
  }
  ForwardCache cache;
  auto probs = cnn_forward(model, input, train_mode, rng, &cache);
  const double loss = -std::log(probs[label]);

  const std::size_t n_f = model.config.n_filters;
  const std::size_t d = model.embeddings.dim;
  const std::size_t k = model.config.kernel_size;
  const std::size_t window = k * d;
  const std::size_t t_len = cache.input_len - k + 1;
  const bool want_input = model.embeddings.trainable;

  grads.resize_like(model, want_input ? input.size() : 0);

  std::array<double, TextCnnModel::kClasses> dlogits{};
  for (std::size_t cls = 0; cls < TextCnnModel::kClasses; ++cls) {
    dlogits[cls] = probs[cls] - (static_cast<int>(cls) == label ? 1.0 : 0.0);
    grads.dense_bias[cls] = dlogits[cls];
    double* dw = grads.dense_weights.data() + cls * n_f;
    for (std::size_t j = 0; j < n_f; ++j) {
      dw[j] = dlogits[cls] * cache.pooled_dropped[j];
    }
  }

  // Through dropout to the pooled vector, then max-pool routes each
  // filter's gradient to its recorded argmax; ReLU kills it there when
  // the pre-activation was <= 0.
  for (std::size_t j = 0; j < n_f; ++j) {
    double dp = 0.0;
    for (std::size_t cls = 0; cls < TextCnnModel::kClasses; ++cls) {
      dp += model.dense_weights[cls * n_f + j] * dlogits[cls];
    }
    dp *= cache.dropout_scale[j];
    if (dp == 0.0) continue;
    const std::size_t t = cache.argmax[j];
    if (cache.conv_pre[j * t_len + t] <= 0.0) continue;

    grads.filter_bias[j] += dp;
    double* df = grads.filters.data() + j * window;
    const double* slice = input.data() + t * d;
    for (std::size_t w = 0; w < window; ++w) df[w] += dp * slice[w];
    if (want_input) {
      const double* filter = model.filters.data() + j * window;
      double* di = grads.input.data() + t * d;
      for (std::size_t w = 0; w < window; ++w) di[w] += dp * filter[w];
    }
  }
  return loss;
}

std::optional<int> binary_gate_class(const NewsDocument& doc) {
  if (doc.weak_label) {
    return *doc.weak_label == PolarityLabel::Positive ? 1 : 0;
  }
  if (doc.gold_label) {
    return *doc.gold_label == PolarityLabel::Positive ? 1 : 0;
  }
  return std::nullopt;
}

TrainHistory train_cnn(TextCnnModel& model, const DocumentSet& train_docs,
                       const DocumentSet& valid_docs) {
  model.config.validate();
  if (!model.vocabulary) {
    throw DataError("train_cnn: model has no vocabulary");
  }
  const CnnConfig& cfg = model.config;
  const std::size_t n = train_docs.size();
  if (n == 0) {
    throw DataError("train_cnn: empty training set");
  }

  std::vector<int> labels(n);
  std::vector<std::vector<std::size_t>> indices(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = resolve_label(train_docs.documents[i]);
    indices[i] = document_indices(tokenize(train_docs.documents[i].text()),
                                  *model.vocabulary, cfg.max_len);
  }
  const bool has_pos = std::count(labels.begin(), labels.end(), 1) > 0;
  const bool has_neg = std::count(labels.begin(), labels.end(), 0) > 0;
  if (!has_pos || !has_neg) {
    throw DataError("train_cnn: training set contains a single class");
  }

  std::vector<int> valid_labels(valid_docs.size());
  std::vector<std::vector<double>> valid_inputs(valid_docs.size());
  for (std::size_t i = 0; i < valid_docs.size(); ++i) {
    valid_labels[i] = resolve_label(valid_docs.documents[i]);
  }

  TrainHistory history;
  const bool trainable = model.embeddings.trainable;

  // Frozen embeddings let every input matrix be built once.
  std::vector<std::vector<double>> inputs(n);
  auto refresh_inputs = [&]() {
    for (std::size_t i = 0; i < n; ++i) {
      inputs[i] = embed_indices(indices[i], model.embeddings);
    }
  };
  refresh_inputs();

  Rng rng(mix_seed(cfg.seed, 0x7e41ca11));
  CnnGradients batch_grads;
  CnnGradients example_grads;
  std::vector<double> embedding_grads;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto order = shuffled_indices(n, rng);
    double loss_sum = 0.0;
    std::size_t cursor = 0;
    while (cursor < n) {
      const std::size_t batch_n = std::min(cfg.batch_size, n - cursor);
      batch_grads.resize_like(model, trainable ? cfg.max_len * model.embeddings.dim : 0);
      if (trainable) {
        embedding_grads.assign(model.embeddings.vectors.size(), 0.0);
      }
      for (std::size_t b = 0; b < batch_n; ++b) {
        const std::size_t idx = order[cursor + b];
        if (trainable) inputs[idx] = embed_indices(indices[idx], model.embeddings);
        loss_sum += cnn_loss_and_gradients(model, inputs[idx], labels[idx],
                                           true, rng, example_grads);
        batch_grads.add_scaled(example_grads, 1.0);
        if (trainable) {
          const std::size_t d = model.embeddings.dim;
          for (std::size_t pos = 0; pos < indices[idx].size(); ++pos) {
            const std::size_t row = indices[idx][pos];
            if (row == Vocabulary::kPaddingIndex) continue;
            double* dst = embedding_grads.data() + row * d;
            const double* src = example_grads.input.data() + pos * d;
            for (std::size_t w = 0; w < d; ++w) dst[w] += src[w];
          }
        }
      }
      const double scale = cfg.learning_rate / static_cast<double>(batch_n);
      for (std::size_t i = 0; i < model.filters.size(); ++i) {
        model.filters[i] -= scale * batch_grads.filters[i];
      }
      for (std::size_t i = 0; i < model.filter_bias.size(); ++i) {
        model.filter_bias[i] -= scale * batch_grads.filter_bias[i];
      }
      for (std::size_t i = 0; i < model.dense_weights.size(); ++i) {
        model.dense_weights[i] -= scale * batch_grads.dense_weights[i];
      }
      for (std::size_t i = 0; i < model.dense_bias.size(); ++i) {
        model.dense_bias[i] -= scale * batch_grads.dense_bias[i];
      }
      if (trainable) {
        const std::size_t d = model.embeddings.dim;
        for (std::size_t row = Vocabulary::kOovIndex;
             row < model.embeddings.rows(); ++row) {
          double* dst = model.embeddings.row(row);
          const double* src = embedding_grads.data() + row * d;
          for (std::size_t w = 0; w < d; ++w) dst[w] -= scale * src[w];
        }
      }
      cursor += batch_n;
    }
    if (trainable) refresh_inputs();
    history.mean_loss.push_back(loss_sum / static_cast<double>(n));
    history.train_accuracy.push_back(eval_accuracy(model, inputs, labels));
  }

  for (std::size_t i = 0; i < valid_docs.size(); ++i) {
    valid_inputs[i] = embed_indices(
        document_indices(tokenize(valid_docs.documents[i].text()),
                         *model.vocabulary, cfg.max_len),
        model.embeddings);
  }
  history.validation_accuracy =
      eval_accuracy(model, valid_inputs, valid_labels);
  return history;
}

CnnPrediction predict_cnn(const TextCnnModel& model, const NewsDocument& doc) {
  if (!model.vocabulary) {
    throw DataError("predict_cnn: model has no vocabulary");
  }
  auto input = embed_document(tokenize(doc.text()), model.embeddings,
                              *model.vocabulary, model.config.max_len);
  CnnPrediction prediction;
  prediction.probs = cnn_forward(model, input);
  prediction.positive = prediction.probs[1] > prediction.probs[0];
  prediction.confidence = std::max(prediction.probs[0], prediction.probs[1]);
  return prediction;
}

GradientCheckReport gradient_check(const TextCnnModel& model,
                                   const std::vector<double>& input, int label,
                                   double epsilon) {
  TextCnnModel probe = model;
  Rng unused(0);
  CnnGradients analytic;
  cnn_loss_and_gradients(probe, input, label, false, unused, analytic);

  std::vector<double> probe_input = input;
  auto loss_with_input = [&](const std::vector<double>& x) {
    auto probs = cnn_forward(probe, x);
    return -std::log(probs[label]);
  };

  auto check_group = [&](std::vector<double>& params,
                         const std::vector<double>& grads) {
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + epsilon;
      const double plus = loss_with_input(probe_input);
      params[i] = saved - epsilon;
      const double minus = loss_with_input(probe_input);
      params[i] = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double denom =
          std::max({std::abs(grads[i]), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(grads[i] - numeric) / denom);
    }
    return worst;
  };

  GradientCheckReport report;
  report.filters = check_group(probe.filters, analytic.filters);
  report.filter_bias = check_group(probe.filter_bias, analytic.filter_bias);
  report.dense_weights =
      check_group(probe.dense_weights, analytic.dense_weights);
  report.dense_bias = check_group(probe.dense_bias, analytic.dense_bias);
  report.max_relative_error =
      std::max({report.filters, report.filter_bias, report.dense_weights,
                report.dense_bias});
  if (model.embeddings.trainable) {
    report.input = check_group(probe_input, analytic.input);
    report.max_relative_error =
        std::max(report.max_relative_error, report.input);
  }
  return report;
}

}  // namespace newsgate
