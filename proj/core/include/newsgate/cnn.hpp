#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "newsgate/corpus.hpp"
#include "newsgate/rng.hpp"

namespace newsgate {

// Word vectors aligned with a Vocabulary: row 0 is the padding row (all
// zeros, never updated), row 1 the out-of-vocabulary row.
struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<double> vectors;  // (|V|+2) x dim, row-major
  bool trainable = false;

  std::size_t rows() const { return dim == 0 ? 0 : vectors.size() / dim; }
  double* row(std::size_t i) { return vectors.data() + i * dim; }
  const double* row(std::size_t i) const { return vectors.data() + i * dim; }
};

// GloVe text layout: `token v1 ... v_dim`, space separated. Vocabulary
// tokens found in the file take the file vectors; missing tokens and the
// OOV row are initialized uniform(-0.25, 0.25) from the seed.
EmbeddingTable load_pretrained_embeddings(const std::string& path,
                                          const Vocabulary& vocab,
                                          std::size_t dim, std::uint64_t seed);
EmbeddingTable parse_pretrained_embeddings(std::istream& in,
                                           const Vocabulary& vocab,
                                           std::size_t dim, std::uint64_t seed,
                                           const std::string& origin);

// Every non-padding row uniform(-0.25, 0.25); used when no pretrained
// vector file is supplied.
EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t dim,
                                 std::uint64_t seed);

struct CnnConfig {
  std::size_t n_filters = 600;
  std::size_t kernel_size = 3;  // stride fixed at 1, valid padding
  double dropout_p = 0.5;
  std::size_t epochs = 20;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::size_t max_len = 256;
  std::uint64_t seed = 0;

  void validate() const;  // kernel_size in [1, max_len], dropout in [0,1), ...
};

// Single-convolution text CNN: embedding lookup, n_f filters of width k
// (valid padding, stride 1), ReLU, max-over-time pooling, inverted
// dropout during training, and a 2-class softmax head.
struct TextCnnModel {
  static constexpr std::size_t kClasses = 2;  // index 1 = positive

  EmbeddingTable embeddings;
  std::vector<double> filters;        // n_f x k x dim
  std::vector<double> filter_bias;    // n_f
  std::vector<double> dense_weights;  // kClasses x n_f
  std::vector<double> dense_bias;     // kClasses
  CnnConfig config;
  std::shared_ptr<const Vocabulary> vocabulary;
};

// Fresh model with seed-derived uniform parameter initialization.
TextCnnModel init_text_cnn(const CnnConfig& cfg,
                           std::shared_ptr<const Vocabulary> vocab,
                           EmbeddingTable embeddings);

// Vocabulary indices for the first max_len tokens, padded with the
// padding index; truncation keeps the prefix.
std::vector<std::size_t> document_indices(const TokenSequence& seq,
                                          const Vocabulary& vocab,
                                          std::size_t max_len);

// max_len x dim input matrix for the convolution.
std::vector<double> embed_indices(const std::vector<std::size_t>& indices,
                                  const EmbeddingTable& table);
std::vector<double> embed_document(const TokenSequence& seq,
                                   const EmbeddingTable& table,
                                   const Vocabulary& vocab,
                                   std::size_t max_len);

struct ForwardCache {
  std::vector<double> conv_pre;      // n_f x (L-k+1), pre-ReLU
  std::vector<std::size_t> argmax;   // per filter, first maximal position
  std::vector<double> pooled;        // n_f, post-ReLU max
  std::vector<double> dropout_scale; // n_f; 0 dropped, 1/(1-p) kept, 1 in eval
  std::vector<double> pooled_dropped;
  std::array<double, TextCnnModel::kClasses> probs{};
  std::size_t input_len = 0;         // L
};

// input is an L x dim row-major matrix with L >= kernel_size. rng is
// consumed only when train_mode is true (one draw per pooled unit).
std::array<double, TextCnnModel::kClasses> cnn_forward(
    const TextCnnModel& model, const std::vector<double>& input,
    bool train_mode, Rng& rng, ForwardCache* cache = nullptr);
std::array<double, TextCnnModel::kClasses> cnn_forward(
    const TextCnnModel& model, const std::vector<double>& input);

struct CnnGradients {
  std::vector<double> filters;
  std::vector<double> filter_bias;
  std::vector<double> dense_weights;
  std::vector<double> dense_bias;
  std::vector<double> input;  // L x dim; filled only for trainable embeddings

  void resize_like(const TextCnnModel& model, std::size_t input_size);
  void add_scaled(const CnnGradients& other, double scale);
  void clear();
};

// Cross-entropy loss -ln p[label] and exact backpropagation gradients.
// The max-pool gradient goes to the first maximal position; ReLU passes
// nothing where the pre-activation is <= 0.
double cnn_loss_and_gradients(const TextCnnModel& model,
                              const std::vector<double>& input, int label,
                              bool train_mode, Rng& rng, CnnGradients& grads);

struct TrainHistory {
  std::vector<double> mean_loss;       // per epoch, over training updates
  std::vector<double> train_accuracy;  // per epoch, eval-mode pass
  double validation_accuracy = 0.0;
};

// Binary gate class of a document: 1 for positive, 0 for anything else.
// The weak label wins when both labels are present.
std::optional<int> binary_gate_class(const NewsDocument& doc);

// Mini-batch SGD per model.config; batch gradients are averaged and the
// shuffle order is derived from config.seed. Both classes must appear in
// train_docs. epochs == 0 leaves the model untouched.
TrainHistory train_cnn(TextCnnModel& model, const DocumentSet& train_docs,
                       const DocumentSet& valid_docs);

struct CnnPrediction {
  bool positive = false;
  double confidence = 0.0;  // max class probability
  std::array<double, TextCnnModel::kClasses> probs{};
};

// Eval-mode forward (no dropout); identical across calls.
CnnPrediction predict_cnn(const TextCnnModel& model, const NewsDocument& doc);

struct GradientCheckReport {
  double filters = 0.0;
  double filter_bias = 0.0;
  double dense_weights = 0.0;
  double dense_bias = 0.0;
  double input = 0.0;  // checked only for trainable embeddings
  double max_relative_error = 0.0;
};

// Central differences vs analytic gradients over every parameter group;
// relative error |a - n| / max(|a|, |n|, 1e-8). Dropout disabled.
GradientCheckReport gradient_check(const TextCnnModel& model,
                                   const std::vector<double>& input, int label,
                                   double epsilon);

}  // namespace newsgate
