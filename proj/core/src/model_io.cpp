#include "newsgate/model_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "newsgate/errors.hpp"

namespace newsgate {

namespace {

std::string hash_hex(std::uint64_t hash) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016" PRIx64, hash);
  return buffer;
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string origin)
      : in_(in), origin_(std::move(origin)) {}

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) {
      throw DataError(origin_ + ": container truncated at line " +
                      std::to_string(line_no_ + 1));
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  void expect(const std::string& literal) {
    std::string line = next();
    if (line != literal) {
      throw DataError(where() + ": expected \"" + literal + "\", found \"" +
                      line + "\"");
    }
  }

  // `<key> <value...>` lines; returns the value part.
  std::string keyed(const std::string& key) {
    std::string line = next();
    if (line.rfind(key + " ", 0) != 0) {
      throw DataError(where() + ": expected key \"" + key + "\"");
    }
    return line.substr(key.size() + 1);
  }

  std::string where() const {
    return origin_ + ":" + std::to_string(line_no_);
  }

 private:
  std::istream& in_;
  std::string origin_;
  std::size_t line_no_ = 0;
};

double to_double(const std::string& text, const std::string& where) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw DataError(where + ": bad number \"" + text + "\"");
  }
  if (pos != text.size()) {
    throw DataError(where + ": bad number \"" + text + "\"");
  }
  return value;
}

std::uint64_t to_u64(const std::string& text, const std::string& where) {
  std::size_t pos = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &pos);
  } catch (const std::exception&) {
    throw DataError(where + ": bad integer \"" + text + "\"");
  }
  if (pos != text.size()) {
    throw DataError(where + ": bad integer \"" + text + "\"");
  }
  return value;
}

void write_header(std::ostream& out, ModelKind kind, const Vocabulary& vocab) {
  out << "NGATE " << kContainerVersion << " " << to_string(kind) << " "
      << hash_hex(vocab.content_hash()) << "\n";
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  out << "---vocabulary\n";
  out << "min_count " << vocab.min_count() << "\n";
  out << "terms " << vocab.size() << "\n";
  const auto& entries = vocab.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out << entries[i].first << " " << (i + Vocabulary::kFirstTermIndex) << " "
        << entries[i].second << "\n";
  }
}

std::shared_ptr<const Vocabulary> read_vocabulary(LineReader& reader,
                                                  const std::string& header_hash) {
  reader.expect("---vocabulary");
  const auto min_count = to_u64(reader.keyed("min_count"), reader.where());
  const auto term_count = to_u64(reader.keyed("terms"), reader.where());
  std::vector<std::pair<std::string, std::uint64_t>> terms;
  terms.reserve(term_count);
  for (std::uint64_t i = 0; i < term_count; ++i) {
    std::istringstream line(reader.next());
    std::string token;
    std::uint64_t index = 0;
    std::uint64_t freq = 0;
    if (!(line >> token >> index >> freq)) {
      throw DataError(reader.where() + ": bad vocabulary entry");
    }
    if (index != i + Vocabulary::kFirstTermIndex) {
      throw DataError(reader.where() + ": vocabulary indices out of order");
    }
    terms.emplace_back(std::move(token), freq);
  }
  auto vocab = std::make_shared<Vocabulary>(std::move(terms), min_count);
  if (hash_hex(vocab->content_hash()) != header_hash) {
    throw DataError("vocabulary hash mismatch: header says " + header_hash +
                    ", contents hash to " + hash_hex(vocab->content_hash()));
  }
  return vocab;
}

void write_matrix_section(std::ostream& out, const std::string& name,
                          const std::vector<double>& values,
                          std::size_t rows, std::size_t cols) {
  out << "---" << name << "\n";
  out << "rows " << rows << " cols " << cols << "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c > 0) out << " ";
      out << format_double(values[r * cols + c]);
    }
    out << "\n";
  }
}

std::vector<double> read_matrix_section(LineReader& reader,
                                        const std::string& name,
                                        std::size_t* rows_out,
                                        std::size_t* cols_out) {
  reader.expect("---" + name);
  std::istringstream shape(reader.next());
  std::string rows_key;
  std::string cols_key;
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (!(shape >> rows_key >> rows >> cols_key >> cols) || rows_key != "rows" ||
      cols_key != "cols") {
    throw DataError(reader.where() + ": bad matrix shape line");
  }
  std::vector<double> values;
  values.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::istringstream line(reader.next());
    std::string field;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!(line >> field)) {
        throw DataError(reader.where() + ": matrix row too short");
      }
      values.push_back(to_double(field, reader.where()));
    }
    if (line >> field) {
      throw DataError(reader.where() + ": matrix row too long");
    }
  }
  if (rows_out) *rows_out = rows;
  if (cols_out) *cols_out = cols;
  return values;
}

OneClassSvmModel read_one_class(LineReader& reader) {
  OneClassSvmModel model;
  reader.expect("---one-class-svm");
  model.nu = to_double(reader.keyed("nu"), reader.where());
  model.gamma = to_double(reader.keyed("gamma"), reader.where());
  model.offset = to_double(reader.keyed("rho"), reader.where());
  model.train_size = to_u64(reader.keyed("train_size"), reader.where());
  model.dimension = to_u64(reader.keyed("dimension"), reader.where());
  const auto count = to_u64(reader.keyed("support_vectors"), reader.where());
  for (std::uint64_t i = 0; i < count; ++i) {
    std::istringstream line(reader.next());
    double alpha = 0.0;
    std::size_t nnz = 0;
    if (!(line >> alpha >> nnz)) {
      throw DataError(reader.where() + ": bad support vector line");
    }
    SparseVector sv;
    sv.dimension = model.dimension;
    sv.entries.reserve(nnz);
    for (std::size_t e = 0; e < nnz; ++e) {
      std::size_t idx = 0;
      double value = 0.0;
      if (!(line >> idx >> value)) {
        throw DataError(reader.where() + ": bad support vector entry");
      }
      sv.entries.emplace_back(idx, value);
    }
    model.coefficients.push_back(alpha);
    model.support_vectors.push_back(std::move(sv));
  }
  reader.expect("---end");
  return model;
}

LinearSvmModel read_linear(LineReader& reader) {
  LinearSvmModel model;
  reader.expect("---linear-svm");
  model.lambda = to_double(reader.keyed("lambda"), reader.where());
  model.bias = to_double(reader.keyed("bias"), reader.where());
  model.epochs_trained = to_u64(reader.keyed("epochs"), reader.where());
  const auto dimension = to_u64(reader.keyed("dimension"), reader.where());
  model.weights.assign(dimension, 0.0);
  const auto nonzeros = to_u64(reader.keyed("nonzeros"), reader.where());
  for (std::uint64_t i = 0; i < nonzeros; ++i) {
    std::istringstream line(reader.next());
    std::size_t idx = 0;
    std::string field;
    if (!(line >> idx >> field)) {
      throw DataError(reader.where() + ": bad weight line");
    }
    if (idx >= model.weights.size()) {
      throw DataError(reader.where() + ": weight index out of range");
    }
    model.weights[idx] = to_double(field, reader.where());
  }
  reader.expect("---end");
  return model;
}

TextCnnModel read_cnn(LineReader& reader,
                      std::shared_ptr<const Vocabulary> vocab) {
  TextCnnModel model;
  model.vocabulary = vocab;
  reader.expect("---text-cnn");
  CnnConfig cfg;
  cfg.n_filters = to_u64(reader.keyed("n_filters"), reader.where());
  cfg.kernel_size = to_u64(reader.keyed("kernel_size"), reader.where());
  cfg.dropout_p = to_double(reader.keyed("dropout"), reader.where());
  cfg.epochs = to_u64(reader.keyed("epochs"), reader.where());
  cfg.learning_rate = to_double(reader.keyed("learning_rate"), reader.where());
  cfg.batch_size = to_u64(reader.keyed("batch_size"), reader.where());
  cfg.max_len = to_u64(reader.keyed("max_len"), reader.where());
  cfg.seed = to_u64(reader.keyed("seed"), reader.where());
  const auto dim = to_u64(reader.keyed("embedding_dim"), reader.where());
  const auto trainable = to_u64(reader.keyed("trainable"), reader.where());
  model.config = cfg;

  std::size_t rows = 0;
  std::size_t cols = 0;
  model.embeddings.vectors =
      read_matrix_section(reader, "embeddings", &rows, &cols);
  model.embeddings.dim = cols;
  model.embeddings.trainable = trainable != 0;
  if (cols != dim) {
    throw DataError("embedding matrix dim disagrees with embedding_dim");
  }
  if (rows != vocab->dimension()) {
    throw DataError("embedding matrix rows disagree with vocabulary");
  }

  model.filters = read_matrix_section(reader, "filters", &rows, &cols);
  if (rows != cfg.n_filters || cols != cfg.kernel_size * dim) {
    throw DataError("filter matrix shape disagrees with config");
  }
  model.filter_bias = read_matrix_section(reader, "filter_bias", &rows, &cols);
  if (rows != 1 || cols != cfg.n_filters) {
    throw DataError("filter bias shape disagrees with config");
  }
  model.dense_weights =
      read_matrix_section(reader, "dense_weights", &rows, &cols);
  if (rows != TextCnnModel::kClasses || cols != cfg.n_filters) {
    throw DataError("dense weight shape disagrees with config");
  }
  model.dense_bias = read_matrix_section(reader, "dense_bias", &rows, &cols);
  if (rows != 1 || cols != TextCnnModel::kClasses) {
    throw DataError("dense bias shape disagrees with config");
  }
  reader.expect("---end");
  return model;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::OneClassSvm:
      return "one-class-svm";
    case ModelKind::LinearSvm:
      return "linear-svm";
    case ModelKind::TextCnn:
      return "text-cnn";
  }
  throw DataError("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "one-class-svm") return ModelKind::OneClassSvm;
  if (name == "linear-svm") return ModelKind::LinearSvm;
  if (name == "text-cnn") return ModelKind::TextCnn;
  throw DataError("unknown model kind \"" + name + "\"");
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_one_class_model(std::ostream& out, const OneClassSvmModel& model,
                           const Vocabulary& vocab) {
  write_header(out, ModelKind::OneClassSvm, vocab);
  write_vocabulary(out, vocab);
  out << "---one-class-svm\n";
  out << "nu " << format_double(model.nu) << "\n";
  out << "gamma " << format_double(model.gamma) << "\n";
  out << "rho " << format_double(model.offset) << "\n";
  out << "train_size " << model.train_size << "\n";
  out << "dimension " << model.dimension << "\n";
  out << "support_vectors " << model.support_vectors.size() << "\n";
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    out << format_double(model.coefficients[i]) << " "
        << model.support_vectors[i].entries.size();
    for (const auto& [idx, value] : model.support_vectors[i].entries) {
      out << " " << idx << " " << format_double(value);
    }
    out << "\n";
  }
  out << "---end\n";
}

void write_linear_svm_model(std::ostream& out, const LinearSvmModel& model,
                            const Vocabulary& vocab) {
  write_header(out, ModelKind::LinearSvm, vocab);
  write_vocabulary(out, vocab);
  out << "---linear-svm\n";
  out << "lambda " << format_double(model.lambda) << "\n";
  out << "bias " << format_double(model.bias) << "\n";
  out << "epochs " << model.epochs_trained << "\n";
  out << "dimension " << model.weights.size() << "\n";
  std::size_t nonzeros = 0;
  for (double w : model.weights) {
    if (w != 0.0) ++nonzeros;
  }
  out << "nonzeros " << nonzeros << "\n";
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    if (model.weights[i] != 0.0) {
      out << i << " " << format_double(model.weights[i]) << "\n";
    }
  }
  out << "---end\n";
}

void write_text_cnn_model(std::ostream& out, const TextCnnModel& model) {
  if (!model.vocabulary) {
    throw DataError("text-cnn model has no vocabulary to persist");
  }
  const Vocabulary& vocab = *model.vocabulary;
  write_header(out, ModelKind::TextCnn, vocab);
  write_vocabulary(out, vocab);
  const CnnConfig& cfg = model.config;
  out << "---text-cnn\n";
  out << "n_filters " << cfg.n_filters << "\n";
  out << "kernel_size " << cfg.kernel_size << "\n";
  out << "dropout " << format_double(cfg.dropout_p) << "\n";
  out << "epochs " << cfg.epochs << "\n";
  out << "learning_rate " << format_double(cfg.learning_rate) << "\n";
  out << "batch_size " << cfg.batch_size << "\n";
  out << "max_len " << cfg.max_len << "\n";
  out << "seed " << cfg.seed << "\n";
  out << "embedding_dim " << model.embeddings.dim << "\n";
  out << "trainable " << (model.embeddings.trainable ? 1 : 0) << "\n";
  write_matrix_section(out, "embeddings", model.embeddings.vectors,
                       model.embeddings.rows(), model.embeddings.dim);
  write_matrix_section(out, "filters", model.filters, cfg.n_filters,
                       cfg.kernel_size * model.embeddings.dim);
  write_matrix_section(out, "filter_bias", model.filter_bias, 1,
                       cfg.n_filters);
  write_matrix_section(out, "dense_weights", model.dense_weights,
                       TextCnnModel::kClasses, cfg.n_filters);
  write_matrix_section(out, "dense_bias", model.dense_bias, 1,
                       TextCnnModel::kClasses);
  out << "---end\n";
}

namespace {

void save_to(const std::string& path,
             const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write model file \"" + path + "\"");
  }
  writer(out);
}

}  // namespace

void save_one_class_model(const std::string& path,
                          const OneClassSvmModel& model,
                          const Vocabulary& vocab) {
  save_to(path, [&](std::ostream& out) {
    write_one_class_model(out, model, vocab);
  });
}

void save_linear_svm_model(const std::string& path,
                           const LinearSvmModel& model,
                           const Vocabulary& vocab) {
  save_to(path, [&](std::ostream& out) {
    write_linear_svm_model(out, model, vocab);
  });
}

void save_text_cnn_model(const std::string& path, const TextCnnModel& model) {
  save_to(path, [&](std::ostream& out) { write_text_cnn_model(out, model); });
}

LoadedModel read_model(std::istream& in, const std::string& origin) {
  LineReader reader(in, origin);
  std::istringstream header(reader.next());
  std::string magic;
  int version = 0;
  std::string kind_name;
  std::string hash;
  if (!(header >> magic >> version >> kind_name >> hash) || magic != "NGATE") {
    throw DataError(origin + ": not a NGATE model container");
  }
  if (version != kContainerVersion) {
    throw DataError(origin + ": unsupported container version " +
                    std::to_string(version));
  }

  LoadedModel loaded;
  loaded.kind = model_kind_from_string(kind_name);
  loaded.vocabulary = read_vocabulary(reader, hash);
  switch (loaded.kind) {
    case ModelKind::OneClassSvm:
      loaded.one_class = read_one_class(reader);
      break;
    case ModelKind::LinearSvm:
      loaded.linear = read_linear(reader);
      break;
    case ModelKind::TextCnn:
      loaded.cnn = read_cnn(reader, loaded.vocabulary);
      break;
  }
  return loaded;
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open model file \"" + path + "\"");
  }
  return read_model(in, path);
}

}  // namespace newsgate
