#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "newsgate/cnn.hpp"
#include "newsgate/corpus.hpp"
#include "newsgate/linear_svm.hpp"
#include "newsgate/one_class_svm.hpp"

namespace newsgate {

// Versioned text container shared by all trained models. First line:
// `NGATE <version> <kind> <vocab-hash>`; sections are delimited by
// `---<name>`; every number is printed with full round-trip precision,
// so save -> load -> save is byte-identical.
inline constexpr int kContainerVersion = 1;

enum class ModelKind { OneClassSvm, LinearSvm, TextCnn };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct LoadedModel {
  ModelKind kind = ModelKind::LinearSvm;
  std::shared_ptr<const Vocabulary> vocabulary;
  std::optional<OneClassSvmModel> one_class;
  std::optional<LinearSvmModel> linear;
  std::optional<TextCnnModel> cnn;
};

void save_one_class_model(const std::string& path,
                          const OneClassSvmModel& model,
                          const Vocabulary& vocab);
void save_linear_svm_model(const std::string& path,
                           const LinearSvmModel& model,
                           const Vocabulary& vocab);
void save_text_cnn_model(const std::string& path, const TextCnnModel& model);

void write_one_class_model(std::ostream& out, const OneClassSvmModel& model,
                           const Vocabulary& vocab);
void write_linear_svm_model(std::ostream& out, const LinearSvmModel& model,
                            const Vocabulary& vocab);
void write_text_cnn_model(std::ostream& out, const TextCnnModel& model);

// Rejects unknown versions, unknown kinds, and containers whose embedded
// vocabulary does not match the hash in the header.
LoadedModel load_model(const std::string& path);
LoadedModel read_model(std::istream& in, const std::string& origin);

// Full-round-trip decimal formatting used by every container payload.
std::string format_double(double value);

}  // namespace newsgate
