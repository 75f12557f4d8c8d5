#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "newsgate/cnn.hpp"
#include "newsgate/valence.hpp"

namespace newsgate {

// Everything the CLI commands consume. Values come from built-in
// defaults, then a `key = value` config file with [section] headers,
// then command-line flags, in increasing precedence. All seeds are
// explicit; no command reads system entropy.
struct PipelineConfig {
  // paths
  std::string input;
  std::string output;      // primary output file of the command
  std::string output_dir = ".";
  std::string lexicon;
  std::string model;       // container path (train writes, evaluate/gate read)
  std::string embeddings;  // optional pretrained vector file
  std::string format = "jsonl";

  // scorer
  ScorerConfig scorer;

  // dtm
  std::uint64_t min_count = 2;
  std::string weighting = "count";  // dtm-svm features: count | tfidf

  // filtration
  std::vector<double> nu_grid{0.05, 0.1, 0.2};
  std::vector<double> gamma_grid{0.01, 0.1, 1.0};
  std::size_t folds = 10;
  std::size_t repeats = 10;
  std::uint64_t filtration_seed = 1;
  double margin = 0.0;     // quarantine threshold shift
  double svm_tol = 1e-8;
  std::size_t max_passes = 200000;

  // split
  double test_fraction = 0.2;
  std::uint64_t split_seed = 2;

  // classifier
  std::string classifier = "cnn";  // cnn | dtm-svm
  bool warm_start = false;
  double svm_lambda = 1e-4;
  std::size_t svm_epochs = 20;
  std::uint64_t svm_seed = 3;
  CnnConfig cnn;
  std::size_t embedding_dim = 50;
  bool cnn_trainable = false;

  // gradcheck
  std::size_t check_filters = 8;
  std::size_t check_kernel = 3;
  std::size_t check_dim = 10;
  std::size_t check_len = 12;
  std::size_t check_seeds = 5;
  double check_epsilon = 1e-5;
  double check_threshold = 1e-4;

  std::string path_or_default(const std::string& explicit_path,
                              const std::string& filename) const;
};

// Command results are written to files under output_dir (or explicit
// paths); human-readable summaries go to `out`, diagnostics to `err`.
// DataError and IoError propagate to the CLI, which maps them to exit
// codes 1 and 2.
void run_ingest(const PipelineConfig& cfg, std::ostream& out,
                std::ostream& err);
void run_annotate(const PipelineConfig& cfg, std::ostream& out,
                  std::ostream& err);
void run_filtrate(const PipelineConfig& cfg, std::ostream& out,
                  std::ostream& err);
void run_train(const PipelineConfig& cfg, std::ostream& out,
               std::ostream& err);
void run_evaluate(const PipelineConfig& cfg, std::ostream& out,
                  std::ostream& err);
void run_gate(const PipelineConfig& cfg, std::istream& in, std::ostream& out,
              std::ostream& err);
// Returns true when every parameter group passes the threshold.
bool run_gradcheck(const PipelineConfig& cfg, std::ostream& out,
                   std::ostream& err);

}  // namespace newsgate
