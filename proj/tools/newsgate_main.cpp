#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "newsgate/errors.hpp"
#include "newsgate/pipeline.hpp"

namespace {

void add_options(CLI::App& app, newsgate::PipelineConfig& cfg) {
  app.add_option("--input", cfg.input, "Input corpus file");
  app.add_option("--output", cfg.output, "Primary output file");
  app.add_option("--output-dir", cfg.output_dir,
                 "Directory for derived output files");
  app.add_option("--lexicon", cfg.lexicon, "Valence lexicon tsv");
  app.add_option("--model", cfg.model, "Model container path");
  app.add_option("--embeddings", cfg.embeddings,
                 "Pretrained word vector file (GloVe text layout)");
  app.add_option("--format", cfg.format, "Input corpus format (jsonl|tsv)");

  app.add_option("--scorer.caps_boost", cfg.scorer.caps_boost, "");
  app.add_option("--scorer.negation_scalar", cfg.scorer.negation_scalar, "");
  app.add_option("--scorer.negation_window", cfg.scorer.negation_window, "");
  app.add_option("--scorer.booster_decay_2", cfg.scorer.booster_decay_2, "");
  app.add_option("--scorer.booster_decay_3", cfg.scorer.booster_decay_3, "");
  app.add_option("--scorer.exclamation_step", cfg.scorer.exclamation_step, "");
  app.add_option("--scorer.max_exclamations", cfg.scorer.max_exclamations, "");
  app.add_option("--scorer.but_before_weight", cfg.scorer.but_before_weight, "");
  app.add_option("--scorer.but_after_weight", cfg.scorer.but_after_weight, "");
  app.add_option("--scorer.alpha", cfg.scorer.alpha, "");
  app.add_option("--scorer.neutral_threshold", cfg.scorer.neutral_threshold, "");

  app.add_option("--dtm.min_count", cfg.min_count,
                 "Vocabulary frequency threshold");

  app.add_option("--filtration.nu_grid", cfg.nu_grid, "nu grid values");
  app.add_option("--filtration.gamma_grid", cfg.gamma_grid,
                 "gamma grid values");
  app.add_option("--filtration.folds", cfg.folds, "");
  app.add_option("--filtration.repeats", cfg.repeats, "");
  app.add_option("--filtration.seed", cfg.filtration_seed, "");
  app.add_option("--filtration.margin", cfg.margin,
                 "Quarantine decision threshold shift");
  app.add_option("--filtration.tol", cfg.svm_tol, "");
  app.add_option("--filtration.max_passes", cfg.max_passes, "");

  app.add_option("--split.test_fraction", cfg.test_fraction, "");
  app.add_option("--split.seed", cfg.split_seed, "");

  app.add_option("--classifier", cfg.classifier, "cnn | dtm-svm");
  app.add_flag("--warm-start", cfg.warm_start,
               "Continue training from the existing model container");
  app.add_option("--svm.lambda", cfg.svm_lambda, "");
  app.add_option("--svm.epochs", cfg.svm_epochs, "");
  app.add_option("--svm.seed", cfg.svm_seed, "");

  app.add_option("--cnn.filters", cfg.cnn.n_filters, "");
  app.add_option("--cnn.kernel", cfg.cnn.kernel_size, "");
  app.add_option("--cnn.dropout", cfg.cnn.dropout_p, "");
  app.add_option("--cnn.epochs", cfg.cnn.epochs, "");
  app.add_option("--cnn.lr", cfg.cnn.learning_rate, "");
  app.add_option("--cnn.batch", cfg.cnn.batch_size, "");
  app.add_option("--cnn.max_len", cfg.cnn.max_len, "");
  app.add_option("--cnn.seed", cfg.cnn.seed, "");
  app.add_option("--cnn.dim", cfg.embedding_dim, "Embedding dimension");
  app.add_flag("--cnn.trainable", cfg.cnn_trainable,
               "Update embeddings during training");

  app.add_option("--gradcheck.filters", cfg.check_filters, "");
  app.add_option("--gradcheck.kernel", cfg.check_kernel, "");
  app.add_option("--gradcheck.dim", cfg.check_dim, "");
  app.add_option("--gradcheck.len", cfg.check_len, "");
  app.add_option("--gradcheck.seeds", cfg.check_seeds, "");
  app.add_option("--gradcheck.epsilon", cfg.check_epsilon, "");
  app.add_option("--gradcheck.threshold", cfg.check_threshold, "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"newsgate - gate a news stream down to its positive documents"};
  app.set_config("--config", "", "Flat key=value config file with [section] headers");

  newsgate::PipelineConfig cfg;
  add_options(app, cfg);

  app.require_subcommand(1);
  auto* ingest =
      app.add_subcommand("ingest", "Validate a corpus and write canonical jsonl");
  auto* annotate = app.add_subcommand(
      "annotate", "Assign weak polarity labels with the valence scorer");
  auto* filtrate = app.add_subcommand(
      "filtrate", "Quarantine weak positives the one-class filter claims");
  auto* train =
      app.add_subcommand("train", "Train a classifier and write reports");
  auto* evaluate =
      app.add_subcommand("evaluate", "Evaluate a model container on a corpus");
  auto* gate = app.add_subcommand(
      "gate", "Stream jsonl on stdin, emit predicted-positive records");
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "Verify CNN backpropagation against finite differences");
  for (auto* sub : {ingest, annotate, filtrate, train, evaluate, gate, gradcheck}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest->parsed()) {
      newsgate::run_ingest(cfg, std::cout, std::cerr);
    } else if (annotate->parsed()) {
      newsgate::run_annotate(cfg, std::cout, std::cerr);
    } else if (filtrate->parsed()) {
      newsgate::run_filtrate(cfg, std::cout, std::cerr);
    } else if (train->parsed()) {
      newsgate::run_train(cfg, std::cout, std::cerr);
    } else if (evaluate->parsed()) {
      newsgate::run_evaluate(cfg, std::cout, std::cerr);
    } else if (gate->parsed()) {
      newsgate::run_gate(cfg, std::cin, std::cout, std::cerr);
    } else if (gradcheck->parsed()) {
      return newsgate::run_gradcheck(cfg, std::cout, std::cerr) ? 0 : 1;
    }
  } catch (const newsgate::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const newsgate::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
