#include "newsgate/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "newsgate/dtm.hpp"
#include "newsgate/errors.hpp"
#include "newsgate/eval.hpp"
#include "newsgate/linear_svm.hpp"
#include "newsgate/model_io.hpp"
#include "newsgate/one_class_svm.hpp"

namespace newsgate {

namespace {

DocumentSet load_input(const PipelineConfig& cfg) {
  if (cfg.input.empty()) {
    throw IoError("no input corpus given (--input)");
  }
  return load_corpus(cfg.input, corpus_format_from_string(cfg.format));
}

std::ofstream open_output(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write output file \"" + path + "\"");
  }
  return out;
}

int signed_label_of(const NewsDocument& doc) {
  auto cls = binary_gate_class(doc);
  if (!cls) {
    throw DataError("document \"" + doc.id +
                    "\" carries no label; annotate the corpus first");
  }
  return *cls == 1 ? 1 : -1;
}

// The split stratifies on weak_label, so documents that only carry a
// gold label borrow it for splitting and training.
DocumentSet with_effective_weak_labels(const DocumentSet& docs) {
  DocumentSet out = docs;
  for (auto& doc : out.documents) {
    if (!doc.weak_label && doc.gold_label) doc.weak_label = doc.gold_label;
  }
  return out;
}

std::vector<CvCell> make_grid(const PipelineConfig& cfg) {
  std::vector<CvCell> grid;
  for (double nu : cfg.nu_grid) {
    for (double gamma : cfg.gamma_grid) {
      grid.push_back({nu, gamma});
    }
  }
  return grid;
}

EvalReport report_for(const std::vector<int>& gold,
                      const std::vector<int>& pred) {
  return evaluate_predictions(gold, pred, {1, -1});
}

int predict_signed(const LoadedModel& model, const NewsDocument& doc,
                   double* confidence, double margin) {
  switch (model.kind) {
    case ModelKind::TextCnn: {
      auto prediction = predict_cnn(*model.cnn, doc);
      if (confidence) *confidence = prediction.confidence;
      return prediction.positive ? 1 : -1;
    }
    case ModelKind::LinearSvm: {
      SparseVector row = vectorize_document(doc, *model.vocabulary);
      double value = decision_value(*model.linear, row);
      if (confidence) *confidence = 1.0 / (1.0 + std::exp(-std::abs(value)));
      return value >= 0.0 ? 1 : -1;
    }
    case ModelKind::OneClassSvm: {
      // The one-class model was trained on non-positive documents, so a
      // document it claims is gated out.
      SparseVector row = vectorize_document(doc, *model.vocabulary);
      double value = decision(*model.one_class, row);
      if (confidence) *confidence = 1.0 / (1.0 + std::exp(-std::abs(value)));
      return value >= margin ? -1 : 1;
    }
  }
  throw DataError("unknown model kind");
}

void write_history(const TrainHistory& history, const std::string& path) {
  auto out = open_output(path);
  out << "epochs=" << history.mean_loss.size() << "\n";
  for (std::size_t e = 0; e < history.mean_loss.size(); ++e) {
    out << "epoch." << (e + 1) << ".loss=" << format_double(history.mean_loss[e])
        << "\n";
    out << "epoch." << (e + 1)
        << ".accuracy=" << format_double(history.train_accuracy[e]) << "\n";
  }
  out << "validation_accuracy=" << format_double(history.validation_accuracy)
      << "\n";
}

}  // namespace

std::string PipelineConfig::path_or_default(const std::string& explicit_path,
                                            const std::string& filename) const {
  if (!explicit_path.empty()) return explicit_path;
  return (std::filesystem::path(output_dir) / filename).string();
}

void run_ingest(const PipelineConfig& cfg, std::ostream& out, std::ostream&) {
  DocumentSet docs = load_input(cfg);
  const std::string path = cfg.path_or_default(cfg.output, "corpus.jsonl");
  auto file = open_output(path);
  write_corpus(docs, file, CorpusFormat::Jsonl);

  std::size_t gold = 0;
  std::size_t weak = 0;
  for (const auto& doc : docs.documents) {
    if (doc.gold_label) ++gold;
    if (doc.weak_label) ++weak;
  }
  out << "documents=" << docs.size() << " gold_labels=" << gold
      << " weak_labels=" << weak << "\n";
  out << "corpus=" << path << "\n";
}

void run_annotate(const PipelineConfig& cfg, std::ostream& out,
                  std::ostream& err) {
  DocumentSet docs = load_input(cfg);
  if (cfg.lexicon.empty()) {
    throw IoError("no lexicon given (--lexicon)");
  }
  ValenceLexicon lexicon = load_lexicon(cfg.lexicon);
  if (lexicon.empty()) {
    err << "warning: lexicon \"" << cfg.lexicon
        << "\" has no valence entries; every document scores neutral\n";
  }
  DocumentSet annotated = annotate_corpus(docs, lexicon, cfg.scorer);

  const std::string path = cfg.path_or_default(cfg.output, "annotated.jsonl");
  auto file = open_output(path);
  write_corpus(annotated, file, CorpusFormat::Jsonl);

  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t neutral = 0;
  for (const auto& doc : annotated.documents) {
    switch (*doc.weak_label) {
      case PolarityLabel::Positive: ++positive; break;
      case PolarityLabel::Negative: ++negative; break;
      case PolarityLabel::Neutral: ++neutral; break;
    }
  }
  out << "positive=" << positive << " negative=" << negative
      << " neutral=" << neutral << "\n";
  out << "annotated=" << path << "\n";
}

void run_filtrate(const PipelineConfig& cfg, std::ostream& out,
                  std::ostream&) {
  DocumentSet docs = load_input(cfg);

  DocumentSet positives;
  DocumentSet negatives;
  positives.provenance = docs.provenance;
  negatives.provenance = docs.provenance;
  for (const auto& doc : docs.documents) {
    if (!doc.weak_label) {
      throw DataError("document \"" + doc.id +
                      "\" has no weak label; run annotate first");
    }
    if (*doc.weak_label == PolarityLabel::Positive) {
      positives.documents.push_back(doc);
    } else {
      // Negative and neutral news together form the reference class.
      negatives.documents.push_back(doc);
    }
  }
  if (negatives.empty()) {
    throw DataError("no negative or neutral documents to train the filter on");
  }
  if (negatives.size() < cfg.folds) {
    throw DataError("only " + std::to_string(negatives.size()) +
                    " negative/neutral documents for " +
                    std::to_string(cfg.folds) + " folds");
  }

  auto vocab = std::make_shared<Vocabulary>(
      build_vocabulary(docs, cfg.min_count));
  DocumentTermMatrix negative_counts = build_dtm(negatives, vocab);
  IdfTable idf = fit_idf(negative_counts);
  DocumentTermMatrix negative_rows = apply_tfidf(negative_counts, idf, true);

  std::vector<SparseVector> positive_rows;
  positive_rows.reserve(positives.size());
  for (const auto& doc : positives.documents) {
    positive_rows.push_back(
        apply_tfidf_row(vectorize_document(doc, *vocab), idf, true));
  }

  CvSearchResult search = cv_grid_search(negative_rows.rows, make_grid(cfg),
                                         cfg.folds, cfg.repeats,
                                         cfg.filtration_seed);
  OneClassSvmModel model =
      train_one_class(negative_rows.rows, search.selected.nu,
                      search.selected.gamma, cfg.svm_tol, cfg.max_passes);

  auto [kept, quarantined] =
      filter_positive_pool(model, positives, positive_rows, cfg.margin);

  const std::string kept_path = cfg.path_or_default("", "kept.jsonl");
  const std::string quarantine_path =
      cfg.path_or_default("", "quarantined.jsonl");
  const std::string filtrated_path =
      cfg.path_or_default(cfg.output, "filtrated.jsonl");
  const std::string report_path = cfg.path_or_default("", "search_report.txt");
  const std::string model_path = cfg.path_or_default("", "filter_model.ngate");

  {
    auto file = open_output(kept_path);
    write_corpus(kept, file);
  }
  {
    auto file = open_output(quarantine_path);
    write_corpus(quarantined, file);
  }
  {
    // The corpus with quarantined positives removed, original order.
    std::unordered_set<std::string> dropped;
    for (const auto& doc : quarantined.documents) dropped.insert(doc.id);
    DocumentSet filtrated;
    filtrated.provenance = docs.provenance;
    for (const auto& doc : docs.documents) {
      if (dropped.count(doc.id) == 0) filtrated.documents.push_back(doc);
    }
    auto file = open_output(filtrated_path);
    write_corpus(filtrated, file);
  }
  {
    auto file = open_output(report_path);
    file << "folds=" << search.folds << "\n";
    file << "repeats=" << search.repeats << "\n";
    file << "fits=" << search.total_fits() << "\n";
    file << "selected.nu=" << format_double(search.selected.nu) << "\n";
    file << "selected.gamma=" << format_double(search.selected.gamma) << "\n";
    file << "criterion=" << format_double(search.criterion_value) << "\n";
    for (std::size_t c = 0; c < search.grid.size(); ++c) {
      file << "cell nu=" << format_double(search.grid[c].nu)
           << " gamma=" << format_double(search.grid[c].gamma)
           << " mean=" << format_double(search.mean_scores[c]) << "\n";
    }
  }
  save_one_class_model(model_path, model, *vocab);

  out << "selected nu=" << format_double(search.selected.nu)
      << " gamma=" << format_double(search.selected.gamma) << "\n";
  out << "kept=" << kept.size() << " quarantined=" << quarantined.size()
      << " reference=" << negatives.size() << "\n";
  out << "kept_file=" << kept_path << " quarantine_file=" << quarantine_path
      << "\n";
}

void run_train(const PipelineConfig& cfg, std::ostream& out, std::ostream&) {
  DocumentSet docs = with_effective_weak_labels(load_input(cfg));
  for (const auto& doc : docs.documents) {
    signed_label_of(doc);  // fail early on unlabeled documents
  }

  auto [train_docs, test_docs] =
      train_test_split(docs, cfg.test_fraction, cfg.split_seed);

  auto vocab = std::make_shared<Vocabulary>(
      build_vocabulary(train_docs, cfg.min_count));

  const std::string model_path = cfg.path_or_default(cfg.model, "model.ngate");
  const std::string train_report_path =
      cfg.path_or_default("", "train_report.txt");
  const std::string test_report_path =
      cfg.path_or_default("", "test_report.txt");

  std::vector<int> train_gold;
  std::vector<int> test_gold;
  for (const auto& doc : train_docs.documents)
    train_gold.push_back(signed_label_of(doc));
  for (const auto& doc : test_docs.documents)
    test_gold.push_back(signed_label_of(doc));

  std::vector<int> train_pred;
  std::vector<int> test_pred;

  if (cfg.classifier == "dtm-svm") {
    DocumentTermMatrix X = build_dtm(train_docs, vocab);
    LinearSvmModel model;
    if (cfg.warm_start) {
      LoadedModel previous = load_model(model_path);
      if (previous.kind != ModelKind::LinearSvm) {
        throw DataError("warm start model is not a linear-svm container");
      }
      if (previous.vocabulary->content_hash() != vocab->content_hash()) {
        throw DataError("incompatible vocabulary hash for warm start");
      }
      model = *previous.linear;
      LinearSvmModel continued =
          train_linear_svm(X, train_gold, cfg.svm_lambda, cfg.svm_epochs,
                           cfg.svm_seed);
      // Pegasos restarts its schedule; warm start keeps the old weights
      // as the new starting point by averaging them in.
      for (std::size_t i = 0; i < model.weights.size(); ++i) {
        continued.weights[i] =
            0.5 * (continued.weights[i] + model.weights[i]);
      }
      continued.bias = 0.5 * (continued.bias + model.bias);
      model = continued;
    } else {
      model = train_linear_svm(X, train_gold, cfg.svm_lambda, cfg.svm_epochs,
                               cfg.svm_seed);
    }
    for (const auto& row : X.rows) train_pred.push_back(predict(model, row));
    for (const auto& doc : test_docs.documents) {
      test_pred.push_back(predict(model, vectorize_document(doc, *vocab)));
    }
    save_linear_svm_model(model_path, model, *vocab);
  } else if (cfg.classifier == "cnn") {
    CnnConfig cnn_cfg = cfg.cnn;
    TextCnnModel model;
    if (cfg.warm_start) {
      LoadedModel previous = load_model(model_path);
      if (previous.kind != ModelKind::TextCnn) {
        throw DataError("warm start model is not a text-cnn container");
      }
      if (previous.vocabulary->content_hash() != vocab->content_hash()) {
        throw DataError("incompatible vocabulary hash for warm start");
      }
      model = std::move(*previous.cnn);
      model.config.epochs = cnn_cfg.epochs;
      model.config.seed = cnn_cfg.seed;
    } else {
      EmbeddingTable embeddings =
          cfg.embeddings.empty()
              ? random_embeddings(*vocab, cfg.embedding_dim, cnn_cfg.seed)
              : load_pretrained_embeddings(cfg.embeddings, *vocab,
                                           cfg.embedding_dim, cnn_cfg.seed);
      embeddings.trainable = cfg.cnn_trainable;
      model = init_text_cnn(cnn_cfg, vocab, std::move(embeddings));
    }
    TrainHistory history = train_cnn(model, train_docs, test_docs);
    write_history(history, cfg.path_or_default("", "train_history.txt"));
    for (const auto& doc : train_docs.documents) {
      train_pred.push_back(predict_cnn(model, doc).positive ? 1 : -1);
    }
    for (const auto& doc : test_docs.documents) {
      test_pred.push_back(predict_cnn(model, doc).positive ? 1 : -1);
    }
    save_text_cnn_model(model_path, model);
  } else {
    throw IoError("unknown classifier \"" + cfg.classifier +
                  "\" (expected cnn or dtm-svm)");
  }

  EvalReport train_report = report_for(train_gold, train_pred);
  EvalReport test_report = report_for(test_gold, test_pred);
  write_report(train_report, train_report_path);
  write_report(test_report, test_report_path);

  out << "train_n=" << train_report.n
      << " train_accuracy=" << format_double(train_report.accuracy) << "\n";
  out << "test_n=" << test_report.n
      << " test_accuracy=" << format_double(test_report.accuracy) << "\n";
  out << "model=" << model_path << "\n";
}

void run_evaluate(const PipelineConfig& cfg, std::ostream& out,
                  std::ostream&) {
  if (cfg.model.empty()) {
    throw IoError("no model given (--model)");
  }
  LoadedModel model = load_model(cfg.model);
  DocumentSet docs = load_input(cfg);

  std::vector<int> gold;
  std::vector<int> pred;
  for (const auto& doc : docs.documents) {
    // Gold labels are the reference when present; otherwise the weak label.
    std::optional<PolarityLabel> label =
        doc.gold_label ? doc.gold_label : doc.weak_label;
    if (!label) {
      throw DataError("document \"" + doc.id + "\" carries no label");
    }
    gold.push_back(*label == PolarityLabel::Positive ? 1 : -1);
    pred.push_back(predict_signed(model, doc, nullptr, cfg.margin));
  }

  EvalReport report = report_for(gold, pred);
  const std::string path = cfg.path_or_default(cfg.output, "eval_report.txt");
  write_report(report, path);
  out << "n=" << report.n << " accuracy=" << format_double(report.accuracy)
      << "\n";
  out << "report=" << path << "\n";
}

void run_gate(const PipelineConfig& cfg, std::istream& in, std::ostream& out,
              std::ostream& err) {
  if (cfg.model.empty()) {
    throw IoError("no model given (--model)");
  }
  LoadedModel model = load_model(cfg.model);

  const std::string quarantine_path =
      cfg.path_or_default("", "quarantine.jsonl");
  const std::string rejects_path = cfg.path_or_default("", "rejects.jsonl");
  auto quarantine = open_output(quarantine_path);
  auto rejects = open_output(rejects_path);

  std::size_t emitted = 0;
  std::size_t quarantined = 0;
  std::size_t rejected = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    auto reject = [&](const std::string& reason) {
      nlohmann::json r;
      r["line"] = line_no;
      r["error"] = reason;
      r["raw"] = line;
      rejects << r.dump() << "\n";
      ++rejected;
    };

    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      reject("malformed record");
      continue;
    }
    NewsDocument doc;
    try {
      std::istringstream one(line);
      DocumentSet single = parse_corpus(one, CorpusFormat::Jsonl,
                                        "stdin@" + std::to_string(line_no));
      if (single.empty()) {
        reject("empty record");
        continue;
      }
      doc = single.documents.front();
    } catch (const DataError& e) {
      reject(e.what());
      continue;
    }

    double confidence = 0.0;
    int prediction = predict_signed(model, doc, &confidence, cfg.margin);
    j["confidence"] = confidence;
    if (prediction == 1) {
      out << j.dump() << "\n";
      ++emitted;
    } else {
      j["predicted"] = -1;
      quarantine << j.dump() << "\n";
      ++quarantined;
    }
  }
  err << "emitted=" << emitted << " quarantined=" << quarantined
      << " rejected=" << rejected << "\n";
}

bool run_gradcheck(const PipelineConfig& cfg, std::ostream& out,
                   std::ostream&) {
  bool all_pass = true;
  for (std::size_t s = 0; s < cfg.check_seeds; ++s) {
    std::vector<std::pair<std::string, std::uint64_t>> terms;
    for (std::size_t i = 0; i < 16; ++i) {
      terms.emplace_back("term" + std::to_string(i), 16 - i);
    }
    auto vocab = std::make_shared<Vocabulary>(std::move(terms), 1);

    CnnConfig cnn_cfg;
    cnn_cfg.n_filters = cfg.check_filters;
    cnn_cfg.kernel_size = cfg.check_kernel;
    cnn_cfg.max_len = cfg.check_len;
    cnn_cfg.seed = mix_seed(17, s);
    TextCnnModel model = init_text_cnn(
        cnn_cfg, vocab, random_embeddings(*vocab, cfg.check_dim, cnn_cfg.seed));
    model.embeddings.trainable = true;  // include the input gradient group

    Rng rng(mix_seed(99, s));
    std::vector<std::size_t> indices(cfg.check_len);
    for (auto& idx : indices) {
      idx = Vocabulary::kFirstTermIndex +
            static_cast<std::size_t>(uniform_below(rng, vocab->size()));
    }
    auto input = embed_indices(indices, model.embeddings);
    const int label = static_cast<int>(s % 2);

    GradientCheckReport report =
        gradient_check(model, input, label, cfg.check_epsilon);
    const bool pass = report.max_relative_error < cfg.check_threshold;
    all_pass = all_pass && pass;
    out << "seed=" << s << " filters=" << format_double(report.filters)
        << " filter_bias=" << format_double(report.filter_bias)
        << " dense_weights=" << format_double(report.dense_weights)
        << " dense_bias=" << format_double(report.dense_bias)
        << " input=" << format_double(report.input)
        << " max=" << format_double(report.max_relative_error) << " "
        << (pass ? "PASS" : "FAIL") << "\n";
  }
  out << (all_pass ? "gradient check passed" : "gradient check FAILED")
      << "\n";
  return all_pass;
}

}  // namespace newsgate
