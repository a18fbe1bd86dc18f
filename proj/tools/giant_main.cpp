#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "giant/pipeline.hpp"

namespace {

using namespace giant;

bool file_exists(const std::string& path) {
  return std::filesystem::exists(path);
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (const char c : s)
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

struct CliState {
  std::string config_path;
  std::string out_override;
  std::string corpus_override;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  std::string variant_override;

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_run_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (!corpus_override.empty()) cfg.corpus_path = corpus_override;
    if (has_seed) cfg.seed = seed_override;
    if (!variant_override.empty()) cfg.variant = variant_override;
    validate_config(cfg);
    return cfg;
  }
};

CorpusArtifact corpus_for(const RunConfig& cfg) {
  if (!file_exists(artifact_path(cfg, artifact::corpus_cache)))
    throw ConfigError("corpus cache missing; run `giant ingest` first");
  return load_corpus_artifact(cfg);
}

void do_ingest(const RunConfig& cfg) {
  const CorpusArtifact corpus = run_ingest(cfg);
  std::printf("ingest: %d users, %d items, %zu records (vocab %d)\n",
              corpus.corpus.num_users(), corpus.corpus.num_items(),
              corpus.corpus.train.size() + corpus.corpus.validation.size() +
                  corpus.corpus.test.size(),
              corpus.vocab.size());
}

void do_graph(const RunConfig& cfg) {
  const CorpusArtifact corpus = corpus_for(cfg);
  const NodeEmbeddingTable table = run_graph(cfg, corpus);
  std::printf("graph: trained %dx%d embeddings over %d layers\n",
              static_cast<int>(table.e0.rows()), static_cast<int>(table.e0.cols()),
              table.layers);
}

void do_cluster(const RunConfig& cfg) {
  const NodeEmbeddingTable table = load_graph(cfg);
  const PriorArtifact priors = run_cluster(cfg, table);
  std::printf("cluster: K=%d user alpha=%.6g item alpha=%.6g\n",
              priors.users.clusters(), priors.users.alpha, priors.items.alpha);
}

void do_train(const RunConfig& cfg, bool run_missing) {
  if (!file_exists(artifact_path(cfg, artifact::corpus_cache))) {
    if (!run_missing) throw ConfigError("corpus cache missing; run ingest or pass --all");
    run_ingest(cfg);
  }
  const CorpusArtifact corpus = load_corpus_artifact(cfg);
  if (!file_exists(artifact_path(cfg, artifact::graph_checkpoint))) {
    if (!run_missing) throw ConfigError("graph checkpoint missing; run graph or pass --all");
    run_graph(cfg, corpus);
  }
  const NodeEmbeddingTable table = load_graph(cfg);
  if (!file_exists(artifact_path(cfg, artifact::user_clusters)) ||
      !file_exists(artifact_path(cfg, artifact::item_clusters))) {
    if (!run_missing) throw ConfigError("cluster checkpoints missing; run cluster or pass --all");
    run_cluster(cfg, table);
  }
  const PriorArtifact priors = load_clusters(cfg);
  const ModelArtifact model = run_train(cfg, corpus, table, priors);
  std::printf("train: variant=%s best epoch %d (val rmse %.6g)\n",
              cfg.variant.c_str(), model.manifest.at("epoch").get<int>(),
              model.manifest.at("metrics").at("best_val_rmse").get<double>());
}

void do_evaluate(const RunConfig& cfg) {
  const CorpusArtifact corpus = corpus_for(cfg);
  const ModelArtifact model = load_model(cfg, corpus);
  const MetricBundle m = run_evaluate(cfg, corpus, *model.model);
  std::printf("evaluate: rmse %.4f mae %.4f hit@10 %.4f ndcg@10 %.4f\n",
              m.rmse, m.mae, m.ranking.hit_ratio_10, m.ranking.ndcg_10);
  std::printf("evaluate: diversity %.4f coherence(user %.4f, item %.4f)\n",
              m.diversity_max, m.coherence_user, m.coherence_item);
}

void do_explain(const RunConfig& cfg, const std::string& user,
                const std::string& item) {
  const CorpusArtifact corpus = corpus_for(cfg);
  const ModelArtifact model = load_model(cfg, corpus);
  const Explanation e = run_explain(cfg, corpus, *model.model, user, item);
  const std::string json = explanation_to_json(e);
  std::cout << json << '\n';
  const std::string file = artifact_path(
      cfg, ("explanation_" + sanitize(user) + "_" + sanitize(item) + ".json").c_str());
  std::ofstream out(file);
  out << json << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GIANT-style explainable recommender pipeline"};
  app.require_subcommand(1);
  // Let global flags (--config/--seed/--out) appear after the subcommand.
  app.fallthrough();

  CliState state;
  app.add_option("--config", state.config_path, "TOML-style config file");
  app.add_option("--out", state.out_override, "output directory override");
  app.add_option("--corpus", state.corpus_override, "corpus file override");
  app.add_option("--seed", state.seed_override, "root seed override")
      ->each([&](const std::string&) { state.has_seed = true; });

  auto* ingest_cmd = app.add_subcommand("ingest", "load, filter and split the corpus");
  auto* graph_cmd = app.add_subcommand("graph", "build the interaction graph and train embeddings");
  auto* cluster_cmd = app.add_subcommand("cluster", "k-means over graph embeddings");
  auto* train_cmd = app.add_subcommand("train", "train the variational recommender");
  bool train_all_missing = false;
  train_cmd->add_flag("--all", train_all_missing, "run any missing prior stages first");
  train_cmd->add_option("--variant", state.variant_override,
                        "giant | autoencoder | stand_prior | indiv_prior");
  auto* eval_cmd = app.add_subcommand("evaluate", "accuracy, ranking, diversity, comprehensiveness, coherence");
  std::string explain_user, explain_item;
  auto* explain_cmd = app.add_subcommand("explain", "sentence-level explanation for a user-item pair");
  explain_cmd->add_option("user", explain_user, "user id")->required();
  explain_cmd->add_option("item", explain_item, "item id")->required();
  auto* all_cmd = app.add_subcommand("all", "ingest -> graph -> cluster -> train -> evaluate");
  all_cmd->add_option("--variant", state.variant_override,
                      "giant | autoencoder | stand_prior | indiv_prior");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = state.resolve();
    if (ingest_cmd->parsed()) {
      do_ingest(cfg);
    } else if (graph_cmd->parsed()) {
      do_graph(cfg);
    } else if (cluster_cmd->parsed()) {
      do_cluster(cfg);
    } else if (train_cmd->parsed()) {
      do_train(cfg, train_all_missing);
    } else if (eval_cmd->parsed()) {
      do_evaluate(cfg);
    } else if (explain_cmd->parsed()) {
      do_explain(cfg, explain_user, explain_item);
    } else if (all_cmd->parsed()) {
      do_ingest(cfg);
      do_graph(cfg);
      do_cluster(cfg);
      do_train(cfg, false);
      do_evaluate(cfg);
    }
  } catch (const MissingEntityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
