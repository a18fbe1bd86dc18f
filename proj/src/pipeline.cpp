#include "giant/pipeline.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>
#include <unordered_set>

#include "giant/checkpoint.hpp"

namespace giant {
namespace {

namespace fs = std::filesystem;

void ensure_out_dir(const RunConfig& config) {
  fs::create_directories(config.out_dir);
}

// %.17g round-trips doubles and keeps report files byte-stable.
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_i64(std::ofstream& out, std::int64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_f64(std::ofstream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_str(std::ofstream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::int64_t read_i64(std::ifstream& in) {
  std::int64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
double read_f64(std::ifstream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::string read_str(std::ifstream& in) {
  const std::uint32_t len = read_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  return s;
}

void write_record(std::ofstream& out, const InteractionRecord& r) {
  write_str(out, r.user_id);
  write_str(out, r.item_id);
  write_f64(out, r.rating);
  const char has_ts = r.timestamp.has_value() ? 1 : 0;
  out.write(&has_ts, 1);
  write_i64(out, r.timestamp.value_or(0));
  write_str(out, r.text);
}

InteractionRecord read_record(std::ifstream& in) {
  InteractionRecord r;
  r.user_id = read_str(in);
  r.item_id = read_str(in);
  r.rating = read_f64(in);
  char has_ts = 0;
  in.read(&has_ts, 1);
  const std::int64_t ts = read_i64(in);
  if (has_ts) r.timestamp = ts;
  r.text = read_str(in);
  return r;
}

ThresholdMode threshold_mode_of(const RunConfig& config) {
  return config.threshold_mode == "item_mean" ? ThresholdMode::item_mean
                                              : ThresholdMode::corpus_mean;
}

ModelConfig model_config_of(const RunConfig& config, int word_dim) {
  ModelConfig mc;
  mc.encoder.word_dim = word_dim;
  mc.encoder.kernel_widths = {2, 3};
  mc.encoder.filters_per_width = config.filters;
  mc.encoder.attn_hidden = config.attn_hidden;
  mc.encoder.id_dim = config.id_dim;
  mc.encoder.max_reviews = config.max_reviews;
  mc.latent_dim = config.clusters;
  mc.graph_dim = config.graph_dim;
  mc.tau = config.tau;
  mc.variant = variant_from_string(config.variant);
  mc.eta_form = eta_form_from_string(config.eta_form);
  return mc;
}

std::vector<std::vector<int>> tokenize_records(
    const std::vector<InteractionRecord>& records, const Vocabulary& vocab,
    int max_len) {
  std::vector<std::vector<int>> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back(tokenize_and_truncate(r.text, vocab, max_len));
  return out;
}

}  // namespace

std::string artifact_path(const RunConfig& config, const char* name) {
  return (fs::path(config.out_dir) / name).string();
}

CorpusArtifact run_ingest(const RunConfig& config) {
  if (config.corpus_path.empty())
    throw ConfigError("paths.corpus is required");
  ensure_out_dir(config);

  CorpusArtifact artifact;
  const CorpusFormat format =
      config.format == "csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
  auto records = ingest(config.corpus_path, format, &artifact.stats);
  records = k_core_filter(std::move(records), config.k_core, config.max_reviews);

  Rng vocab_rng(derive_seed("corpus.vocab", config.seed));
  artifact.vocab = build_vocabulary(records, config.min_token_count,
                                    config.word_dim, vocab_rng);
  if (!config.word_vectors.empty())
    load_word_vectors(artifact.vocab, config.word_vectors);

  artifact.corpus = split(records, config.seed);
  artifact.max_len = config.max_len;
  artifact.train_tokens =
      tokenize_records(artifact.corpus.train, artifact.vocab, config.max_len);

  // Binary corpus cache.
  {
    nlohmann::json manifest;
    manifest["kind"] = "corpus";
    manifest["n_train"] = artifact.corpus.train.size();
    manifest["n_validation"] = artifact.corpus.validation.size();
    manifest["n_test"] = artifact.corpus.test.size();
    manifest["vocab_size"] = artifact.vocab.size();
    manifest["word_dim"] = artifact.vocab.word_dim();
    manifest["max_len"] = config.max_len;
    manifest["k_core"] = config.k_core;
    manifest["min_token_count"] = config.min_token_count;
    manifest["seed"] = config.seed;

    std::ofstream out(artifact_path(config, artifact::corpus_cache),
                      std::ios::binary);
    if (!out) throw ConfigError("cannot write corpus cache");
    out << manifest.dump() << '\n';
    for (const auto* list :
         {&artifact.corpus.train, &artifact.corpus.validation,
          &artifact.corpus.test})
      for (const auto& r : *list) write_record(out, r);
    write_u32(out, static_cast<std::uint32_t>(artifact.vocab.size()));
    for (const auto& t : artifact.vocab.index_to_token) write_str(out, t);
    for (Index i = 0; i < artifact.vocab.embeddings.rows(); ++i)
      for (Index j = 0; j < artifact.vocab.embeddings.cols(); ++j)
        write_f64(out, artifact.vocab.embeddings(i, j));
  }

  // Stats JSON (Table-I style corpus summary).
  {
    const auto& c = artifact.corpus;
    const std::size_t n_records =
        c.train.size() + c.validation.size() + c.test.size();
    nlohmann::json stats;
    stats["n_users"] = c.num_users();
    stats["n_items"] = c.num_items();
    stats["n_records"] = n_records;
    stats["n_train"] = c.train.size();
    stats["n_validation"] = c.validation.size();
    stats["n_test"] = c.test.size();
    stats["sparsity"] = static_cast<double>(n_records) /
                        (static_cast<double>(c.num_users()) *
                         static_cast<double>(c.num_items()));
    stats["malformed_skipped"] = artifact.stats.malformed_skipped;
    stats["ratings_clamped"] = artifact.stats.ratings_clamped;
    stats["input_lines"] = artifact.stats.total_lines;
    stats["vocab_size"] = artifact.vocab.size();
    std::ofstream out(artifact_path(config, artifact::corpus_stats));
    out << stats.dump(2) << '\n';
  }
  return artifact;
}

CorpusArtifact load_corpus_artifact(const RunConfig& config) {
  const std::string path = artifact_path(config, artifact::corpus_cache);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("corpus cache not found (run ingest first): " + path);

  std::string line;
  std::getline(in, line);
  nlohmann::json manifest = nlohmann::json::parse(line, nullptr, false);
  if (manifest.is_discarded() || manifest.value("kind", "") != "corpus")
    throw ConfigError("invalid corpus cache: " + path);

  const std::size_t n_train = manifest.at("n_train").get<std::size_t>();
  const std::size_t n_val = manifest.at("n_validation").get<std::size_t>();
  const std::size_t n_test = manifest.at("n_test").get<std::size_t>();

  CorpusArtifact artifact;
  std::vector<InteractionRecord> train, val, test;
  for (std::size_t i = 0; i < n_train; ++i) train.push_back(read_record(in));
  for (std::size_t i = 0; i < n_val; ++i) val.push_back(read_record(in));
  for (std::size_t i = 0; i < n_test; ++i) test.push_back(read_record(in));
  artifact.corpus =
      assemble_split(std::move(train), std::move(val), std::move(test));

  const std::uint32_t vocab_size = read_u32(in);
  artifact.vocab.index_to_token.resize(vocab_size);
  for (auto& t : artifact.vocab.index_to_token) t = read_str(in);
  for (std::uint32_t i = 2; i < vocab_size; ++i)
    artifact.vocab.token_to_index[artifact.vocab.index_to_token[i]] =
        static_cast<int>(i);
  const int word_dim = manifest.at("word_dim").get<int>();
  artifact.vocab.embeddings.resize(vocab_size, word_dim);
  for (Index i = 0; i < artifact.vocab.embeddings.rows(); ++i)
    for (Index j = 0; j < artifact.vocab.embeddings.cols(); ++j)
      artifact.vocab.embeddings(i, j) = read_f64(in);
  if (!in) throw ConfigError("corpus cache truncated: " + path);

  artifact.max_len = manifest.at("max_len").get<int>();
  artifact.stats.malformed_skipped = 0;
  artifact.train_tokens = tokenize_records(artifact.corpus.train,
                                           artifact.vocab, artifact.max_len);
  return artifact;
}

NodeEmbeddingTable run_graph(const RunConfig& config,
                             const CorpusArtifact& corpus) {
  ensure_out_dir(config);
  const BipartiteGraph graph = build_graph(
      corpus.corpus.train, corpus.corpus, threshold_mode_of(config));

  GraphTrainConfig gc;
  gc.dim = config.graph_dim;
  gc.layers = config.graph_layers;
  gc.lr = config.graph_lr;
  gc.l2 = config.graph_l2;
  gc.epochs = config.graph_epochs;
  gc.patience = config.graph_patience;
  gc.seed = config.seed;
  const NodeEmbeddingTable table = train_graph(graph, gc);

  nlohmann::json manifest;
  manifest["kind"] = "graph";
  manifest["m"] = table.num_users;
  manifest["n"] = table.num_items;
  manifest["d"] = config.graph_dim;
  manifest["G"] = table.layers;
  manifest["seed"] = config.seed;
  manifest["threshold_mode"] = config.threshold_mode;
  manifest["edges"] = graph.edges.size();
  write_checkpoint(artifact_path(config, artifact::graph_checkpoint), manifest,
                   {{"e0", &table.e0}, {"e_final", &table.e_final}});
  return table;
}

NodeEmbeddingTable load_graph(const RunConfig& config) {
  const auto ck =
      read_checkpoint(artifact_path(config, artifact::graph_checkpoint));
  if (ck.manifest.value("kind", "") != "graph")
    throw ConfigError("not a graph checkpoint");
  NodeEmbeddingTable table;
  table.num_users = ck.manifest.at("m").get<int>();
  table.num_items = ck.manifest.at("n").get<int>();
  table.layers = ck.manifest.at("G").get<int>();
  table.e0 = ck.matrix("e0");
  table.e_final = ck.matrix("e_final");
  return table;
}

PriorArtifact run_cluster(const RunConfig& config,
                          const NodeEmbeddingTable& graph) {
  ensure_out_dir(config);
  const int k = config.clusters;
  if (graph.num_users < k || graph.num_items < k)
    throw ConfigError("prior.clusters exceeds the number of users or items");

  PriorArtifact priors;
  const Matrix user_points = graph.e_final.topRows(graph.num_users);
  const Matrix item_points = graph.e_final.bottomRows(graph.num_items);
  priors.users = kmeans(user_points, k, derive_seed("cluster.user", config.seed),
                        config.kmeans_max_iter);
  priors.items = kmeans(item_points, k, derive_seed("cluster.item", config.seed),
                        config.kmeans_max_iter);

  const AlphaStrategy strategy = config.alpha_strategy == "fixed"
                                     ? AlphaStrategy::fixed
                                     : AlphaStrategy::median_heuristic;
  fit_alpha(user_points, priors.users, strategy, config.alpha_value);
  fit_alpha(item_points, priors.items, strategy, config.alpha_value);

  const auto save = [&](const ClusterModel& model, const char* file,
                        const char* side) {
    nlohmann::json manifest;
    manifest["kind"] = "clusters";
    manifest["side"] = side;
    manifest["K"] = model.clusters();
    manifest["d"] = model.dim();
    manifest["alpha"] = model.alpha;
    manifest["inertia"] = model.inertia;
    manifest["seed"] = config.seed;
    write_checkpoint(artifact_path(config, file), manifest,
                     {{"centroids", &model.centroids}},
                     {{"assignment", &model.assignment}});
  };
  save(priors.users, artifact::user_clusters, "user");
  save(priors.items, artifact::item_clusters, "item");
  return priors;
}

PriorArtifact load_clusters(const RunConfig& config) {
  const auto load_one = [&](const char* file) {
    const auto ck = read_checkpoint(artifact_path(config, file));
    if (ck.manifest.value("kind", "") != "clusters")
      throw ConfigError("not a cluster checkpoint");
    ClusterModel model;
    model.centroids = ck.matrix("centroids");
    model.assignment = ck.ints("assignment");
    model.alpha = ck.manifest.at("alpha").get<double>();
    model.inertia = ck.manifest.value("inertia", 0.0);
    return model;
  };
  PriorArtifact priors;
  priors.users = load_one(artifact::user_clusters);
  priors.items = load_one(artifact::item_clusters);
  return priors;
}

std::vector<PairExample> make_pair_examples(
    const CorpusArtifact& corpus, const NodeEmbeddingTable& graph,
    const PriorArtifact& priors, const std::vector<InteractionRecord>& records,
    bool exclude_pair_reviews) {
  const SplitCorpus& c = corpus.corpus;

  // Per-entity priors and embeddings, computed once.
  std::vector<Vector> rho_user(c.num_users()), rho_item(c.num_items());
  for (int u = 0; u < c.num_users(); ++u)
    rho_user[u] = prior_rho(graph.user_embedding(u), priors.users);
  for (int i = 0; i < c.num_items(); ++i)
    rho_item[i] = prior_rho(graph.item_embedding(i), priors.items);

  std::vector<PairExample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    PairExample ex;
    ex.user = c.user_index.at(r.user_id);
    ex.item = c.item_index.at(r.item_id);
    ex.rating = r.rating;
    ex.rho_user = rho_user[ex.user];
    ex.rho_item = rho_item[ex.item];
    ex.graph_user = graph.user_embedding(ex.user);
    ex.graph_item = graph.item_embedding(ex.item);
    const std::vector<int> user_reviews =
        exclude_pair_reviews ? c.user_reviews_excluding(ex.user, ex.item)
                             : c.train_by_user[ex.user];
    const std::vector<int> item_reviews =
        exclude_pair_reviews ? c.item_reviews_excluding(ex.user, ex.item)
                             : c.train_by_item[ex.item];
    for (const int idx : user_reviews)
      ex.user_tokens.push_back(&corpus.train_tokens[idx]);
    for (const int idx : item_reviews)
      ex.item_tokens.push_back(&corpus.train_tokens[idx]);
    out.push_back(std::move(ex));
  }
  return out;
}

void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write history: " + path);
  out << "epoch,L_r,recon,kl,centroid,lambda,val_rmse\n";
  for (const auto& h : history) {
    out << h.epoch << ',' << fmt_double(h.train.rating) << ','
        << fmt_double(h.train.recon) << ','
        << fmt_double(h.train.kl_contribution) << ','
        << fmt_double(h.train.centroid) << ',' << fmt_double(h.train.lambda)
        << ',' << fmt_double(h.val_rmse) << '\n';
  }
}

ModelArtifact run_train(const RunConfig& config, const CorpusArtifact& corpus,
                        const NodeEmbeddingTable& graph,
                        const PriorArtifact& priors) {
  ensure_out_dir(config);
  const SplitCorpus& c = corpus.corpus;

  if (priors.users.clusters() != config.clusters ||
      priors.items.clusters() != config.clusters)
    throw ConfigError("cluster checkpoints disagree with prior.clusters");
  if (priors.users.dim() != config.graph_dim)
    throw ConfigError("cluster centroid dim disagrees with graph.dim");

  const ModelConfig mc = model_config_of(config, corpus.vocab.word_dim());
  if (mc.encoder.feature_dim() != config.graph_dim)
    throw ConfigError("text feature width must equal graph.dim");

  auto model = std::make_unique<GiantModel>(mc, corpus.vocab.size(),
                                            c.num_users(), c.num_items(),
                                            corpus.vocab.embeddings, config.seed);

  const auto train_pairs =
      make_pair_examples(corpus, graph, priors, c.train, true);
  const auto val_pairs =
      make_pair_examples(corpus, graph, priors, c.validation, true);

  TrainConfig tc;
  tc.beta = config.beta;
  tc.l2 = config.train_l2;
  tc.lr = config.lr;
  tc.batch = config.batch;
  tc.epochs = config.epochs;
  tc.seed = config.seed;
  tc.centroid_phase = config.centroid_phase;
  tc.anneal_start = config.anneal_start;
  tc.anneal_end = config.anneal_end;
  tc.centroid_weight = config.centroid_weight;

  PriorContext pc{&priors.users, &priors.items};
  const auto history = model->train(train_pairs, val_pairs, tc, pc);
  write_history_csv(artifact_path(config, artifact::history), history);

  int best_epoch = 0;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (const auto& h : history)
    if (h.val_rmse < best_rmse) {
      best_rmse = h.val_rmse;
      best_epoch = h.epoch;
    }

  ModelArtifact artifact;
  nlohmann::json manifest;
  manifest["kind"] = "model";
  manifest["variant"] = config.variant;
  manifest["eta_form"] = config.eta_form;
  manifest["K"] = config.clusters;
  manifest["tau"] = config.tau;
  manifest["seed"] = config.seed;
  manifest["epoch"] = best_epoch;
  manifest["metrics"] = {{"best_val_rmse", best_rmse}};
  manifest["vocab_size"] = corpus.vocab.size();
  manifest["word_dim"] = corpus.vocab.word_dim();
  manifest["num_users"] = c.num_users();
  manifest["num_items"] = c.num_items();
  manifest["filters"] = config.filters;
  manifest["attn_hidden"] = config.attn_hidden;
  manifest["id_dim"] = config.id_dim;
  manifest["max_reviews"] = config.max_reviews;
  manifest["graph_dim"] = config.graph_dim;

  std::vector<std::pair<std::string, const Matrix*>> blocks;
  for (std::size_t i = 0; i < model->params().size(); ++i)
    blocks.emplace_back(model->params()[i].name, &model->params()[i].value);
  write_checkpoint(artifact_path(config, artifact::model_checkpoint), manifest,
                   blocks);

  artifact.model = std::move(model);
  artifact.manifest = std::move(manifest);
  return artifact;
}

ModelArtifact load_model(const RunConfig& config, const CorpusArtifact& corpus) {
  const auto ck =
      read_checkpoint(artifact_path(config, artifact::model_checkpoint));
  if (ck.manifest.value("kind", "") != "model")
    throw ConfigError("not a model checkpoint");

  RunConfig effective = config;
  effective.variant = ck.manifest.at("variant").get<std::string>();
  effective.eta_form = ck.manifest.at("eta_form").get<std::string>();
  effective.clusters = ck.manifest.at("K").get<int>();
  effective.tau = ck.manifest.at("tau").get<double>();
  effective.filters = ck.manifest.at("filters").get<int>();
  effective.attn_hidden = ck.manifest.at("attn_hidden").get<int>();
  effective.id_dim = ck.manifest.at("id_dim").get<int>();
  effective.max_reviews = ck.manifest.at("max_reviews").get<int>();
  effective.graph_dim = ck.manifest.at("graph_dim").get<int>();

  const int vocab_size = ck.manifest.at("vocab_size").get<int>();
  const int word_dim = ck.manifest.at("word_dim").get<int>();
  const int num_users = ck.manifest.at("num_users").get<int>();
  const int num_items = ck.manifest.at("num_items").get<int>();
  if (vocab_size != corpus.vocab.size() ||
      word_dim != corpus.vocab.word_dim() ||
      num_users != corpus.corpus.num_users() ||
      num_items != corpus.corpus.num_items())
    throw ConfigError("model checkpoint does not match the corpus cache");

  const ModelConfig mc = model_config_of(effective, word_dim);
  ModelArtifact artifact;
  artifact.model = std::make_unique<GiantModel>(
      mc, vocab_size, num_users, num_items,
      Matrix::Zero(vocab_size, word_dim), ck.manifest.at("seed").get<std::uint64_t>());
  artifact.manifest = ck.manifest;

  ParamStore& store = artifact.model->params();
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Matrix& loaded = ck.matrix(store[i].name);
    if (loaded.rows() != store[i].value.rows() ||
        loaded.cols() != store[i].value.cols())
      throw ConfigError("checkpoint shape mismatch for " + store[i].name);
    store[i].value = loaded;
  }
  return artifact;
}

EvalContext build_eval_context(const RunConfig& config,
                               const CorpusArtifact& corpus,
                               const GiantModel& model) {
  const SplitCorpus& c = corpus.corpus;
  const int k = model.config().latent_dim;

  EvalContext ctx;
  ctx.user_mu.resize(c.num_users(), k);
  ctx.item_mu.resize(c.num_items(), k);
  for (int u = 0; u < c.num_users(); ++u) {
    std::vector<const std::vector<int>*> tokens;
    for (const int idx : c.train_by_user[u])
      tokens.push_back(&corpus.train_tokens[idx]);
    ctx.user_mu.row(u) =
        model.latent_mean(model.encode_entity(tokens)).transpose();
  }
  for (int i = 0; i < c.num_items(); ++i) {
    std::vector<const std::vector<int>*> tokens;
    for (const int idx : c.train_by_item[i])
      tokens.push_back(&corpus.train_tokens[idx]);
    ctx.item_mu.row(i) =
        model.latent_mean(model.encode_entity(tokens)).transpose();
  }

  // Exact per-pair predictions over the test split. The graph/prior inputs
  // only matter for KL terms, which evaluation does not use, so pairs are
  // built with neutral priors here.
  for (const auto& r : c.test) {
    const int u = c.user_index.at(r.user_id);
    const int i = c.item_index.at(r.item_id);
    PairExample ex;
    ex.user = u;
    ex.item = i;
    ex.rating = r.rating;
    ex.rho_user = Vector::Constant(k, 1.0 / k);
    ex.rho_item = Vector::Constant(k, 1.0 / k);
    ex.graph_user = Vector::Zero(model.config().graph_dim);
    ex.graph_item = Vector::Zero(model.config().graph_dim);
    for (const int idx : c.user_reviews_excluding(u, i))
      ex.user_tokens.push_back(&corpus.train_tokens[idx]);
    for (const int idx : c.item_reviews_excluding(u, i))
      ex.item_tokens.push_back(&corpus.train_tokens[idx]);

    const PairOutput out = model.forward(ex, nullptr);
    ctx.test_pairs.emplace_back(u, i);
    ctx.test_ratings.push_back(r.rating);
    ctx.test_predictions.push_back(out.r_hat);
    LatentPair lp;
    lp.user = u;
    lp.item = i;
    lp.z_user = out.z_user;
    lp.z_item = out.z_item;
    ctx.test_latents.push_back(std::move(lp));
  }
  if (!ctx.test_predictions.empty()) {
    double sum = 0.0;
    for (const double p : ctx.test_predictions) sum += p;
    ctx.mean_prediction = sum / static_cast<double>(ctx.test_predictions.size());
  }
  (void)config;
  return ctx;
}

MetricBundle run_evaluate(const RunConfig& config, const CorpusArtifact& corpus,
                          const GiantModel& model) {
  ensure_out_dir(config);
  const SplitCorpus& c = corpus.corpus;
  const EvalContext ctx = build_eval_context(config, corpus, model);
  if (ctx.test_pairs.empty())
    throw ConfigError("test split is empty; nothing to evaluate");

  MetricBundle metrics;

  // Accuracy.
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < ctx.test_pairs.size(); ++i)
    pairs.emplace_back(ctx.test_predictions[i], ctx.test_ratings[i]);
  std::tie(metrics.rmse, metrics.mae) = rmse_mae(pairs);

  // Ranking over seeded negatives, scored from cached entity latents.
  std::vector<std::unordered_set<int>> interacted(c.num_users());
  for (const auto* list : {&c.train, &c.validation, &c.test})
    for (const auto& r : *list)
      interacted[c.user_index.at(r.user_id)].insert(
          c.item_index.at(r.item_id));
  const auto scorer = [&](int user, int item) {
    return model.rate_from_latents(user, item,
                                   ctx.user_mu.row(user).transpose(),
                                   ctx.item_mu.row(item).transpose());
  };
  metrics.ranking = rank_metrics(scorer, ctx.test_pairs, c.num_items(),
                                 interacted, derive_seed("eval.rank", config.seed),
                                 config.negatives, config.cutoff);

  // Diversity of the per-sample latents.
  Matrix user_latents(ctx.test_latents.size(), model.config().latent_dim);
  Matrix item_latents(ctx.test_latents.size(), model.config().latent_dim);
  for (std::size_t i = 0; i < ctx.test_latents.size(); ++i) {
    user_latents.row(i) = ctx.test_latents[i].z_user.transpose();
    item_latents.row(i) = ctx.test_latents[i].z_item.transpose();
  }
  metrics.diversity_user = diversity(user_latents);
  metrics.diversity_item = diversity(item_latents);
  metrics.diversity_max =
      std::max(metrics.diversity_user, metrics.diversity_item);

  // Comprehensiveness for the configured k values below K.
  std::vector<int> ks;
  for (const int k : config.comprehensiveness_ks)
    if (k < model.config().latent_dim) ks.push_back(k);
  const auto rate = [&](int user, int item, const Vector& zu, const Vector& zi) {
    return model.rate_from_latents(user, item, zu, zi);
  };
  metrics.comprehensiveness = comprehensiveness(
      rate, ctx.test_latents, ks, derive_seed("eval.comprehensiveness", config.seed));

  // Cluster coherence of CNN-encoded test reviews, user and item side.
  {
    const int n_test = static_cast<int>(c.test.size());
    Matrix review_vecs(n_test, model.config().encoder.feature_dim());
    std::vector<int> user_side(n_test), item_side(n_test);
    for (int r = 0; r < n_test; ++r) {
      const auto tokens =
          tokenize_and_truncate(c.test[r].text, corpus.vocab, corpus.max_len);
      review_vecs.row(r) = model.encode_single_review(tokens).transpose();
      Index arg = 0;
      ctx.user_mu.row(c.user_index.at(c.test[r].user_id)).maxCoeff(&arg);
      user_side[r] = static_cast<int>(arg);
      ctx.item_mu.row(c.item_index.at(c.test[r].item_id)).maxCoeff(&arg);
      item_side[r] = static_cast<int>(arg);
    }
    const auto cu = cluster_coherence(review_vecs, user_side,
                                      model.config().latent_dim);
    const auto ci = cluster_coherence(review_vecs, item_side,
                                      model.config().latent_dim);
    metrics.coherence_user = cu.value;
    metrics.coherence_item = ci.value;
    metrics.coherence_user_flagged = cu.all_singleton;
    metrics.coherence_item_flagged = ci.all_singleton;
  }

  write_metrics(config, metrics);
  return metrics;
}

void write_metrics(const RunConfig& config, const MetricBundle& m) {
  {
    std::ofstream out(artifact_path(config, artifact::metrics_csv));
    out << "# diversity entropy uses the natural log\n";
    out << "metric,value\n";
    out << "rmse," << fmt_double(m.rmse) << '\n';
    out << "mae," << fmt_double(m.mae) << '\n';
    out << "hit_ratio_10," << fmt_double(m.ranking.hit_ratio_10) << '\n';
    out << "ndcg_10," << fmt_double(m.ranking.ndcg_10) << '\n';
    out << "diversity_user," << fmt_double(m.diversity_user) << '\n';
    out << "diversity_item," << fmt_double(m.diversity_item) << '\n';
    out << "diversity," << fmt_double(m.diversity_max) << '\n';
    out << "coherence_user," << fmt_double(m.coherence_user) << '\n';
    out << "coherence_item," << fmt_double(m.coherence_item) << '\n';
  }
  {
    std::ofstream out(artifact_path(config, artifact::comprehensiveness_csv));
    out << "k,top_k_change,random_change,relative\n";
    for (const auto& p : m.comprehensiveness)
      out << p.k << ',' << fmt_double(p.top_change) << ','
          << fmt_double(p.random_change) << ',' << fmt_double(p.relative)
          << '\n';
  }
  {
    nlohmann::json j;
    j["diversity_log_base"] = "e";
    j["rmse"] = m.rmse;
    j["mae"] = m.mae;
    j["hit_ratio_10"] = m.ranking.hit_ratio_10;
    j["ndcg_10"] = m.ranking.ndcg_10;
    j["insufficient_negatives"] = m.ranking.insufficient_negatives;
    j["diversity_user"] = m.diversity_user;
    j["diversity_item"] = m.diversity_item;
    j["diversity"] = m.diversity_max;
    j["coherence_user"] = m.coherence_user;
    j["coherence_item"] = m.coherence_item;
    j["coherence_user_flagged"] = m.coherence_user_flagged;
    j["coherence_item_flagged"] = m.coherence_item_flagged;
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : m.comprehensiveness)
      curve.push_back({{"k", p.k},
                       {"top_k_change", p.top_change},
                       {"random_change", p.random_change},
                       {"relative", p.relative}});
    j["comprehensiveness"] = curve;
    std::ofstream out(artifact_path(config, artifact::metrics_json));
    out << j.dump(2) << '\n';
  }
}

Explanation run_explain(const RunConfig& config, const CorpusArtifact& corpus,
                        const GiantModel& model, const std::string& user_id,
                        const std::string& item_id) {
  const SplitCorpus& c = corpus.corpus;
  const int user = c.user_of(user_id);
  const int item = c.item_of(item_id);
  if (user < 0) throw MissingEntityError("unknown user id: " + user_id);
  if (item < 0) throw MissingEntityError("unknown item id: " + item_id);

  const EvalContext ctx = build_eval_context(config, corpus, model);
  const int k = model.config().latent_dim;

  // All corpus records in canonical order (train, validation, test).
  std::vector<const InteractionRecord*> record_ptr;
  for (const auto* list : {&c.train, &c.validation, &c.test})
    for (const auto& r : *list) record_ptr.push_back(&r);
  const int n_records = static_cast<int>(record_ptr.size());

  std::vector<InteractionRecord> records;
  records.reserve(n_records);
  for (const auto* r : record_ptr) records.push_back(*r);

  std::vector<int> record_user(n_records), record_item(n_records);
  std::vector<int> review_topic(n_records);
  for (int r = 0; r < n_records; ++r) {
    record_user[r] = c.user_index.at(records[r].user_id);
    record_item[r] = c.item_index.at(records[r].item_id);
    const auto tokens =
        tokenize_and_truncate(records[r].text, corpus.vocab, corpus.max_len);
    Index arg = 0;
    model.latent_mean(model.encode_single_review(tokens)).maxCoeff(&arg);
    review_topic[r] = static_cast<int>(arg);
  }

  // Topic model from the test split's reviews.
  std::vector<std::vector<std::string>> test_tokens;
  std::vector<int> test_dims;
  {
    const int offset = static_cast<int>(c.train.size() + c.validation.size());
    for (std::size_t r = 0; r < c.test.size(); ++r) {
      test_tokens.push_back(tokenize(c.test[r].text));
      test_dims.push_back(review_topic[offset + static_cast<int>(r)]);
    }
  }
  std::map<std::string, int> corpus_counts;
  for (const auto& r : records)
    for (const auto& t : tokenize(r.text)) ++corpus_counts[t];
  const TopicModel topics = build_topics(test_tokens, test_dims, k,
                                         corpus_counts, corpus.vocab);

  // Entity-level model clusters.
  std::vector<int> user_cluster(c.num_users());
  for (int u = 0; u < c.num_users(); ++u) {
    Index arg = 0;
    ctx.user_mu.row(u).maxCoeff(&arg);
    user_cluster[u] = static_cast<int>(arg);
  }
  Index arg = 0;
  ctx.item_mu.row(item).maxCoeff(&arg);
  const int item_topic = static_cast<int>(arg);
  ctx.user_mu.row(user).maxCoeff(&arg);
  const int user_topic = static_cast<int>(arg);

  const CandidateReviews candidates =
      candidate_reviews(user, item, record_user, record_item, user_cluster,
                        item_topic, review_topic);

  Explanation e;
  e.user_id = user_id;
  e.item_id = item_id;
  e.user_topic = user_topic;
  e.item_topic = item_topic;
  e.user_topic_words = topics.words[user_topic];
  e.item_topic_words = topics.words[item_topic];
  e.fallback_user = candidates.fallback_user;
  e.fallback_item = candidates.fallback_item;
  e.user_sentences = extract_sentences(
      candidates.user_side, records,
      topics.vectors.row(user_topic).transpose(), corpus.vocab, config.top_n);
  e.item_sentences = extract_sentences(
      candidates.item_side, records,
      topics.vectors.row(item_topic).transpose(), corpus.vocab, config.top_n);

  e.predicted_rating = model.rate_from_latents(
      user, item, ctx.user_mu.row(user).transpose(),
      ctx.item_mu.row(item).transpose());
  e.suggestion = e.predicted_rating >= ctx.mean_prediction ? "recommend"
                                                           : "not_recommend";
  return e;
}

}  // namespace giant
