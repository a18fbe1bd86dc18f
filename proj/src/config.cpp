#include "giant/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace giant {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

template <typename T>
T parse_number(const std::string& raw, const std::string& where) {
  std::istringstream ss(raw);
  T v{};
  if (!(ss >> v) || !(ss >> std::ws).eof())
    throw ConfigError("bad numeric value for " + where + ": " + raw);
  return v;
}

std::vector<int> parse_int_array(const std::string& raw, const std::string& where) {
  std::string s = trim(raw);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw ConfigError("expected [..] array for " + where);
  s = s.substr(1, s.size() - 2);
  std::vector<int> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    out.push_back(parse_number<int>(part, where));
  }
  return out;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  RunConfig cfg;
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"paths.corpus", [&](const std::string& v) { cfg.corpus_path = unquote(v); }},
      {"paths.format", [&](const std::string& v) { cfg.format = unquote(v); }},
      {"paths.out", [&](const std::string& v) { cfg.out_dir = unquote(v); }},
      {"paths.word_vectors",
       [&](const std::string& v) { cfg.word_vectors = unquote(v); }},
      {"corpus.k_core", [&](const std::string& v) { cfg.k_core = parse_number<int>(v, "corpus.k_core"); }},
      {"corpus.max_len", [&](const std::string& v) { cfg.max_len = parse_number<int>(v, "corpus.max_len"); }},
      {"corpus.min_token_count", [&](const std::string& v) { cfg.min_token_count = parse_number<int>(v, "corpus.min_token_count"); }},
      {"corpus.max_reviews", [&](const std::string& v) { cfg.max_reviews = parse_number<int>(v, "corpus.max_reviews"); }},
      {"corpus.word_dim", [&](const std::string& v) { cfg.word_dim = parse_number<int>(v, "corpus.word_dim"); }},
      {"graph.dim", [&](const std::string& v) { cfg.graph_dim = parse_number<int>(v, "graph.dim"); }},
      {"graph.layers", [&](const std::string& v) { cfg.graph_layers = parse_number<int>(v, "graph.layers"); }},
      {"graph.lr", [&](const std::string& v) { cfg.graph_lr = parse_number<double>(v, "graph.lr"); }},
      {"graph.l2", [&](const std::string& v) { cfg.graph_l2 = parse_number<double>(v, "graph.l2"); }},
      {"graph.epochs", [&](const std::string& v) { cfg.graph_epochs = parse_number<int>(v, "graph.epochs"); }},
      {"graph.patience", [&](const std::string& v) { cfg.graph_patience = parse_number<int>(v, "graph.patience"); }},
      {"graph.threshold_mode", [&](const std::string& v) { cfg.threshold_mode = unquote(v); }},
      {"prior.clusters", [&](const std::string& v) { cfg.clusters = parse_number<int>(v, "prior.clusters"); }},
      {"prior.alpha_strategy", [&](const std::string& v) { cfg.alpha_strategy = unquote(v); }},
      {"prior.alpha_value", [&](const std::string& v) { cfg.alpha_value = parse_number<double>(v, "prior.alpha_value"); }},
      {"prior.kmeans_max_iter", [&](const std::string& v) { cfg.kmeans_max_iter = parse_number<int>(v, "prior.kmeans_max_iter"); }},
      {"train.beta", [&](const std::string& v) { cfg.beta = parse_number<double>(v, "train.beta"); }},
      {"train.l2", [&](const std::string& v) { cfg.train_l2 = parse_number<double>(v, "train.l2"); }},
      {"train.lr", [&](const std::string& v) { cfg.lr = parse_number<double>(v, "train.lr"); }},
      {"train.batch", [&](const std::string& v) { cfg.batch = parse_number<int>(v, "train.batch"); }},
      {"train.epochs", [&](const std::string& v) { cfg.epochs = parse_number<int>(v, "train.epochs"); }},
      {"train.variant", [&](const std::string& v) { cfg.variant = unquote(v); }},
      {"train.eta_form", [&](const std::string& v) { cfg.eta_form = unquote(v); }},
      {"train.tau", [&](const std::string& v) { cfg.tau = parse_number<double>(v, "train.tau"); }},
      {"train.centroid_phase", [&](const std::string& v) { cfg.centroid_phase = parse_number<double>(v, "train.centroid_phase"); }},
      {"train.anneal_start", [&](const std::string& v) { cfg.anneal_start = parse_number<double>(v, "train.anneal_start"); }},
      {"train.anneal_end", [&](const std::string& v) { cfg.anneal_end = parse_number<double>(v, "train.anneal_end"); }},
      {"train.centroid_weight", [&](const std::string& v) { cfg.centroid_weight = parse_number<double>(v, "train.centroid_weight"); }},
      {"train.filters", [&](const std::string& v) { cfg.filters = parse_number<int>(v, "train.filters"); }},
      {"train.attn_hidden", [&](const std::string& v) { cfg.attn_hidden = parse_number<int>(v, "train.attn_hidden"); }},
      {"train.id_dim", [&](const std::string& v) { cfg.id_dim = parse_number<int>(v, "train.id_dim"); }},
      {"eval.negatives", [&](const std::string& v) { cfg.negatives = parse_number<int>(v, "eval.negatives"); }},
      {"eval.cutoff", [&](const std::string& v) { cfg.cutoff = parse_number<int>(v, "eval.cutoff"); }},
      {"eval.comprehensiveness_ks", [&](const std::string& v) { cfg.comprehensiveness_ks = parse_int_array(v, "eval.comprehensiveness_ks"); }},
      {"explain.top_n", [&](const std::string& v) { cfg.top_n = parse_number<int>(v, "explain.top_n"); }},
      {"run.seed", [&](const std::string& v) { cfg.seed = parse_number<std::uint64_t>(v, "run.seed"); }},
  };

  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("bad section header at line " + std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(line_no));
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError("unknown config key: " + key);
    it->second(value);
  }
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.format != "jsonl" && cfg.format != "csv")
    throw ConfigError("paths.format must be jsonl or csv");
  if (cfg.k_core < 1) throw ConfigError("corpus.k_core must be >= 1");
  if (cfg.max_len < 3) throw ConfigError("corpus.max_len must be >= 3");
  if (cfg.word_dim < 1) throw ConfigError("corpus.word_dim must be >= 1");
  if (cfg.graph_layers < 1) throw ConfigError("graph.layers must be >= 1");
  if (cfg.threshold_mode != "corpus_mean" && cfg.threshold_mode != "item_mean")
    throw ConfigError("graph.threshold_mode must be corpus_mean or item_mean");
  if (cfg.clusters < 2) throw ConfigError("prior.clusters must be >= 2");
  if (cfg.alpha_strategy != "median" && cfg.alpha_strategy != "fixed")
    throw ConfigError("prior.alpha_strategy must be median or fixed");
  if (cfg.alpha_strategy == "fixed" && !(cfg.alpha_value > 0.0))
    throw ConfigError("prior.alpha_value must be > 0");
  if (!(cfg.tau > 0.0)) throw ConfigError("train.tau must be > 0");
  if (!(cfg.beta > 0.0) || !(cfg.lr > 0.0) || !(cfg.train_l2 > 0.0))
    throw ConfigError("train.beta, train.lr, train.l2 must be > 0");
  if (!(cfg.centroid_phase > 0.0 && cfg.centroid_phase < 1.0))
    throw ConfigError("train.centroid_phase must be in (0,1)");
  if (!(cfg.anneal_start <= cfg.anneal_end) || cfg.anneal_start < 0.0 ||
      cfg.anneal_end > 1.0)
    throw ConfigError("train.anneal window must satisfy 0 <= start <= end <= 1");
  if (cfg.centroid_weight < 0.0)
    throw ConfigError("train.centroid_weight must be >= 0");
  if (cfg.batch < 1) throw ConfigError("train.batch must be >= 1");
  if (2 * cfg.filters != cfg.graph_dim)
    throw ConfigError(
        "graph.dim must equal the text feature width (2 * train.filters) so "
        "encoder columns and centroids share a space");
  if (cfg.negatives < 1) throw ConfigError("eval.negatives must be >= 1");
  if (cfg.cutoff < 1) throw ConfigError("eval.cutoff must be >= 1");
  for (const int k : cfg.comprehensiveness_ks)
    if (k < 0) throw ConfigError("eval.comprehensiveness_ks must be >= 0");
  if (cfg.top_n < 1) throw ConfigError("explain.top_n must be >= 1");
}

}  // namespace giant
