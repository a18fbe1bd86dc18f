#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "giant/types.hpp"

namespace giant {

// Experiment configuration: one TOML-style file with a section per module;
// command-line flags override file values.
struct RunConfig {
  // [paths]
  std::string corpus_path;
  std::string format = "jsonl";  // "jsonl" | "csv"
  std::string out_dir = "out";
  std::string word_vectors;  // optional GloVe-format text file

  // [corpus]
  int k_core = 5;
  int max_len = 300;
  int min_token_count = 2;
  int max_reviews = 100;
  int word_dim = 300;

  // [graph]
  int graph_dim = 64;
  int graph_layers = 2;
  double graph_lr = 0.05;
  double graph_l2 = 1e-4;
  int graph_epochs = 200;
  int graph_patience = 5;
  std::string threshold_mode = "corpus_mean";  // | "item_mean"

  // [prior]
  int clusters = 64;
  std::string alpha_strategy = "median";  // "median" | "fixed"
  double alpha_value = 1.0;
  int kmeans_max_iter = 300;

  // [train]
  double beta = 0.01;
  double train_l2 = 0.001;
  double lr = 0.001;
  int batch = 32;
  int epochs = 10;
  std::string variant = "giant";
  std::string eta_form = "softmax";
  double tau = 2.0;
  double centroid_phase = 0.5;
  double anneal_start = 0.5;
  double anneal_end = 0.75;
  double centroid_weight = 1.0;
  int filters = 32;
  int attn_hidden = 32;
  int id_dim = 64;

  // [eval]
  int negatives = 100;
  int cutoff = 10;
  std::vector<int> comprehensiveness_ks = {3, 5, 10, 15, 20, 30};

  // [explain]
  int top_n = 3;

  // [run]
  std::uint64_t seed = 1;
};

// Parses the subset of TOML used here: [section] headers, key = value with
// quoted strings, integers, floats, booleans and flat integer arrays.
// Unknown sections or keys are errors.
RunConfig load_run_config(const std::string& path);

// Consistency checks shared by every command (K >= 2, dims matching, ...).
void validate_config(const RunConfig& config);

}  // namespace giant
