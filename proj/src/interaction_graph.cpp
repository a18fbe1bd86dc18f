#include "giant/interaction_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace giant {
namespace {

SparseMatrix normalized_adjacency(int num_nodes,
                                  const std::vector<std::pair<int, int>>& edges,
                                  int num_users, std::vector<int>* degree_out) {
  std::vector<int> degree(num_nodes, 0);
  for (const auto& [u, i] : edges) {
    ++degree[u];
    ++degree[num_users + i];
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 2);
  for (const auto& [u, i] : edges) {
    const int a = u;
    const int b = num_users + i;
    const double w = 1.0 / std::sqrt(static_cast<double>(degree[a]) * degree[b]);
    triplets.emplace_back(a, b, w);
    triplets.emplace_back(b, a, w);
  }
  SparseMatrix adj(num_nodes, num_nodes);
  adj.setFromTriplets(triplets.begin(), triplets.end());
  if (degree_out) *degree_out = std::move(degree);
  return adj;
}

BipartiteGraph make_graph(int num_users, int num_items,
                          std::vector<std::pair<int, int>> edges) {
  BipartiteGraph g;
  g.num_users = num_users;
  g.num_items = num_items;
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges = std::move(edges);
  g.norm_adjacency =
      normalized_adjacency(g.num_nodes(), g.edges, num_users, &g.degree);
  return g;
}

std::vector<std::set<int>> user_neighbor_sets(const BipartiteGraph& g) {
  std::vector<std::set<int>> out(g.num_users);
  for (const auto& [u, i] : g.edges) out[u].insert(i);
  return out;
}

}  // namespace

BipartiteGraph build_graph(const std::vector<InteractionRecord>& records,
                           const SplitCorpus& corpus, ThresholdMode mode) {
  if (records.empty()) throw std::invalid_argument("build_graph: no records");

  // Average duplicate (u,i) ratings so each pair is thresholded once.
  std::map<std::pair<int, int>, std::pair<double, int>> pair_sum;
  double corpus_sum = 0.0;
  std::map<int, std::pair<double, int>> item_sum;
  for (const auto& r : records) {
    const int u = corpus.user_index.at(r.user_id);
    const int i = corpus.item_index.at(r.item_id);
    auto& ps = pair_sum[{u, i}];
    ps.first += r.rating;
    ps.second += 1;
    corpus_sum += r.rating;
    auto& is = item_sum[i];
    is.first += r.rating;
    is.second += 1;
  }
  const double corpus_mean = corpus_sum / static_cast<double>(records.size());

  std::vector<std::pair<int, int>> edges;
  for (const auto& [pair, sum] : pair_sum) {
    const double rating = sum.first / sum.second;
    const auto& is = item_sum.at(pair.second);
    const double threshold =
        mode == ThresholdMode::corpus_mean ? corpus_mean : is.first / is.second;
    if (rating > threshold) edges.push_back(pair);
  }
  if (edges.empty())
    throw ConfigError("interaction graph has zero edges (no rating above threshold)");

  return make_graph(corpus.num_users(), corpus.num_items(), std::move(edges));
}

Matrix propagate(const BipartiteGraph& graph, const Matrix& e0, int layers) {
  if (layers < 1) throw std::invalid_argument("propagate requires layers >= 1");
  Matrix layer = e0;
  Matrix sum = e0;
  for (int k = 0; k < layers; ++k) {
    layer = graph.norm_adjacency * layer;
    sum += layer;
  }
  return sum / static_cast<double>(layers + 1);
}

namespace {

double bpr_step_impl(const BipartiteGraph& graph,
                     const std::vector<std::set<int>>& neighbors,
                     NodeEmbeddingTable& table, Rng& rng, double lr, double l2,
                     std::size_t* full_neighborhood_resamples) {
  if (graph.edges.empty()) throw std::invalid_argument("bpr_step: graph has no edges");

  const Matrix e_final = propagate(graph, table.e0, table.layers);

  // Sample a positive edge whose user still has non-neighbors.
  int user = -1, pos = -1;
  for (;;) {
    const auto& edge = graph.edges[rng.next_below(graph.edges.size())];
    if (static_cast<int>(neighbors[edge.first].size()) >= graph.num_items) {
      if (full_neighborhood_resamples) ++(*full_neighborhood_resamples);
      continue;
    }
    user = edge.first;
    pos = edge.second;
    break;
  }
  int neg = static_cast<int>(rng.next_below(graph.num_items));
  while (neighbors[user].count(neg))
    neg = static_cast<int>(rng.next_below(graph.num_items));

  const int u_node = user;
  const int p_node = graph.item_node(pos);
  const int n_node = graph.item_node(neg);
  const Vector e_u = e_final.row(u_node).transpose();
  const Vector e_p = e_final.row(p_node).transpose();
  const Vector e_n = e_final.row(n_node).transpose();

  const double margin = e_u.dot(e_p) - e_u.dot(e_n);
  const double loss_bpr =
      margin > 40.0 ? std::exp(-margin) : std::log1p(std::exp(-margin));
  const double loss = loss_bpr + l2 * table.e0.squaredNorm();

  // d loss / d margin = -sigmoid(-margin)
  const double dmargin = -1.0 / (1.0 + std::exp(margin));

  Matrix g_final = Matrix::Zero(e_final.rows(), e_final.cols());
  g_final.row(u_node) = dmargin * (e_p - e_n).transpose();
  g_final.row(p_node) = dmargin * e_u.transpose();
  g_final.row(n_node) = -dmargin * e_u.transpose();

  // Backprop through layer-averaged propagation: A_hat is symmetric, so the
  // adjoint is the same polynomial in A_hat applied to the output gradient.
  Matrix acc = g_final;
  Matrix g_e0 = g_final;
  for (int k = 0; k < table.layers; ++k) {
    acc = graph.norm_adjacency * acc;
    g_e0 += acc;
  }
  g_e0 /= static_cast<double>(table.layers + 1);
  g_e0 += 2.0 * l2 * table.e0;

  table.e0 -= lr * g_e0;
  table.e_final = propagate(graph, table.e0, table.layers);
  return loss;
}

}  // namespace

double bpr_step(const BipartiteGraph& graph, NodeEmbeddingTable& table,
                Rng& rng, double lr, double l2,
                std::size_t* full_neighborhood_resamples) {
  return bpr_step_impl(graph, user_neighbor_sets(graph), table, rng, lr, l2,
                       full_neighborhood_resamples);
}

namespace {

double validation_recall_at_10(const Matrix& e_final, int num_users, int num_items,
                               const std::vector<std::set<int>>& train_neighbors,
                               const std::vector<std::set<int>>& val_items) {
  double total = 0.0;
  int counted = 0;
  for (int u = 0; u < num_users; ++u) {
    if (val_items[u].empty()) continue;
    const Vector e_u = e_final.row(u).transpose();
    std::vector<std::pair<double, int>> scored;
    scored.reserve(num_items);
    for (int i = 0; i < num_items; ++i) {
      if (train_neighbors[u].count(i)) continue;
      scored.emplace_back(e_u.dot(e_final.row(num_users + i).transpose()), i);
    }
    const std::size_t top = std::min<std::size_t>(10, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + top, scored.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    int hits = 0;
    for (std::size_t r = 0; r < top; ++r)
      if (val_items[u].count(scored[r].second)) ++hits;
    total += static_cast<double>(hits) / static_cast<double>(val_items[u].size());
    ++counted;
  }
  return counted == 0 ? 0.0 : total / counted;
}

}  // namespace

NodeEmbeddingTable train_graph(const BipartiteGraph& graph,
                               const GraphTrainConfig& config) {
  Rng rng(derive_seed("graph.train", config.seed));

  NodeEmbeddingTable table;
  table.layers = config.layers;
  table.num_users = graph.num_users;
  table.num_items = graph.num_items;
  table.e0 = rng.gaussian(graph.num_nodes(), config.dim) * 0.1;

  if (config.epochs <= 0) {
    table.e_final = propagate(graph, table.e0, table.layers);
    return table;
  }

  // Seeded 10% edge holdout for early stopping.
  const int n_edges = static_cast<int>(graph.edges.size());
  const auto order = rng.permutation(n_edges);
  const int n_val = static_cast<int>(config.validation_fraction * n_edges);
  std::vector<std::pair<int, int>> train_edges;
  std::vector<std::set<int>> val_items(graph.num_users);
  for (int pos = 0; pos < n_edges; ++pos) {
    const auto& e = graph.edges[order[pos]];
    if (pos < n_val) val_items[e.first].insert(e.second);
    else train_edges.push_back(e);
  }
  if (train_edges.empty()) train_edges = graph.edges;

  const BipartiteGraph train_graph_view =
      [&] {
        BipartiteGraph g;
        g.num_users = graph.num_users;
        g.num_items = graph.num_items;
        g.edges = train_edges;
        g.norm_adjacency = normalized_adjacency(g.num_nodes(), g.edges,
                                                g.num_users, &g.degree);
        return g;
      }();
  const auto train_neighbors = user_neighbor_sets(train_graph_view);

  double best_recall = -1.0;
  Matrix best_e0 = table.e0;
  int since_best = 0;
  const int steps_per_epoch = static_cast<int>(train_graph_view.edges.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int s = 0; s < steps_per_epoch; ++s)
      bpr_step_impl(train_graph_view, train_neighbors, table, rng, config.lr,
                    config.l2, nullptr);

    const double recall = validation_recall_at_10(
        table.e_final, graph.num_users, graph.num_items, train_neighbors,
        val_items);
    if (recall > best_recall) {
      best_recall = recall;
      best_e0 = table.e0;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  table.e0 = best_e0;
  table.e_final = propagate(graph, table.e0, table.layers);
  return table;
}

}  // namespace giant
