#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "tagbench/ego.hpp"
#include "tagbench/graph.hpp"

namespace tagbench {

using Matrix = Eigen::MatrixXd;
using SparseOperator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Lowercased ASCII alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

// Row v: L2-normalized sum of signed hashed one-hot vectors of node v's title
// tokens; titles without tokens give the zero row. Throws ArgumentError for d == 0.
Matrix featurize(const TextAttributedGraph& graph, std::size_t d = 128, std::uint64_t seed = 0);
Eigen::VectorXd featurize_text(std::string_view text, std::size_t d, std::uint64_t seed);

enum class ModelKind { gcn, sage };
std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

// weights[l] maps layer l's input width to its output width; SAGE also uses
// neigh_weights[l] of the same shape. No biases.
struct ModelParams {
  ModelKind kind = ModelKind::gcn;
  std::vector<Matrix> weights;
  std::vector<Matrix> neigh_weights;

  std::size_t layers() const { return weights.size(); }
};

// Glorot-uniform initialization for widths in -> hidden x (layers-1) -> out.
ModelParams init_params(ModelKind kind, std::size_t in, std::size_t hidden, std::size_t out,
                        std::size_t layers, std::uint64_t seed);

// D^-1/2 (A + I) D^-1/2 over the symmetrized graph.
SparseOperator gcn_operator(const TextAttributedGraph& graph);
// Row-normalized symmetrized adjacency; isolated nodes get an all-zero row.
SparseOperator mean_operator(const TextAttributedGraph& graph);
SparseOperator propagation_operator(ModelKind kind, const TextAttributedGraph& graph);

// Logits with dropout off; ReLU between layers. Throws ArgumentError on
// shape mismatch.
Matrix gcn_forward(const ModelParams& params, const TextAttributedGraph& graph,
                   const Matrix& features);
Matrix sage_forward(const ModelParams& params, const TextAttributedGraph& graph,
                    const Matrix& features);
Matrix forward(const ModelParams& params, const SparseOperator& op, const Matrix& features);

// Inverted-dropout keep masks, one per layer input (entries 0 or 1/(1-p)).
using DropoutMasks = std::vector<Matrix>;

struct LossAndGradient {
  double loss = 0.0;
  ModelParams gradient;
};

// Mean cross-entropy over train_nodes plus (weight_decay / 2) * sum ||W||^2.
LossAndGradient loss_and_gradient(const ModelParams& params, const SparseOperator& op,
                                  const Matrix& features, const std::vector<std::size_t>& labels,
                                  const std::vector<std::size_t>& train_nodes,
                                  double weight_decay, const DropoutMasks* masks = nullptr);

struct TrainConfig {
  std::size_t layers = 2;
  std::size_t hidden = 64;
  double learning_rate = 0.01;
  double dropout = 0.2;
  double weight_decay = 0.0001;
  std::size_t max_epochs = 2000;
  std::size_t patience = 100;  // epochs without validation improvement
  std::uint64_t seed = 0;
};

struct TrainResult {
  ModelParams params;  // best validation accuracy, earliest on ties
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;   // NaN without validation nodes
  double test_accuracy = 0.0;  // NaN without test nodes
  double final_loss = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

// Full-batch Adam on labeled train-split nodes; selection uses validation
// accuracy, or training accuracy when the validation split is empty.
// Throws ArgumentError without labeled train nodes and TrainingError on a
// non-finite loss.
TrainResult train(ModelKind kind, const TextAttributedGraph& graph, const Matrix& features,
                  const TrainConfig& config);

std::vector<std::size_t> predict(const ModelParams& params, const SparseOperator& op,
                                 const Matrix& features);

// Nodes of the ego (target first) joined by its intra edges.
TextAttributedGraph ego_subgraph(const EgoGraph& ego, const std::vector<std::string>& vocab);

// Prediction for the ego's target from its subgraph alone.
std::size_t predict_target(const ModelParams& params, const EgoGraph& ego,
                           const std::vector<std::string>& vocab, std::size_t feature_dim,
                           std::uint64_t feature_seed);

struct SearchSpace {
  std::vector<std::size_t> layers{2, 3};
  std::vector<std::size_t> hidden{32, 64};
  std::vector<double> learning_rate{0.001, 0.005, 0.01, 0.1};
  std::vector<double> dropout{0.2, 0.4, 0.6, 0.8};
  std::vector<double> weight_decay{0.0001, 0.001, 0.01, 0.1};
  std::size_t max_epochs = 2000;
  std::size_t patience = 100;

  std::size_t grid_size() const;
  TrainConfig at(std::size_t index) const;  // mixed-radix index into the grid
};

struct SearchRow {
  TrainConfig config;
  double mean_val = 0.0;
  double std_val = 0.0;  // population
  double mean_test = 0.0;
};

struct SearchResult {
  TrainConfig best;
  std::vector<SearchRow> rows;  // sampling order
};

// n_configs distinct grid points sampled uniformly, each trained n_repeats
// times with derived seeds; the highest mean validation accuracy wins,
// earliest sampled on ties. Throws ArgumentError when n_configs or n_repeats
// is zero or n_configs exceeds the grid.
SearchResult random_search(ModelKind kind, const TextAttributedGraph& graph,
                           const Matrix& features, const SearchSpace& space,
                           std::size_t n_configs, std::size_t n_repeats, std::uint64_t seed,
                           std::size_t max_parallel = 1);

// Columns: layers, hidden, lr, dropout, weight_decay, mean_val, std_val, mean_test.
std::string search_table_tsv(const SearchResult& result);

}  // namespace tagbench
