#include "tagbench/mpnn.hpp"

#include <cmath>

#include "tagbench/error.hpp"
#include "tagbench/rng.hpp"

namespace tagbench {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current.push_back(c);
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Eigen::VectorXd featurize_text(std::string_view text, std::size_t d, std::uint64_t seed) {
  if (d == 0) throw ArgumentError("feature dimension must be at least 1");
  Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (const auto& token : tokenize(text)) {
    const std::uint64_t h = derive_seed(seed, token);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    row[static_cast<Eigen::Index>(h % d)] += sign;
  }
  const double norm = row.norm();
  if (norm > 0) row /= norm;
  return row;
}

Matrix featurize(const TextAttributedGraph& graph, std::size_t d, std::uint64_t seed) {
  if (d == 0) throw ArgumentError("feature dimension must be at least 1");
  Matrix x(static_cast<Eigen::Index>(graph.size()), static_cast<Eigen::Index>(d));
  for (std::size_t v = 0; v < graph.size(); ++v) {
    x.row(static_cast<Eigen::Index>(v)) = featurize_text(graph.node(v).title, d, seed).transpose();
  }
  return x;
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::gcn ? "gcn" : "sage"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "gcn") return ModelKind::gcn;
  if (text == "sage") return ModelKind::sage;
  throw ArgumentError("unknown model kind '" + std::string(text) + "'");
}

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-limit, limit);
  }
  return w;
}

}  // namespace

ModelParams init_params(ModelKind kind, std::size_t in, std::size_t hidden, std::size_t out,
                        std::size_t layers, std::uint64_t seed) {
  if (layers < 1) throw ArgumentError("a model needs at least one layer");
  Rng rng(derive_seed(seed, "init"));
  ModelParams p;
  p.kind = kind;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t rows = l == 0 ? in : hidden;
    const std::size_t cols = l + 1 == layers ? out : hidden;
    p.weights.push_back(glorot(rows, cols, rng));
    if (kind == ModelKind::sage) p.neigh_weights.push_back(glorot(rows, cols, rng));
  }
  return p;
}

SparseOperator gcn_operator(const TextAttributedGraph& graph) {
  const auto n = graph.size();
  std::vector<double> inv_sqrt(n);
  for (std::size_t v = 0; v < n; ++v) {
    inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(graph.neighbors(v).size() + 1));
  }
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t v = 0; v < n; ++v) {
    const auto iv = static_cast<Eigen::Index>(v);
    entries.emplace_back(iv, iv, inv_sqrt[v] * inv_sqrt[v]);
    for (auto u : graph.neighbors(v)) {
      entries.emplace_back(iv, static_cast<Eigen::Index>(u), inv_sqrt[v] * inv_sqrt[u]);
    }
  }
  SparseOperator op(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  op.setFromTriplets(entries.begin(), entries.end());
  return op;
}

SparseOperator mean_operator(const TextAttributedGraph& graph) {
  const auto n = graph.size();
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t v = 0; v < n; ++v) {
    const auto nbrs = graph.neighbors(v);
    for (auto u : nbrs) {
      entries.emplace_back(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u),
                           1.0 / static_cast<double>(nbrs.size()));
    }
  }
  SparseOperator op(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  op.setFromTriplets(entries.begin(), entries.end());
  return op;
}

SparseOperator propagation_operator(ModelKind kind, const TextAttributedGraph& graph) {
  return kind == ModelKind::gcn ? gcn_operator(graph) : mean_operator(graph);
}

namespace {

void check_shapes(const ModelParams& params, const SparseOperator& op, const Matrix& features) {
  if (params.weights.empty()) throw ArgumentError("model has no layers");
  if (op.rows() != features.rows() || op.cols() != features.rows()) {
    throw ArgumentError("operator and feature rows disagree");
  }
  Eigen::Index width = features.cols();
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    if (params.weights[l].rows() != width) {
      throw ArgumentError("layer " + std::to_string(l) + " expects input width " +
                          std::to_string(params.weights[l].rows()) + ", got " +
                          std::to_string(width));
    }
    if (params.kind == ModelKind::sage &&
        (params.neigh_weights.size() != params.weights.size() ||
         params.neigh_weights[l].rows() != params.weights[l].rows() ||
         params.neigh_weights[l].cols() != params.weights[l].cols())) {
      throw ArgumentError("SAGE neighbor weights do not match layer " + std::to_string(l));
    }
    width = params.weights[l].cols();
  }
}

struct ForwardCache {
  std::vector<Matrix> inputs;      // layer inputs after dropout
  std::vector<Matrix> aggregated;  // op * input
  std::vector<Matrix> pre;         // pre-activation
};

Matrix run_forward(const ModelParams& params, const SparseOperator& op, const Matrix& features,
                   const DropoutMasks* masks, ForwardCache* cache) {
  Matrix h = features;
  const std::size_t L = params.weights.size();
  for (std::size_t l = 0; l < L; ++l) {
    if (masks) h = h.cwiseProduct((*masks)[l]);
    Matrix agg = op * h;
    Matrix z = params.kind == ModelKind::gcn
                   ? Matrix(agg * params.weights[l])
                   : Matrix(h * params.weights[l] + agg * params.neigh_weights[l]);
    if (cache) {
      cache->inputs.push_back(h);
      cache->aggregated.push_back(std::move(agg));
      cache->pre.push_back(z);
    }
    h = l + 1 == L ? std::move(z) : Matrix(z.cwiseMax(0.0));
  }
  return h;
}

}  // namespace

Matrix forward(const ModelParams& params, const SparseOperator& op, const Matrix& features) {
  check_shapes(params, op, features);
  return run_forward(params, op, features, nullptr, nullptr);
}

Matrix gcn_forward(const ModelParams& params, const TextAttributedGraph& graph,
                   const Matrix& features) {
  if (params.kind != ModelKind::gcn) throw ArgumentError("parameters are not a GCN");
  return forward(params, gcn_operator(graph), features);
}

Matrix sage_forward(const ModelParams& params, const TextAttributedGraph& graph,
                    const Matrix& features) {
  if (params.kind != ModelKind::sage) throw ArgumentError("parameters are not a SAGE model");
  return forward(params, mean_operator(graph), features);
}

LossAndGradient loss_and_gradient(const ModelParams& params, const SparseOperator& op,
                                  const Matrix& features, const std::vector<std::size_t>& labels,
                                  const std::vector<std::size_t>& train_nodes,
                                  double weight_decay, const DropoutMasks* masks) {
  check_shapes(params, op, features);
  if (train_nodes.empty()) throw ArgumentError("no training nodes");
  if (masks && masks->size() != params.layers()) throw ArgumentError("one mask per layer needed");

  ForwardCache cache;
  const Matrix logits = run_forward(params, op, features, masks, &cache);
  const auto classes = logits.cols();

  Matrix d_out = Matrix::Zero(logits.rows(), classes);
  double loss = 0.0;
  const double scale = 1.0 / static_cast<double>(train_nodes.size());
  for (auto v : train_nodes) {
    const auto row = static_cast<Eigen::Index>(v);
    const auto y = static_cast<Eigen::Index>(labels[v]);
    if (y >= classes) throw ArgumentError("label outside the output width");
    const double peak = logits.row(row).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(row).array() - peak).exp();
    const double total = e.sum();
    loss += -(logits(row, y) - peak - std::log(total)) * scale;
    d_out.row(row) = e / total * scale;
    d_out(row, y) -= scale;
  }

  LossAndGradient out;
  out.gradient.kind = params.kind;
  out.gradient.weights.resize(params.layers());
  if (params.kind == ModelKind::sage) out.gradient.neigh_weights.resize(params.layers());

  Matrix dz = std::move(d_out);
  for (std::size_t l = params.layers(); l-- > 0;) {
    Matrix dh;
    if (params.kind == ModelKind::gcn) {
      out.gradient.weights[l] = cache.aggregated[l].transpose() * dz;
      if (l > 0) dh = op.transpose() * (dz * params.weights[l].transpose());
    } else {
      out.gradient.weights[l] = cache.inputs[l].transpose() * dz;
      out.gradient.neigh_weights[l] = cache.aggregated[l].transpose() * dz;
      if (l > 0) {
        dh = dz * params.weights[l].transpose() +
             op.transpose() * (dz * params.neigh_weights[l].transpose());
      }
    }
    if (l == 0) break;
    if (masks) dh = dh.cwiseProduct((*masks)[l]);
    dz = dh.cwiseProduct(Matrix((cache.pre[l - 1].array() > 0.0).cast<double>()));
  }

  double penalty = 0.0;
  for (std::size_t l = 0; l < params.layers(); ++l) {
    penalty += params.weights[l].squaredNorm();
    out.gradient.weights[l] += weight_decay * params.weights[l];
    if (params.kind == ModelKind::sage) {
      penalty += params.neigh_weights[l].squaredNorm();
      out.gradient.neigh_weights[l] += weight_decay * params.neigh_weights[l];
    }
  }
  out.loss = loss + 0.5 * weight_decay * penalty;
  return out;
}

std::vector<std::size_t> predict(const ModelParams& params, const SparseOperator& op,
                                 const Matrix& features) {
  const Matrix logits = forward(params, op, features);
  std::vector<std::size_t> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    logits.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
  }
  return out;
}

TextAttributedGraph ego_subgraph(const EgoGraph& ego, const std::vector<std::string>& vocab) {
  std::vector<NodeRecord> nodes{ego.target};
  nodes.insert(nodes.end(), ego.hop1.begin(), ego.hop1.end());
  nodes.insert(nodes.end(), ego.hop2.begin(), ego.hop2.end());
  return TextAttributedGraph(std::move(nodes), ego.intra_edges, vocab);
}

std::size_t predict_target(const ModelParams& params, const EgoGraph& ego,
                           const std::vector<std::string>& vocab, std::size_t feature_dim,
                           std::uint64_t feature_seed) {
  const auto sub = ego_subgraph(ego, vocab);
  const Matrix x = featurize(sub, feature_dim, feature_seed);
  return predict(params, propagation_operator(params.kind, sub), x).front();
}

}  // namespace tagbench
