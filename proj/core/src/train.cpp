#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <thread>

#include "tagbench/error.hpp"
#include "tagbench/mpnn.hpp"
#include "tagbench/rng.hpp"

namespace tagbench {

namespace {

struct SplitNodes {
  std::vector<std::size_t> labels;
  std::vector<std::size_t> train, validation, test;
};

SplitNodes collect_splits(const TextAttributedGraph& graph) {
  SplitNodes s;
  s.labels.assign(graph.size(), 0);
  for (std::size_t v = 0; v < graph.size(); ++v) {
    const auto& n = graph.node(v);
    if (!n.label) continue;
    s.labels[v] = *n.label;
    switch (n.split) {
      case Split::train: s.train.push_back(v); break;
      case Split::validation: s.validation.push_back(v); break;
      case Split::test: s.test.push_back(v); break;
      case Split::none: break;
    }
  }
  return s;
}

double accuracy_on(const std::vector<std::size_t>& predicted, const SplitNodes& s,
                   const std::vector<std::size_t>& nodes) {
  if (nodes.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t hit = 0;
  for (auto v : nodes) hit += predicted[v] == s.labels[v] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(nodes.size());
}

DropoutMasks sample_masks(const ModelParams& params, Eigen::Index rows, Eigen::Index in_width,
                          double p, Rng& rng) {
  DropoutMasks masks;
  Eigen::Index width = in_width;
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t l = 0; l < params.layers(); ++l) {
    Matrix m(rows, width);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < width; ++j) m(i, j) = rng.uniform01() < p ? 0.0 : keep_scale;
    }
    masks.push_back(std::move(m));
    width = params.weights[l].cols();
  }
  return masks;
}

struct Adam {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<Matrix> m, v;
  std::size_t t = 0;

  void step(std::vector<Matrix*> params, const std::vector<const Matrix*>& grads, double lr) {
    if (m.empty()) {
      for (auto* p : params) {
        m.push_back(Matrix::Zero(p->rows(), p->cols()));
        v.push_back(Matrix::Zero(p->rows(), p->cols()));
      }
    }
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * *grads[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i]->cwiseProduct(*grads[i]);
      *params[i] -= (lr * (m[i] / c1).array() / ((v[i] / c2).array().sqrt() + eps)).matrix();
    }
  }
};

}  // namespace

TrainResult train(ModelKind kind, const TextAttributedGraph& graph, const Matrix& features,
                  const TrainConfig& config) {
  const auto splits = collect_splits(graph);
  if (splits.train.empty()) throw ArgumentError("training needs labeled train-split nodes");
  if (graph.label_vocab().empty()) throw ArgumentError("graph has no label vocabulary");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) {
    throw ArgumentError("dropout must lie in [0, 1)");
  }

  const auto op = propagation_operator(kind, graph);
  ModelParams params = init_params(kind, static_cast<std::size_t>(features.cols()), config.hidden,
                                   graph.label_vocab().size(), config.layers, config.seed);
  Rng rng(derive_seed(config.seed, "dropout"));
  Adam adam;

  const auto& select_on = splits.validation.empty() ? splits.train : splits.validation;
  TrainResult result;
  result.params = params;
  double best = -1.0;
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    DropoutMasks masks;
    if (config.dropout > 0.0) {
      masks = sample_masks(params, features.rows(), features.cols(), config.dropout, rng);
    }
    auto lg = loss_and_gradient(params, op, features, splits.labels, splits.train,
                                config.weight_decay, config.dropout > 0.0 ? &masks : nullptr);
    if (!std::isfinite(lg.loss)) {
      throw TrainingError(epoch, "loss became non-finite");
    }
    result.final_loss = lg.loss;

    std::vector<Matrix*> ps;
    std::vector<const Matrix*> gs;
    for (std::size_t l = 0; l < params.layers(); ++l) {
      ps.push_back(&params.weights[l]);
      gs.push_back(&lg.gradient.weights[l]);
      if (kind == ModelKind::sage) {
        ps.push_back(&params.neigh_weights[l]);
        gs.push_back(&lg.gradient.neigh_weights[l]);
      }
    }
    adam.step(ps, gs, config.learning_rate);
    result.epochs_run = epoch + 1;

    const double score = accuracy_on(predict(params, op, features), splits, select_on);
    if (score > best) {
      best = score;
      since_best = 0;
      result.params = params;
      result.best_epoch = epoch;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  const auto predicted = predict(result.params, op, features);
  result.train_accuracy = accuracy_on(predicted, splits, splits.train);
  result.val_accuracy = accuracy_on(predicted, splits, splits.validation);
  result.test_accuracy = accuracy_on(predicted, splits, splits.test);
  return result;
}

std::size_t SearchSpace::grid_size() const {
  return layers.size() * hidden.size() * learning_rate.size() * dropout.size() *
         weight_decay.size();
}

TrainConfig SearchSpace::at(std::size_t index) const {
  if (index >= grid_size()) throw ArgumentError("grid index out of range");
  TrainConfig c;
  c.weight_decay = weight_decay[index % weight_decay.size()];
  index /= weight_decay.size();
  c.dropout = dropout[index % dropout.size()];
  index /= dropout.size();
  c.learning_rate = learning_rate[index % learning_rate.size()];
  index /= learning_rate.size();
  c.hidden = hidden[index % hidden.size()];
  index /= hidden.size();
  c.layers = layers[index];
  c.max_epochs = max_epochs;
  c.patience = patience;
  return c;
}

SearchResult random_search(ModelKind kind, const TextAttributedGraph& graph,
                           const Matrix& features, const SearchSpace& space,
                           std::size_t n_configs, std::size_t n_repeats, std::uint64_t seed,
                           std::size_t max_parallel) {
  if (n_configs == 0 || n_repeats == 0) throw ArgumentError("n_configs and n_repeats must be >= 1");
  if (n_configs > space.grid_size()) {
    throw ArgumentError("n_configs exceeds the " + std::to_string(space.grid_size()) +
                        "-point grid");
  }
  Rng rng(derive_seed(seed, "random-search"));
  const auto picks = rng.sample_indices(space.grid_size(), n_configs);

  SearchResult result;
  result.rows.resize(n_configs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n_configs; i = next++) {
      try {
        SearchRow row;
        row.config = space.at(picks[i]);
        std::vector<double> vals, tests;
        for (std::size_t r = 0; r < n_repeats; ++r) {
          TrainConfig c = row.config;
          c.seed = derive_seed(derive_seed(seed, i), r);
          const auto t = train(kind, graph, features, c);
          vals.push_back(std::isnan(t.val_accuracy) ? t.train_accuracy : t.val_accuracy);
          tests.push_back(t.test_accuracy);
        }
        double mean = 0, mean_test = 0;
        for (std::size_t r = 0; r < n_repeats; ++r) {
          mean += vals[r];
          mean_test += tests[r];
        }
        mean /= static_cast<double>(n_repeats);
        mean_test /= static_cast<double>(n_repeats);
        double var = 0;
        for (double v : vals) var += (v - mean) * (v - mean);
        row.mean_val = mean;
        row.std_val = std::sqrt(var / static_cast<double>(n_repeats));
        row.mean_test = mean_test;
        row.config.seed = derive_seed(seed, i);
        result.rows[i] = row;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(max_parallel, n_configs));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::size_t best = 0;
  for (std::size_t i = 1; i < n_configs; ++i) {
    if (result.rows[i].mean_val > result.rows[best].mean_val) best = i;
  }
  result.best = result.rows[best].config;
  return result;
}

std::string search_table_tsv(const SearchResult& result) {
  std::string out = "layers\thidden\tlr\tdropout\tweight_decay\tmean_val\tstd_val\tmean_test\n";
  char buf[160];
  for (const auto& row : result.rows) {
    std::snprintf(buf, sizeof buf, "%zu\t%zu\t%g\t%g\t%g\t%.6f\t%.6f\t%.6f\n", row.config.layers,
                  row.config.hidden, row.config.learning_rate, row.config.dropout,
                  row.config.weight_decay, row.mean_val, row.std_val, row.mean_test);
    out += buf;
  }
  return out;
}

}  // namespace tagbench
