// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails. Set UPDATE_GOLDEN=1 to refreeze the fixture values.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "scenarios.hpp"
#include "tagbench/answer.hpp"
#include "tagbench/citation.hpp"
#include "tagbench/ego.hpp"
#include "tagbench/io.hpp"
#include "tagbench/mpnn.hpp"
#include "tagbench/perturb.hpp"
#include "tagbench/prompt.hpp"
#include "tagbench/runner.hpp"
#include "tagbench/stats.hpp"
#include "tagbench/text.hpp"

namespace tagbench {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Collects the first few mismatches so a FAIL line says what went wrong.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::string out = std::to_string(checks_) + " checks";
    if (failures_) out += ", " + std::to_string(failures_) + " failed";
    for (const auto& n : notes_) out += "; " + n;
    return out;
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> notes_;
};

bool golden_matches(const std::string& relative, const std::string& actual) {
  const auto path = testing::golden_dir() / relative;
  if (testing::update_golden()) {
    fs::create_directories(path.parent_path());
    write_file(path, actual);
    return true;
  }
  return fs::exists(path) && read_file(path) == actual;
}

// --- 1. golden prompts -----------------------------------------------------

void golden_prompts(Check& check) {
  const StyleKind kinds[] = {StyleKind::zero_shot,
                             StyleKind::zero_shot_cot,
                             StyleKind::few_shot,
                             StyleKind::khop_title,
                             StyleKind::khop_title_label,
                             StyleKind::khop_attention,
                             StyleKind::linearized_khop_title,
                             StyleKind::linearized_khop_title_label,
                             StyleKind::linearized_khop_attention};
  for (const char* name : {"ogbn-arxiv", "cora"}) {
    const auto& profile = ProfileRegistry::builtin().get(name);
    const auto graph = testing::golden_graph(profile.label_vocab);
    const auto ego = testing::golden_ego(graph);
    const auto exemplars = testing::golden_exemplars(profile.label_vocab);
    for (auto kind : kinds) {
      PromptStyle style{kind};
      if (style.uses_neighbors() && !style.is_attention()) style.hops = 2;
      for (auto context : {TextContext::rich, TextContext::scarce}) {
        const auto bundle = render_prompt(ego, style, profile, context, exemplars);
        const std::string stem =
            std::string(name) + "/" + style.key() + "__" + std::string(to_string(context));
        for (std::size_t i = 0; i < bundle.stages.size(); ++i) {
          const auto rel = stem + ".stage" + std::to_string(i + 1) + ".txt";
          check.expect(golden_matches(rel, bundle.stages[i]), rel);
        }
        check.expect(golden_matches(std::string(name) + "/system.txt", bundle.system_text),
                     std::string(name) + "/system.txt");
      }
    }
  }
}

// --- 2. drop formulas ------------------------------------------------------

// round_half_up(total * tenths / 10) in integers.
std::size_t oracle_b(std::size_t total, int tenths) {
  return (total * static_cast<std::size_t>(tenths) * 2 + 10) / 20;
}

std::size_t sat_sub(std::size_t a, std::size_t b) { return a > b ? a - b : 0; }

std::pair<std::size_t, std::size_t> same_and_different(const EgoGraph& ego) {
  std::size_t same = 0, diff = 0;
  for (const auto* hop : {&ego.hop1, &ego.hop2}) {
    for (const auto& n : *hop) (n.label == ego.target.label ? same : diff) += 1;
  }
  return {same, diff};
}

void drop_formulas(Check& check) {
  for (std::size_t x = 0; x <= 30; ++x) {
    for (std::size_t y = 0; y <= 30; ++y) {
      std::vector<NodeRecord> nodes{testing::node("t", "T", 0, Split::test)};
      std::vector<IdEdge> edges;
      for (std::size_t i = 0; i < x + y; ++i) {
        const auto id = "n" + std::to_string(i);
        nodes.push_back(testing::node(id, id, i < x ? 0 : 1, Split::train));
        edges.push_back({"t", id});
      }
      const TextAttributedGraph graph(std::move(nodes), edges, {"L0", "L1"});
      const auto ego = extract_ego_graph(graph, "t", {x + y, 0}, 0);
      for (int k = 0; k <= 10; ++k) {
        const double p = k / 10.0;
        const auto b = oracle_b(x + y, k);
        const std::string where =
            "x=" + std::to_string(x) + " y=" + std::to_string(y) + " p=" + std::to_string(p);
        const auto ds = same_and_different(
            perturb_neighbors(graph, ego, {NeighborMode::drop_same, p, 1}));
        check.expect(ds.first == sat_sub(x, b) && ds.second == y, "drop_same " + where);
        const auto dd = same_and_different(
            perturb_neighbors(graph, ego, {NeighborMode::drop_different, p, 1}));
        check.expect(dd.first == x && dd.second == sat_sub(y, b), "drop_different " + where);
        const auto dr = same_and_different(
            perturb_neighbors(graph, ego, {NeighborMode::drop_random, p, 1}));
        check.expect(dr.first + dr.second == x + y - b, "drop_random " + where);
        const auto rs = retained_counts(x, y, p, NeighborMode::drop_same);
        check.expect(*rs.same == sat_sub(x, b) && *rs.different == y, "counts " + where);
      }
    }
  }
  // Ten neighbors, six sharing the target's label, p = 0.5.
  const auto same = retained_counts(6, 4, 0.5, NeighborMode::drop_same);
  check.expect(*same.same == 1 && *same.different == 4, "worked example drop_same");
  const auto diff = retained_counts(6, 4, 0.5, NeighborMode::drop_different);
  check.expect(*diff.same == 6 && *diff.different == 0, "worked example drop_different");
}

// --- 3. point-biserial -----------------------------------------------------

double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  return static_cast<double>((n * sxy - sx * sy) /
                             std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy)));
}

// P(|T| >= t) by composite Simpson integration of the t density.
double t_two_sided_oracle(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
                   std::sqrt(df * std::numbers::pi);
  auto f = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const int n = 200000;
  const double h = std::abs(t) / n;
  double s = f(0) + f(std::abs(t));
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4 : 2);
  return 1 - 2 * s * h / 3;
}

void point_biserial_check(Check& check) {
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 4 + rng.uniform(60);
    std::vector<double> values, indicator;
    auto flags = std::make_unique<bool[]>(n);
    for (std::size_t i = 0; i < n; ++i) {
      flags[i] = i == 0 || (i != 1 && rng.uniform01() < 0.5);
      indicator.push_back(flags[i] ? 1.0 : 0.0);
      values.push_back(rng.uniform01() + (flags[i] ? 0.2 : 0.0));
    }
    const auto got = point_biserial(values, std::span<const bool>(flags.get(), n));
    const double r = pearson_oracle(values, indicator);
    check.expect(std::abs(got.r - r) <= 1e-12, "r instance " + std::to_string(k));
    const double df = static_cast<double>(n) - 2;
    const double t = r * std::sqrt(df / (1 - r * r));
    check.expect(std::abs(got.p_value - t_two_sided_oracle(t, df)) <= 1e-6,
                 "p instance " + std::to_string(k));
  }
  const std::vector<double> v{0.0, 0.0, 1.0, 1.0};
  const bool f[] = {false, false, true, true};
  check.expect(point_biserial(v, f).r == 1.0, "perfect separation");
}

// --- 4. directional homophily ----------------------------------------------

void directional_homophily(Check& check) {
  testing::TempDir dir;
  const auto h = testing::keyword_homophily_curves(dir.path());
  const auto& same = h.accuracy.at("drop_same");
  const auto& diff = h.accuracy.at("drop_different");
  const auto& random = h.accuracy.at("drop_random");
  check.expect(diff.back() >= random.back(), "drop_different >= drop_random at p=1");
  check.expect(random.back() >= same.back(), "drop_random >= drop_same at p=1");
  for (std::size_t k = 1; k < diff.size(); ++k) {
    check.expect(diff[k] >= diff[k - 1] - 0.02, "drop_different dips at step " + std::to_string(k));
  }
  check.expect(golden_matches("scenario/keyword_homophily_curve.tsv", h.curve_tsv),
               "curve differs from fixture");
}

// --- 5. rewiring invariants ------------------------------------------------

std::set<std::string> ids_of(const EgoGraph& ego) {
  std::set<std::string> out;
  for (const auto& n : ego.hop1) out.insert(n.id);
  for (const auto& n : ego.hop2) out.insert(n.id);
  return out;
}

std::set<IdEdge> target_edges(const EgoGraph& ego) {
  std::set<IdEdge> out;
  for (const auto& e : ego.intra_edges) {
    if (e.source == ego.target.id || e.target == ego.target.id) out.insert(e);
  }
  return out;
}

std::set<std::string> hop2_parents(const EgoGraph& ego) {
  const auto hop1_ids = ego.hop1_ids();
  const std::set<std::string> hop1(hop1_ids.begin(), hop1_ids.end());
  std::set<std::string> hop2;
  for (const auto& n : ego.hop2) hop2.insert(n.id);
  std::set<std::string> parents;
  for (const auto& e : ego.intra_edges) {
    if (hop1.count(e.source) && hop2.count(e.target)) parents.insert(e.source);
    if (hop1.count(e.target) && hop2.count(e.source)) parents.insert(e.target);
  }
  return parents;
}

void rewiring_invariants(Check& check) {
  for (auto kind : {RewireKind::random, RewireKind::extreme, RewireKind::path}) {
    Rng rng(derive_seed(1000, to_string(kind)));
    const std::string name(to_string(kind));
    for (int i = 0; i < 1000; ++i) {
      const auto ego = testing::random_ego(rng);
      const auto out = rewire(ego, kind, rng.next());
      check.expect(ids_of(out) == ids_of(ego), name + " changed the node set");
      check.expect(ego_violations(out).empty(), name + " broke ego invariants");
      switch (kind) {
        case RewireKind::random:
          check.expect(target_edges(out) == target_edges(ego), "random moved target edges");
          break;
        case RewireKind::extreme:
          check.expect(hop2_parents(out).size() == (ego.hop2.empty() ? 0u : 1u),
                       "extreme left several hop-2 parents");
          break;
        case RewireKind::path: {
          if (ego.hop1.empty()) break;
          check.expect(target_edges(out).size() == 1, "path target degree is not 1");
          std::size_t chain = 0;
          for (std::size_t k = 1; k < out.hop1.size(); ++k) {
            const IdEdge link{out.hop1[k - 1].id, out.hop1[k].id};
            chain += std::count(out.intra_edges.begin(), out.intra_edges.end(), link) ? 1 : 0;
          }
          check.expect(chain == ego.hop1.size() - 1, "path chain is not |hop1|-1 edges");
          break;
        }
      }
    }
  }
}

// --- 6. structural-sensitivity contrast -------------------------------------

std::map<std::string, double> parse_values(const std::string& text) {
  std::map<std::string, double> out;
  std::istringstream in(text);
  std::string key;
  double value;
  while (in >> key >> value) out[key] = value;
  return out;
}

void structural_contrast(Check& check) {
  testing::TempDir dir;
  const auto c = testing::rewiring_contrast(dir.path());
  check.expect(c.gcn_drop() > c.oracle_drop(), "GCN drop not above oracle drop");
  const auto rel = "scenario/rewiring_contrast.txt";
  if (testing::update_golden()) golden_matches(rel, testing::contrast_to_text(c));
  const auto path = testing::golden_dir() / rel;
  check.expect(fs::exists(path), "missing frozen margins");
  if (!fs::exists(path)) return;
  const auto frozen = parse_values(read_file(path));
  const double frozen_gcn = frozen.at("gcn_none") - frozen.at("gcn_path");
  const double frozen_oracle = frozen.at("oracle_none") - frozen.at("oracle_path");
  char buf[128];
  std::snprintf(buf, sizeof buf, "GCN drop %.4f vs frozen %.4f", c.gcn_drop(), frozen_gcn);
  check.expect(std::abs(c.gcn_drop() - frozen_gcn) <= 0.02, buf);
  std::snprintf(buf, sizeof buf, "oracle drop %.4f vs frozen %.4f", c.oracle_drop(),
                frozen_oracle);
  check.expect(std::abs(c.oracle_drop() - frozen_oracle) <= 0.02, buf);
}

// --- 7. MPNN numerics ------------------------------------------------------

using Dense = std::vector<std::vector<double>>;

Dense to_dense(const Matrix& m) {
  Dense d(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  }
  return d;
}

Dense matmul(const Dense& a, const Dense& b) {
  Dense c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

// GCN: D^-1/2 (A + I) D^-1/2. SAGE: row-normalized A, zero rows for isolated nodes.
Dense dense_operator(ModelKind kind, const TextAttributedGraph& g) {
  Dense a(g.size(), std::vector<double>(g.size(), 0.0));
  for (const auto& e : g.edges()) {
    if (e.source == e.target) continue;
    a[e.source][e.target] = a[e.target][e.source] = 1.0;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (kind == ModelKind::gcn) a[i][i] = 1.0;
  }
  std::vector<double> deg(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (double v : a[i]) deg[i] += v;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a[i][j] == 0.0) continue;
      a[i][j] /= kind == ModelKind::gcn ? std::sqrt(deg[i] * deg[j]) : deg[i];
    }
  }
  return a;
}

Dense dense_forward(const ModelParams& p, const TextAttributedGraph& g, const Matrix& x) {
  const Dense op = dense_operator(p.kind, g);
  Dense h = to_dense(x);
  for (std::size_t l = 0; l < p.layers(); ++l) {
    Dense z;
    if (p.kind == ModelKind::gcn) {
      z = matmul(matmul(op, h), to_dense(p.weights[l]));
    } else {
      z = matmul(h, to_dense(p.weights[l]));
      const Dense agg = matmul(matmul(op, h), to_dense(p.neigh_weights[l]));
      for (std::size_t i = 0; i < z.size(); ++i) {
        for (std::size_t j = 0; j < z[i].size(); ++j) z[i][j] += agg[i][j];
      }
    }
    if (l + 1 < p.layers()) {
      for (auto& row : z) {
        for (auto& v : row) v = std::max(v, 0.0);
      }
    }
    h = std::move(z);
  }
  return h;
}

struct SmallInstance {
  TextAttributedGraph graph{{}, {}, {}};
  Matrix features;
  std::vector<std::size_t> labels;
  std::vector<std::size_t> train;
};

SmallInstance small_instance(Rng& rng, std::size_t n, std::size_t d, std::size_t classes) {
  SmallInstance in;
  std::vector<NodeRecord> nodes;
  std::vector<IdEdge> edges;
  std::vector<std::string> vocab;
  for (std::size_t c = 0; c < classes; ++c) vocab.push_back("c" + std::to_string(c));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = rng.uniform(classes);
    nodes.push_back(testing::node("v" + std::to_string(i), "v", label));
    in.labels.push_back(label);
    if (i == 0 || rng.uniform01() < 0.7) in.train.push_back(i);
    for (std::size_t j = 0; j < i; ++j) {
      if (rng.uniform01() < 0.3) edges.push_back({"v" + std::to_string(i), "v" + std::to_string(j)});
    }
  }
  in.graph = TextAttributedGraph(nodes, edges, vocab);
  in.features = Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < in.features.size(); ++i) in.features.data()[i] = rng.uniform(-1, 1);
  return in;
}

void mpnn_numerics(Check& check) {
  Rng rng(13);
  for (auto kind : {ModelKind::gcn, ModelKind::sage}) {
    const std::string name(to_string(kind));
    for (int k = 0; k < 10; ++k) {
      auto in = small_instance(rng, 7, 4, 3);
      auto p = init_params(kind, 4, 5, 3, 2, 100 + k);
      const auto op = propagation_operator(kind, in.graph);
      const double wd = 0.01;
      const auto analytic = loss_and_gradient(p, op, in.features, in.labels, in.train, wd);
      double max_err = 0;
      auto probe = [&](Matrix& w, const Matrix& g) {
        for (Eigen::Index i = 0; i < w.size(); ++i) {
          const double orig = w.data()[i];
          const double h = 1e-6;
          w.data()[i] = orig + h;
          const double up = loss_and_gradient(p, op, in.features, in.labels, in.train, wd).loss;
          w.data()[i] = orig - h;
          const double down = loss_and_gradient(p, op, in.features, in.labels, in.train, wd).loss;
          w.data()[i] = orig;
          const double num = (up - down) / (2 * h);
          max_err = std::max(max_err, std::abs(num - g.data()[i]) / std::max(1.0, std::abs(num)));
        }
      };
      for (std::size_t l = 0; l < p.layers(); ++l) {
        probe(p.weights[l], analytic.gradient.weights[l]);
        if (kind == ModelKind::sage) probe(p.neigh_weights[l], analytic.gradient.neigh_weights[l]);
      }
      check.expect(max_err < 1e-5, name + " gradient instance " + std::to_string(k));

      const auto fp = init_params(kind, 4, 5, 3, 1 + rng.uniform(3), 200 + k);
      const Matrix got = forward(fp, propagation_operator(kind, in.graph), in.features);
      const Dense want = dense_forward(fp, in.graph, in.features);
      double worst = 0;
      for (Eigen::Index i = 0; i < got.rows(); ++i) {
        for (Eigen::Index j = 0; j < got.cols(); ++j) {
          worst = std::max(worst, std::abs(got(i, j) - want[i][j]));
        }
      }
      check.expect(worst <= 1e-10, name + " forward instance " + std::to_string(k));
    }
  }
  testing::SyntheticSpec spec;
  spec.nodes = 200;
  const auto g = testing::synthetic_graph(spec);
  const auto x = featurize(g, 32, 0);
  TrainConfig c;
  c.max_epochs = 40;
  c.hidden = 16;
  c.seed = 3;
  for (auto kind : {ModelKind::gcn, ModelKind::sage}) {
    const auto a = train(kind, g, x, c);
    const auto b = train(kind, g, x, c);
    check.expect(a.params.weights == b.params.weights && a.params.neigh_weights == b.params.neigh_weights &&
                     a.final_loss == b.final_loss,
                 std::string(to_string(kind)) + " training is not bit-deterministic");
  }
}

// --- 8. determinism and replay ----------------------------------------------

json toy_document(const fs::path& data) {
  return {{"seed", 21},
          {"workers", 3},
          {"dataset",
           {{"nodes", (data / "nodes.jsonl").string()},
            {"edges", (data / "edges.tsv").string()},
            {"labels", (data / "labels.txt").string()},
            {"splits", (data / "splits.tsv").string()},
            {"profile", "synthetic"},
            {"profiles_file", (testing::data_dir() / "profiles" / "synthetic.json").string()}}},
          {"sample", {{"n", 10}}},
          {"styles", {"zero_shot", "khop_title_label@2", "khop_attention@k3"}},
          {"perturbations",
           {{{"mode", "drop_same"}, {"p", 0.5}, {"seed", 1}}, {{"rewire", "path"}, {"seed", 2}}}},
          {"backend", {{"kind", "majority_vote"}}}};
}

ExperimentConfig load_config(const fs::path& path, json doc, const fs::path& output) {
  doc["output"] = output.string();
  write_file(path, doc.dump(2) + "\n");
  return validate_config(path);
}

void determinism_and_replay(Check& check) {
  testing::TempDir dir;
  testing::SyntheticSpec spec;
  spec.nodes = 120;
  testing::write_dataset(testing::synthetic_graph(spec), dir / "data", "synthetic");

  const auto first = load_config(dir / "a.json", toy_document(dir / "data"), dir / "a");
  const auto second = load_config(dir / "b.json", toy_document(dir / "data"), dir / "b");
  run_experiment(first);
  run_experiment(second);
  const auto records = read_file(first.output / "records.jsonl");
  check.expect(!records.empty() && records == read_file(second.output / "records.jsonl"),
               "toy records differ between runs");
  // The digest pins the bytes across machines as well as runs.
  check.expect(golden_matches("acceptance/toy_records.sha256", sha256_hex(records) + "\n"),
               "toy records differ from the frozen digest");

  auto doc = toy_document(dir / "data");
  doc["styles"] = {"zero_shot", "khop_title@1"};
  doc["perturbations"] = json::array();
  doc["backend"] = {{"kind", "remote"},
                    {"model_tag", "stub"},
                    {"credential_env", "TAGBENCH_ACCEPTANCE_TOKEN"},
                    {"cache", (dir / "cache.jsonl").string()},
                    {"retry", {{"max_attempts", 1}}}};
  ::setenv("TAGBENCH_ACCEPTANCE_TOKEN", "token", 1);
  testing::StubChatServer server([](const json& body) {
    const auto text = body["messages"].back()["content"].get<std::string>();
    return std::pair{200, "class_" + std::to_string(text.size() % 4)};
  });
  doc["backend"]["endpoint"] = server.endpoint();
  const auto live = run_experiment(load_config(dir / "live.json", doc, dir / "live"));
  const std::size_t calls = server.requests();
  check.expect(calls == live.records.size() && calls > 0, "live run call count");
  const auto replay = run_experiment(load_config(dir / "replay.json", doc, dir / "replay"));
  check.expect(server.requests() == calls, "warm-cache replay reached the network");
  check.expect(replay.manifest.cache_misses == 0, "warm-cache replay missed the cache");
  check.expect(read_file(dir / "live" / "records.jsonl") == read_file(dir / "replay" / "records.jsonl"),
               "replayed records differ");
}

// --- 9. dataset pipeline ---------------------------------------------------

std::set<std::string> lines_of(const fs::path& path) {
  std::set<std::string> out;
  for_each_line(path, [&](std::string_view line, std::size_t) {
    if (!line.empty()) out.emplace(line);
  });
  return out;
}

void dataset_fidelity(Check& check) {
  const auto dir = testing::data_dir() / "citation";
  const auto papers = read_corpus(dir / "corpus.jsonl");
  check.expect(papers.size() == 50, "corpus size");
  auto counting =
      std::make_shared<testing::CountingResolver>(std::make_shared<ScriptedResolver>(papers));
  const std::vector<PaperStub> seeds(papers.begin(), papers.begin() + 4);
  BuildOptions options;
  options.search_budget = 30;
  BuildReport report;
  const auto g = build_citation_graph(seeds, *counting, MatchPolicy{}, options, nullptr, &report);
  std::set<std::string> nodes, edges;
  for (const auto& n : g.nodes()) nodes.insert(n.id);
  for (const auto& e : g.edges()) edges.insert(g.node(e.source).id + "\t" + g.node(e.target).id);
  check.expect(nodes == lines_of(dir / "expected_nodes.txt"), "node set differs");
  check.expect(edges == lines_of(dir / "expected_edges.tsv"), "edge set differs");
  std::size_t recorded = 0;
  for (const auto& [paper, searches] : report.searches_per_paper) {
    check.expect(searches <= 30, paper + " exceeded the search budget");
    recorded += searches;
  }
  check.expect(recorded == counting->searches(), "search instrumentation disagrees");

  Rng rng(41);
  auto lev = [](const std::string& a, const std::string& b) {
    const auto x = decode_utf8(a);
    const auto y = decode_utf8(b);
    return levenshtein({x.data(), x.size()}, {y.data(), y.size()});
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = testing::random_word(rng, 10, "abc");
    const auto b = testing::random_word(rng, 10, "abc");
    const auto c = testing::random_word(rng, 10, "abc");
    check.expect(lev(a, a) == 0, "identity");
    check.expect((lev(a, b) == 0) == (a == b), "indiscernibles");
    check.expect(lev(a, b) == lev(b, a), "symmetry");
    check.expect(lev(a, c) <= lev(a, b) + lev(b, c), "triangle");
  }
}

// --- 10. parser totality ---------------------------------------------------

void parser_totality(Check& check) {
  const auto& cora = ProfileRegistry::builtin().get("cora");
  const auto& arxiv = ProfileRegistry::builtin().get("ogbn-arxiv");
  Rng rng(31415);
  const std::string pieces[] = {"cs.", "CS.LG", "Neural Networks", "\n", " ", "Answer:",
                                "Theory", "cs.ZZ", "\xff\xfe", "Genetic Algorthms"};
  for (int i = 0; i < 10000; ++i) {
    std::string raw;
    const std::size_t parts = rng.uniform(8);
    for (std::size_t k = 0; k < parts; ++k) {
      if (rng.uniform(2)) {
        raw += pieces[rng.uniform(std::size(pieces))];
      } else {
        raw.push_back(static_cast<char>(rng.uniform(256)));
      }
    }
    for (const auto* p : {&cora, &arxiv}) {
      try {
        const auto r = parse_answer(raw, *p);
        check.expect(r.ok() ? *r.label < p->label_vocab.size() : !r.reason.empty(),
                     "ill-formed result");
      } catch (...) {
        check.expect(false, "parse_answer threw");
      }
    }
  }
  auto name = [](std::string_view raw, const DatasetProfile& p) -> std::string {
    const auto r = parse_answer(raw, p);
    return r.ok() ? p.label_vocab.at(*r.label) : "<none>";
  };
  check.expect(name("I think CS.cv, maybe cs.LG", arxiv) == "cs.CV", "category format");
  check.expect(name("cs.ZZ", arxiv) == "<none>", "unknown category");
  check.expect(name("The category is Neural Networks.", cora) == "Neural Networks", "option name");
  check.expect(name("Let me think.\n\nNeural Netwrks\n", cora) == "Neural Networks",
               "fuzzy final line");
  check.expect(name("It could be several things.", cora) == "<none>", "unparsable");
}

struct Criterion {
  const char* name;
  std::function<void(Check&)> run;
  double budget_seconds;  // 0: no runtime bound
};

}  // namespace
}  // namespace tagbench

int main() {
  using namespace tagbench;
  const Criterion criteria[] = {
      {"golden prompts", golden_prompts, 5},
      {"drop-formula oracle", drop_formulas, 10},
      {"point-biserial correctness", point_biserial_check, 0},
      {"directional homophily", directional_homophily, 60},
      {"rewiring invariants", rewiring_invariants, 10},
      {"LLM-vs-MPNN structural sensitivity", structural_contrast, 300},
      {"MPNN numerics", mpnn_numerics, 0},
      {"pipeline determinism and replay", determinism_and_replay, 0},
      {"dataset-pipeline fidelity", dataset_fidelity, 0},
      {"parser totality", parser_totality, 0},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0) {
      check.expect(seconds < c.budget_seconds,
                   "over the " + std::to_string(static_cast<int>(c.budget_seconds)) + " s budget");
    }
    const bool ok = check.ok();
    failed += ok ? 0 : 1;
    std::printf("%s %2d %s (%s, %.2f s)\n", ok ? "PASS" : "FAIL", index, c.name,
                check.summary().c_str(), seconds);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
