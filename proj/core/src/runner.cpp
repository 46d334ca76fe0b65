#include "tagbench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_set>
#include <variant>

#include "tagbench/error.hpp"
#include "tagbench/io.hpp"
#include "tagbench/rng.hpp"

namespace tagbench {

using nlohmann::json;
namespace fs = std::filesystem;

std::string error_class_name(const std::exception& e) {
#define TAGBENCH_CLASS(T) \
  if (dynamic_cast<const T*>(&e)) return #T;
  TAGBENCH_CLASS(ParseError)
  TAGBENCH_CLASS(UndefinedRatioError)
  TAGBENCH_CLASS(UndefinedCorrelationError)
  TAGBENCH_CLASS(UnparsableRankingError)
  TAGBENCH_CLASS(ExemplarShortageError)
  TAGBENCH_CLASS(EndpointError)
  TAGBENCH_CLASS(TransportError)
  TAGBENCH_CLASS(TrainingError)
  TAGBENCH_CLASS(ValidationError)
  TAGBENCH_CLASS(ConfigError)
  TAGBENCH_CLASS(TemplateError)
  TAGBENCH_CLASS(InvariantViolation)
  TAGBENCH_CLASS(DataError)
  TAGBENCH_CLASS(SchemaError)
  TAGBENCH_CLASS(LookupError)
  TAGBENCH_CLASS(ArgumentError)
  TAGBENCH_CLASS(Error)
#undef TAGBENCH_CLASS
  return "std::exception";
}

json manifest_to_json(const RunManifest& m) {
  json stages = json::object();
  for (const auto& [name, c] : m.stages) {
    stages[name] = {{"dispatched", c.dispatched}, {"succeeded", c.succeeded}, {"failed", c.failed}};
  }
  json failures = json::array();
  for (const auto& f : m.failures) {
    failures.push_back({{"node_id", f.node_id},
                        {"task", f.task_key},
                        {"error_class", f.error_class},
                        {"message", f.message}});
  }
  return {{"config_digest", m.config_digest},
          {"started_at", m.started_at},
          {"finished_at", m.finished_at},
          {"tasks_total", m.tasks_total},
          {"tasks_resumed", m.tasks_resumed},
          {"stages", stages},
          {"failures", failures},
          {"cache", {{"hits", m.cache_hits}, {"misses", m.cache_misses}}},
          {"complete", m.complete}};
}

LoadedDataset load_dataset(const DatasetSpec& spec) {
  for (const auto& p : {spec.nodes, spec.edges, spec.labels}) {
    if (!fs::exists(p)) throw DataError("dataset file not found: " + p.string());
  }
  LoadedDataset out{load_graph(spec.nodes, spec.edges, spec.labels), {}};
  if (spec.splits) {
    if (!fs::exists(*spec.splits)) throw DataError("splits file not found: " + spec.splits->string());
    out.graph.apply_splits(read_splits(*spec.splits));
  }
  const DatasetProfile* profile = nullptr;
  ProfileRegistry custom;
  if (spec.profiles_file) {
    custom = ProfileRegistry::from_file(*spec.profiles_file);
    if (custom.contains(spec.profile)) profile = &custom.get(spec.profile);
  }
  if (!profile) profile = &ProfileRegistry::builtin().get(spec.profile);
  out.profile = profile->bound_to(out.graph.label_vocab());
  if (spec.caps) out.profile.caps = *spec.caps;
  return out;
}

std::vector<std::string> select_targets(const ExperimentConfig& config,
                                        const TextAttributedGraph& graph) {
  if (!config.sample.ids.empty()) {
    for (const auto& id : config.sample.ids) graph.index_of(id);
    return config.sample.ids;
  }
  SplitAssignment pool;
  for (const auto& n : graph.nodes()) {
    pool.emplace(n.id, n.split == config.sample.split ? Split::test : Split::none);
  }
  return sample_test_nodes(pool, config.sample.n, derive_seed(config.seed, "targets"));
}

std::shared_ptr<Predictor> make_predictor(const BackendSpec& spec, const DatasetProfile& profile) {
  std::shared_ptr<Predictor> inner;
  switch (spec.kind) {
    case BackendKind::remote:
      inner = std::make_shared<RemoteChatBackend>(spec.remote);
      break;
    case BackendKind::majority_vote: {
      std::size_t prior = 0;
      if (!spec.prior_label.empty()) {
        auto it = std::find(profile.label_vocab.begin(), profile.label_vocab.end(), spec.prior_label);
        if (it == profile.label_vocab.end()) {
          throw ConfigError("prior label '" + spec.prior_label + "' is not in the vocabulary");
        }
        prior = static_cast<std::size_t>(it - profile.label_vocab.begin());
      }
      inner = std::make_shared<MajorityVoteOracle>(profile.label_vocab, prior);
      break;
    }
    case BackendKind::keyword:
      inner = std::make_shared<KeywordOracle>(profile.label_vocab, spec.keywords);
      break;
  }
  if (spec.cache) {
    return std::make_shared<CachedPredictor>(inner,
                                             std::make_shared<TranscriptCache>(spec.cache->string()));
  }
  return inner;
}

namespace {

// Local oracles have no model tag; reports name the oracle kind instead.
std::string report_model_tag(const ExperimentConfig& config) {
  return config.backend.remote.model_tag.empty() ? std::string(to_string(config.backend.kind))
                                                 : config.backend.remote.model_tag;
}

struct Task {
  std::size_t target;       // index into targets
  std::size_t style;        // index into config.styles
  std::ptrdiff_t perturbation;  // -1 for none
  std::string key;
};

using Outcome = std::variant<PredictionRecord, FailureEntry>;

// Existing records; a torn final line is cut from the file.
std::vector<PredictionRecord> load_existing(const fs::path& path) {
  std::vector<PredictionRecord> out;
  if (!fs::exists(path)) return out;
  const std::string content = read_file(path);
  std::size_t pos = 0, good_end = 0, line_no = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string_view line(content.data() + pos, (terminated ? nl : content.size()) - pos);
    ++line_no;
    const std::size_t next = terminated ? nl + 1 : content.size();
    if (!line.empty()) {
      try {
        out.push_back(record_from_json(json::parse(line)));
      } catch (const std::exception& e) {
        if (next < content.size()) throw ParseError(path.string(), line_no, e.what());
        break;
      }
      if (!terminated) {
        out.pop_back();  // complete JSON but unterminated: rewrite it below
        break;
      }
    }
    good_end = next;
    pos = next;
  }
  if (good_end < content.size()) write_file(path, std::string_view(content).substr(0, good_end));
  return out;
}

EgoGraph restrict_to(const EgoGraph& ego, const std::vector<std::vector<std::string>>& included) {
  std::unordered_set<std::string> keep;
  for (const auto& hop : included) keep.insert(hop.begin(), hop.end());
  EgoGraph view = ego;
  auto drop = [&](std::vector<NodeRecord>& nodes) {
    nodes.erase(std::remove_if(nodes.begin(), nodes.end(),
                               [&](const NodeRecord& n) { return !keep.count(n.id); }),
                nodes.end());
  };
  drop(view.hop1);
  drop(view.hop2);
  keep.insert(ego.target.id);
  view.intra_edges.clear();
  for (const auto& e : ego.intra_edges) {
    if (keep.count(e.source) && keep.count(e.target)) view.intra_edges.push_back(e);
  }
  return view;
}

std::optional<double> homophily_of(const EgoGraph& ego) {
  try {
    return local_homophily_ratio(ego);
  } catch (const UndefinedRatioError&) {
    return std::nullopt;
  }
}

class Experiment {
 public:
  Experiment(const ExperimentConfig& config, std::shared_ptr<Predictor> predictor)
      : config_(config), predictor_(std::move(predictor)) {}

  RunResult run() {
    RunResult result;
    auto& manifest = result.manifest;
    manifest.config_digest = config_.digest;
    manifest.started_at = iso8601_now();

    data_ = load_dataset(config_.dataset);
    if (!predictor_) predictor_ = make_predictor(config_.backend, data_.profile);
    if (config_.templates_dir) {
      templates_ = TemplateSet::from_directory(*config_.templates_dir);
      options_.templates = &*templates_;
    }
    options_.neighbor_render = config_.neighbor_render;

    const auto targets = select_targets(config_, data_.graph);
    for (const auto& id : targets) {
      egos_.push_back(extract_ego_graph(data_.graph, id, data_.profile.caps, config_.seed));
    }
    prepare_few_shot();

    std::vector<Task> tasks;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      for (std::size_t s = 0; s < config_.styles.size(); ++s) {
        for (std::ptrdiff_t p = -1; p < static_cast<std::ptrdiff_t>(config_.perturbations.size());
             ++p) {
          Task task{t, s, p, {}};
          PredictionRecord probe;
          probe.node_id = targets[t];
          probe.style = config_.styles[s];
          probe.perturbation = perturbation_of(p);
          probe.context = config_.context;
          task.key = probe.task_key();
          tasks.push_back(std::move(task));
        }
      }
    }
    manifest.tasks_total = tasks.size();

    fs::create_directories(config_.output);
    const fs::path records_path = config_.output / "records.jsonl";
    result.records = load_existing(records_path);
    std::unordered_set<std::string> done;
    for (const auto& r : result.records) done.insert(r.task_key());
    std::vector<const Task*> pending;
    for (const auto& t : tasks) {
      if (done.count(t.key)) {
        ++manifest.tasks_resumed;
      } else {
        pending.push_back(&t);
      }
    }

    write_json(config_.output / "config.resolved.json", resolved_config());
    manifest_ = &manifest;
    flush_manifest();

    std::ofstream out(records_path, std::ios::app | std::ios::binary);
    if (!out) throw DataError("cannot open " + records_path.string() + " for appending");

    std::vector<std::optional<Outcome>> outcomes(pending.size());
    std::mutex mutex;
    std::condition_variable ready;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr fatal;

    auto worker = [&] {
      for (std::size_t i = next++; i < pending.size() && !abort; i = next++) {
        std::optional<Outcome> outcome;
        try {
          outcome = process(*pending[i], targets);
        } catch (const ConfigError&) {
          std::lock_guard lock(mutex);
          if (!fatal) fatal = std::current_exception();
          abort = true;
        }
        std::lock_guard lock(mutex);
        outcomes[i] = std::move(outcome);
        ready.notify_all();
      }
      std::lock_guard lock(mutex);
      ready.notify_all();
    };

    const std::size_t n_workers = std::max<std::size_t>(1, std::min(config_.workers, pending.size()));
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);

    try {
      for (std::size_t i = 0; i < pending.size(); ++i) {
        Outcome outcome;
        {
          std::unique_lock lock(mutex);
          ready.wait(lock, [&] { return outcomes[i].has_value() || abort; });
          if (!outcomes[i]) break;
          outcome = std::move(*outcomes[i]);
          outcomes[i].reset();
        }
        if (auto* rec = std::get_if<PredictionRecord>(&outcome)) {
          out << record_to_json(*rec, data_.profile.label_vocab).dump(-1, ' ', false,
                                                                      json::error_handler_t::replace)
              << '\n';
          out.flush();
          result.records.push_back(std::move(*rec));
        } else {
          std::lock_guard lock(counters_mutex_);
          manifest.failures.push_back(std::get<FailureEntry>(std::move(outcome)));
        }
        if ((i + 1) % 25 == 0) flush_manifest();
      }
    } catch (...) {
      abort = true;
      for (auto& t : threads) t.join();
      flush_manifest();
      throw;
    }
    for (auto& t : threads) t.join();
    if (fatal) {
      flush_manifest();
      std::rethrow_exception(fatal);
    }

    if (auto cached = std::dynamic_pointer_cast<CachedPredictor>(predictor_)) {
      manifest.cache_hits = cached->hits();
      manifest.cache_misses = cached->misses();
    }
    manifest.finished_at = iso8601_now();
    manifest.complete = true;
    if (!result.records.empty()) {
      result.report = build_report(result.records, meta(manifest));
      write_report(result.report, config_.output);
    }
    flush_manifest();
    return result;
  }

 private:
  Perturbation perturbation_of(std::ptrdiff_t index) const {
    return index < 0 ? Perturbation::none()
                     : config_.perturbations[static_cast<std::size_t>(index)];
  }

  ReportMeta meta(const RunManifest& manifest) const {
    return {config_.seed, report_model_tag(config_), data_.profile.name, manifest.started_at,
            manifest.finished_at};
  }

  json resolved_config() const {
    json styles = json::array();
    for (const auto& s : config_.styles) styles.push_back(s.key());
    json perts = json::array();
    for (const auto& p : config_.perturbations) perts.push_back(perturbation_to_json(p));
    return {{"name", config_.name},
            {"seed", config_.seed},
            {"digest", config_.digest},
            {"dataset", data_.profile.name},
            {"styles", styles},
            {"context", to_string(config_.context)},
            {"perturbations", perts},
            {"backend", to_string(config_.backend.kind)},
            {"rng", Rng::kName}};
  }

  static void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

  void flush_manifest() {
    std::lock_guard lock(counters_mutex_);
    write_json(config_.output / "manifest.json", manifest_to_json(*manifest_));
  }

  void count(const std::string& stage, bool dispatched, std::optional<bool> ok) {
    std::lock_guard lock(counters_mutex_);
    auto& c = manifest_->stages[stage];
    if (dispatched) ++c.dispatched;
    if (ok) ++(*ok ? c.succeeded : c.failed);
  }

  void prepare_few_shot() {
    const bool wanted = std::any_of(config_.styles.begin(), config_.styles.end(), [](const auto& s) {
      return s.kind == StyleKind::few_shot;
    });
    if (!wanted) return;
    FewShotOptions opts;
    opts.n = config_.few_shot.n;
    opts.probe_budget = config_.few_shot.probe_budget;
    opts.context = config_.context;
    opts.seed = config_.seed;
    opts.decoding = config_.backend.decoding;
    opts.model_tag = config_.backend.remote.model_tag;
    try {
      exemplars_ = build_few_shot_exemplars(data_.graph, data_.profile, *predictor_, opts);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error&) {
      few_shot_error_ = std::current_exception();
    }
  }

  RawResponse call(const std::string& stage, const PredictorRequest& request) {
    count(stage, true, std::nullopt);
    try {
      auto response = predictor_->complete(request);
      count(stage, false, true);
      return response;
    } catch (...) {
      count(stage, false, false);
      throw;
    }
  }

  Outcome process(const Task& task, const std::vector<std::string>& targets) {
    count("task", true, std::nullopt);
    PredictionRecord rec;
    rec.node_id = targets[task.target];
    rec.style = config_.styles[task.style];
    rec.perturbation = perturbation_of(task.perturbation);
    rec.context = config_.context;
    try {
      if (rec.style.kind == StyleKind::few_shot && few_shot_error_) {
        std::rethrow_exception(few_shot_error_);
      }
      const EgoGraph ego = rec.perturbation.apply(data_.graph, egos_[task.target]);
      const PromptBundle bundle =
          render_prompt(ego, rec.style, data_.profile, config_.context, exemplars_, options_);
      const auto& decoding = config_.backend.decoding;
      const auto& model_tag = config_.backend.remote.model_tag;

      std::string final_text = bundle.stages.back();
      auto included = bundle.included_neighbor_ids;
      if (rec.style.is_attention()) {
        PredictorRequest rank{bundle.system_text, {bundle.stages.front()}, decoding, model_tag,
                              RequestPurpose::rank, &ego};
        const auto ranking = call("rank", rank);
        const auto k = static_cast<std::size_t>(rec.style.attention_k);
        std::vector<std::size_t> selection;
        try {
          selection = parse_ranked_list(ranking.text, ego.hop1.size(), k);
        } catch (const UnparsableRankingError&) {
          selection = default_attention_selection(ego.hop1.size(), k);
          rec.ranking_fallback = true;
        }
        final_text = render_attention_stage2(ego, selection, data_.profile, config_.context,
                                             rec.style.is_linearized(), options_);
        included.assign(1, {});
        for (auto i : selection) included[0].push_back(ego.hop1[i].id);
      }

      const EgoGraph view = restrict_to(ego, included);
      PredictorRequest classify{bundle.system_text, {final_text}, decoding, model_tag,
                                RequestPurpose::classify, &view};
      const auto response = call("classify", classify);

      rec.raw_text = response.text;
      rec.parsed = parse_answer(response.text, data_.profile);
      rec.truth = ego.target.label;
      rec.correct = rec.parsed.ok() && rec.truth && *rec.parsed.label == *rec.truth;
      rec.homophily = rec.style.uses_neighbors() ? homophily_of(view) : homophily_of(ego);
      rec.neighbor_count = view.neighbor_count();
      count("task", false, true);
      return rec;
    } catch (const ConfigError&) {
      count("task", false, false);
      throw;
    } catch (const std::exception& e) {
      count("task", false, false);
      return FailureEntry{rec.node_id, task.key, error_class_name(e), e.what()};
    }
  }

  const ExperimentConfig& config_;
  std::shared_ptr<Predictor> predictor_;
  LoadedDataset data_;
  std::optional<TemplateSet> templates_;
  RenderOptions options_;
  std::vector<EgoGraph> egos_;
  std::vector<FewShotExemplar> exemplars_;
  std::exception_ptr few_shot_error_;
  RunManifest* manifest_ = nullptr;
  std::mutex counters_mutex_;
};

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, std::shared_ptr<Predictor> predictor) {
  return Experiment(config, std::move(predictor)).run();
}

ExperimentReport report_from_output(const ExperimentConfig& config) {
  const fs::path records_path = config.output / "records.jsonl";
  if (!fs::exists(records_path)) throw DataError("no records at " + records_path.string());
  const auto records = read_records(records_path);
  ReportMeta meta{config.seed, report_model_tag(config), config.dataset.profile, "", ""};
  const fs::path manifest_path = config.output / "manifest.json";
  if (fs::exists(manifest_path)) {
    const auto m = json::parse(read_file(manifest_path));
    meta.started_at = m.value("started_at", "");
    meta.finished_at = m.value("finished_at", "");
  }
  auto report = build_report(records, meta);
  write_report(report, config.output);
  return report;
}

SplitSummary run_split(const ExperimentConfig& config) {
  if (!config.split) throw ConfigError("split section missing");
  const auto graph = load_graph(config.dataset.nodes, config.dataset.edges, config.dataset.labels);
  SplitAssignment splits;
  if (config.split->ratios) {
    splits = split_by_ratio(graph, *config.split->ratios, derive_seed(config.seed, "split"));
  } else {
    splits = split_by_year(graph, *config.split->train_before, config.split->val_years,
                           config.split->test_years);
  }
  SplitSummary summary{count_splits(splits), config.output / "splits.tsv"};
  write_splits(splits, summary.path);
  return summary;
}

BuildReport run_prepare(const ExperimentConfig& config,
                        std::shared_ptr<ReferenceResolver> resolver) {
  if (!config.prepare) throw ConfigError("prepare section missing");
  const auto& spec = *config.prepare;
  const auto corpus = read_corpus(spec.corpus);
  if (!resolver) {
    if (spec.http) {
      resolver = std::make_shared<HttpResolver>(*spec.http);
    } else {
      resolver = std::make_shared<ScriptedResolver>(corpus);
    }
  }
  if (spec.requests_per_second > 0) {
    resolver = std::make_shared<RateLimitedResolver>(
        resolver, spec.requests_per_second,
        static_cast<std::size_t>(std::max(1.0, spec.requests_per_second)),
        spec.build.max_parallel);
  }

  std::vector<PaperStub> seeds;
  if (spec.n_seeds == 0) {
    for (const auto& p : corpus) {
      if (p.year >= spec.seeds_from_year) seeds.push_back(p);
    }
  } else {
    seeds = sample_seeds(corpus, spec.seeds_from_year, spec.n_seeds, config.seed);
  }

  std::optional<LoadedDataset> prior;
  if (spec.prior) prior = load_dataset(*spec.prior);
  BuildReport report;
  const auto graph = build_citation_graph(seeds, *resolver, spec.policy, spec.build,
                                          prior ? &prior->graph : nullptr, &report);
  write_graph(graph, config.output / "nodes.jsonl", config.output / "edges.tsv",
              config.output / "labels.txt");
  json searches = json::object();
  for (const auto& [id, n] : report.searches_per_paper) searches[id] = n;
  const json summary = {{"nodes", graph.size()},
                        {"edges", graph.edge_count()},
                        {"seeds", seeds.size()},
                        {"id_matches", report.id_matches},
                        {"title_matches", report.title_matches},
                        {"unresolved", report.unresolved},
                        {"transport_failures", report.transport_failures},
                        {"budget_skipped", report.budget_skipped},
                        {"excluded_pre_cutoff", report.excluded_pre_cutoff},
                        {"searches_per_paper", searches}};
  write_file(config.output / "build_report.json", summary.dump(2) + "\n");
  return report;
}

MpnnSummary run_mpnn(const ExperimentConfig& config) {
  if (!config.mpnn) throw ConfigError("mpnn section missing");
  const auto& spec = *config.mpnn;
  const auto data = load_dataset(config.dataset);
  const Matrix x = featurize(data.graph, spec.feature_dim, config.seed);

  MpnnSummary summary;
  summary.search = random_search(spec.model, data.graph, x, spec.space, spec.n_configs,
                                 spec.n_repeats, config.seed, spec.parallel);
  summary.best_run = train(spec.model, data.graph, x, summary.search.best);

  std::vector<std::string> targets;
  if (config.sample.n > 0 || !config.sample.ids.empty()) {
    targets = select_targets(config, data.graph);
  } else {
    for (const auto& n : data.graph.nodes()) {
      if (n.split == Split::test && n.label) targets.push_back(n.id);
    }
  }
  std::vector<Perturbation> conditions{Perturbation::none()};
  conditions.insert(conditions.end(), config.perturbations.begin(), config.perturbations.end());
  for (const auto& cond : conditions) {
    std::size_t hit = 0, total = 0;
    for (const auto& id : targets) {
      const auto& node = data.graph.node(id);
      if (!node.label) continue;
      const auto ego = cond.apply(
          data.graph, extract_ego_graph(data.graph, id, data.profile.caps, config.seed));
      ++total;
      hit += predict_target(summary.best_run.params, ego, data.graph.label_vocab(),
                            spec.feature_dim, config.seed) == *node.label;
    }
    if (total > 0) summary.ego_accuracy[cond.key()] = static_cast<double>(hit) / total;
  }

  write_file(config.output / "search.tsv", search_table_tsv(summary.search));
  json ego = json::object();
  for (const auto& [k, v] : summary.ego_accuracy) ego[k] = v;
  const auto& best = summary.search.best;
  const json j = {{"model", to_string(spec.model)},
                  {"best",
                   {{"layers", best.layers},
                    {"hidden", best.hidden},
                    {"learning_rate", best.learning_rate},
                    {"dropout", best.dropout},
                    {"weight_decay", best.weight_decay},
                    {"seed", best.seed}}},
                  {"val_accuracy", summary.best_run.val_accuracy},
                  {"test_accuracy", summary.best_run.test_accuracy},
                  {"epochs_run", summary.best_run.epochs_run},
                  {"ego_accuracy", ego}};
  write_file(config.output / "mpnn.json", j.dump(2) + "\n");
  return summary;
}

}  // namespace tagbench
