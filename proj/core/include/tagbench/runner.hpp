#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagbench/analysis.hpp"
#include "tagbench/config.hpp"
#include "tagbench/records.hpp"

namespace tagbench {

struct StageCounters {
  std::size_t dispatched = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

struct FailureEntry {
  std::string node_id;
  std::string task_key;
  std::string error_class;
  std::string message;
};

// dispatched == succeeded + failed for every stage once a run finishes.
struct RunManifest {
  std::string config_digest;
  std::string started_at;
  std::string finished_at;
  std::size_t tasks_total = 0;
  std::size_t tasks_resumed = 0;  // already present in records.jsonl
  std::map<std::string, StageCounters> stages;  // "task", "rank", "classify"
  std::vector<FailureEntry> failures;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  bool complete = false;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

// Short name of the most derived library error type, e.g. "TransportError".
std::string error_class_name(const std::exception& error);

struct LoadedDataset {
  TextAttributedGraph graph;
  DatasetProfile profile;
};

// Loads the graph, applies the splits file and binds the profile. Throws
// Error subclasses naming the offending path.
LoadedDataset load_dataset(const DatasetSpec& spec);

// Targets in run order: pinned ids, or a seeded sample of the sample split.
std::vector<std::string> select_targets(const ExperimentConfig& config,
                                        const TextAttributedGraph& graph);

// Remote backends (optionally cache-wrapped) or local oracles. Throws
// ConfigError, e.g. when the credential variable is unset.
std::shared_ptr<Predictor> make_predictor(const BackendSpec& spec, const DatasetProfile& profile);

struct RunResult {
  std::vector<PredictionRecord> records;  // file order
  RunManifest manifest;
  ExperimentReport report;
};

// Crosses targets x styles x (none + perturbations) and streams one record
// per task to <output>/records.jsonl in task order. Tasks already present in
// the file are skipped, so an interrupted run resumes where it stopped.
// Per-task errors go to the manifest's failure ledger; dataset and backend
// configuration errors abort. Writes manifest.json, report.json and curve
// TSVs. predictor, when given, replaces the configured backend.
RunResult run_experiment(const ExperimentConfig& config,
                         std::shared_ptr<Predictor> predictor = nullptr);

// Rebuilds report.json and curves from an existing records.jsonl.
ExperimentReport report_from_output(const ExperimentConfig& config);

struct SplitSummary {
  SplitCounts counts;
  std::filesystem::path path;
};
// Writes <output>/splits.tsv.
SplitSummary run_split(const ExperimentConfig& config);

// Builds the citation graph and writes nodes.jsonl, edges.tsv, labels.txt
// and build_report.json under <output>.
BuildReport run_prepare(const ExperimentConfig& config,
                        std::shared_ptr<ReferenceResolver> resolver = nullptr);

struct MpnnSummary {
  SearchResult search;
  TrainResult best_run;
  // perturbation key -> accuracy of the best model on sampled targets'
  // ego subgraphs ("none" included)
  std::map<std::string, double> ego_accuracy;
};
// Random search, retraining of the winner, and ego-level evaluation under
// the configured rewirings. Writes search.tsv and mpnn.json under <output>.
MpnnSummary run_mpnn(const ExperimentConfig& config);

}  // namespace tagbench
