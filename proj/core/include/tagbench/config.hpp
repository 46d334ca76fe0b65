#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagbench/backend.hpp"
#include "tagbench/citation.hpp"
#include "tagbench/mpnn.hpp"
#include "tagbench/oracle.hpp"
#include "tagbench/perturb.hpp"
#include "tagbench/prompt.hpp"
#include "tagbench/split.hpp"

namespace tagbench {

struct DatasetSpec {
  std::filesystem::path nodes;
  std::filesystem::path edges;
  std::filesystem::path labels;
  std::optional<std::filesystem::path> splits;
  std::string profile = "ogbn-arxiv";
  std::optional<std::filesystem::path> profiles_file;
  std::optional<HopCaps> caps;  // overrides the profile's caps
};

struct SampleSpec {
  std::size_t n = 0;
  Split split = Split::test;
  std::vector<std::string> ids;  // pinned targets; sampling is skipped when set
};

enum class BackendKind { remote, majority_vote, keyword };
std::string_view to_string(BackendKind kind);

struct BackendSpec {
  BackendKind kind = BackendKind::majority_vote;
  RemoteConfig remote;
  DecodingParams decoding;
  std::optional<std::filesystem::path> cache;
  std::string prior_label;  // majority_vote; defaults to the first vocab entry
  KeywordMap keywords;      // keyword
};

struct FewShotSpec {
  std::size_t n = 2;
  std::size_t probe_budget = 50;
};

struct SplitSpec {
  std::optional<SplitRatios> ratios;
  std::optional<int> train_before;
  std::set<int> val_years;
  std::set<int> test_years;
};

struct PrepareSpec {
  std::filesystem::path corpus;  // scripted resolver input and seed pool
  std::optional<HttpResolverConfig> http;
  int seeds_from_year = 0;
  std::size_t n_seeds = 0;  // 0: every paper from seeds_from_year on
  MatchPolicy policy;
  BuildOptions build;
  double requests_per_second = 0.0;  // 0: unlimited
  std::optional<DatasetSpec> prior;
};

struct MpnnSpec {
  ModelKind model = ModelKind::gcn;
  std::size_t feature_dim = 128;
  std::size_t n_configs = 100;
  std::size_t n_repeats = 3;
  SearchSpace space;
  std::size_t parallel = 1;
};

struct ExperimentConfig {
  std::filesystem::path source;  // config file; relative paths resolve against its directory
  std::string digest;            // sha256 of the canonical resolved document
  std::uint64_t seed = 0;
  std::string name;
  DatasetSpec dataset;
  SampleSpec sample;
  std::vector<PromptStyle> styles;
  TextContext context = TextContext::rich;
  std::optional<NeighborRender> neighbor_render;
  std::vector<Perturbation> perturbations;  // "none" is always run in addition
  FewShotSpec few_shot;
  BackendSpec backend;
  std::size_t workers = 4;
  std::filesystem::path output;
  std::optional<std::filesystem::path> templates_dir;
  std::optional<SplitSpec> split;
  std::optional<PrepareSpec> prepare;
  std::optional<MpnnSpec> mpnn;
};

// Which sections a command needs; needed sections must be present and their
// input files must exist.
enum class ConfigUse { run, prepare, split, mpnn, report };

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output;
};

// Collects every problem, each prefixed with its field path, and throws one
// ValidationError listing them all.
ExperimentConfig config_from_json(const nlohmann::json& document,
                                  const std::filesystem::path& base_dir, ConfigUse use,
                                  const ConfigOverrides& overrides = {});
ExperimentConfig validate_config(const std::filesystem::path& path, ConfigUse use = ConfigUse::run,
                                 const ConfigOverrides& overrides = {});

}  // namespace tagbench
