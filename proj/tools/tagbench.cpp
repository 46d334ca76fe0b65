#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tagbench/error.hpp"
#include "tagbench/runner.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kAborted = 2;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "Experiment configuration (JSON)")->required();
  cmd->add_option("--seed", args.seed, "Overrides the configured seed");
  cmd->add_option("--out", args.out, "Overrides the configured output directory");
}

tagbench::ExperimentConfig load(const CommonArgs& args, tagbench::ConfigUse use) {
  tagbench::ConfigOverrides overrides;
  overrides.seed = args.seed;
  if (args.out) overrides.output = std::filesystem::absolute(*args.out);
  return tagbench::validate_config(args.config, use, overrides);
}

int run_command(const std::string& name, const CommonArgs& args) {
  using tagbench::ConfigUse;
  if (name == "run") {
    const auto cfg = load(args, ConfigUse::run);
    const auto result = tagbench::run_experiment(cfg);
    const auto& task = result.manifest.stages.count("task") ? result.manifest.stages.at("task")
                                                            : tagbench::StageCounters{};
    std::printf("%zu tasks: %zu new, %zu resumed, %zu failed; output in %s\n",
                result.manifest.tasks_total, task.succeeded, result.manifest.tasks_resumed,
                task.failed, cfg.output.c_str());
    for (const auto& row : result.report.accuracy) {
      std::printf("  %-28s %-7s %-24s acc=%.4f n=%zu\n", row.style.c_str(), row.context.c_str(),
                  row.perturbation.c_str(), row.accuracy, row.n);
    }
  } else if (name == "report") {
    const auto cfg = load(args, ConfigUse::report);
    const auto report = tagbench::report_from_output(cfg);
    std::printf("report over %zu records written to %s\n", report.total_records,
                (cfg.output / "report.json").c_str());
  } else if (name == "split") {
    const auto cfg = load(args, ConfigUse::split);
    const auto s = tagbench::run_split(cfg);
    std::printf("train=%zu validation=%zu test=%zu none=%zu -> %s\n", s.counts.train,
                s.counts.validation, s.counts.test, s.counts.none, s.path.c_str());
  } else if (name == "prepare") {
    const auto cfg = load(args, ConfigUse::prepare);
    const auto r = tagbench::run_prepare(cfg);
    std::printf("id matches=%zu title matches=%zu unresolved=%zu budget skipped=%zu -> %s\n",
                r.id_matches, r.title_matches, r.unresolved, r.budget_skipped,
                cfg.output.c_str());
  } else if (name == "mpnn") {
    const auto cfg = load(args, ConfigUse::mpnn);
    const auto s = tagbench::run_mpnn(cfg);
    std::printf("best: layers=%zu hidden=%zu lr=%g dropout=%g wd=%g val=%.4f test=%.4f\n",
                s.search.best.layers, s.search.best.hidden, s.search.best.learning_rate,
                s.search.best.dropout, s.search.best.weight_decay, s.best_run.val_accuracy,
                s.best_run.test_accuracy);
    for (const auto& [key, acc] : s.ego_accuracy) {
      std::printf("  ego accuracy %-28s %.4f\n", key.c_str(), acc);
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for LLM node classification on text-attributed graphs"};
  app.require_subcommand(1);
  CommonArgs args;
  const char* commands[][2] = {
      {"prepare", "Build a citation graph from a paper corpus"},
      {"split", "Assign train/validation/test splits"},
      {"run", "Run prompting experiments and write records, manifest and report"},
      {"report", "Rebuild the report from existing records"},
      {"mpnn", "Train GCN/SAGE baselines with random hyperparameter search"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return run_command(name, args);
  } catch (const tagbench::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "aborted (" << tagbench::error_class_name(e) << "): " << e.what() << "\n";
    return kAborted;
  }
}
