#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagbench/records.hpp"
#include "tagbench/stats.hpp"

namespace tagbench {

// Throws ArgumentError when records is empty.
double accuracy(const std::vector<PredictionRecord>& records);
double accuracy(const std::vector<const PredictionRecord*>& records);

struct CurvePoint {
  std::string mode;
  double p = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

// (mode, p) -> records
using CurveGroups = std::map<std::pair<std::string, double>, std::vector<const PredictionRecord*>>;

// Neighbor-perturbation records grouped by (mode, p). Unperturbed records
// form the p = 0 point of every mode lacking explicit p = 0 records.
CurveGroups group_for_curves(const std::vector<const PredictionRecord*>& records);

// Rows sorted by mode, then ascending p. Empty groups are skipped and
// counted in *excluded.
std::vector<CurvePoint> perturbation_curve(const CurveGroups& groups,
                                           std::size_t* excluded = nullptr);

struct AccuracyRow {
  std::string style;
  std::string context;
  std::string perturbation;
  double accuracy = 0.0;
  std::size_t n = 0;
  std::size_t unparsable = 0;
  double unparsable_rate = 0.0;
};

// Over unperturbed records with a defined homophily ratio.
struct CorrelationRow {
  std::string style;
  std::string context;
  std::optional<CorrelationResult> result;
  std::string omitted_reason;
};

struct CurveSet {
  std::string style;
  std::string context;
  std::vector<CurvePoint> points;
};

struct ReportMeta {
  std::uint64_t seed = 0;
  std::string model_tag;
  std::string dataset;
  std::string started_at;
  std::string finished_at;
};

struct ExperimentReport {
  ReportMeta meta;
  std::vector<AccuracyRow> accuracy;
  std::vector<CorrelationRow> correlations;
  std::vector<CurveSet> curves;
  std::size_t excluded_groups = 0;
  std::size_t total_records = 0;
};

// Throws ArgumentError when records is empty.
ExperimentReport build_report(const std::vector<PredictionRecord>& records, const ReportMeta& meta);

nlohmann::json report_to_json(const ExperimentReport& report);

// "mode\tp\taccuracy\tn" with a header row.
std::string curve_to_tsv(const std::vector<CurvePoint>& points);

// report.json plus curves/<style>__<context>.tsv under dir.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace tagbench
