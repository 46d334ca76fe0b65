#include "tagbench/analysis.hpp"

#include <cstdio>
#include <memory>
#include <set>
#include <tuple>

#include "tagbench/error.hpp"
#include "tagbench/io.hpp"

namespace tagbench {

using nlohmann::json;

double accuracy(const std::vector<const PredictionRecord*>& records) {
  if (records.empty()) throw ArgumentError("accuracy of an empty record set");
  std::size_t correct = 0;
  for (const auto* r : records) correct += r->correct ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double accuracy(const std::vector<PredictionRecord>& records) {
  std::vector<const PredictionRecord*> ptrs;
  for (const auto& r : records) ptrs.push_back(&r);
  return accuracy(ptrs);
}

CurveGroups group_for_curves(const std::vector<const PredictionRecord*>& records) {
  CurveGroups groups;
  std::vector<const PredictionRecord*> baseline;
  for (const auto* r : records) {
    if (r->perturbation.kind == Perturbation::Kind::none) {
      baseline.push_back(r);
    } else if (r->perturbation.kind == Perturbation::Kind::neighbors) {
      groups[{std::string(to_string(r->perturbation.drop.mode)), r->perturbation.drop.p}]
          .push_back(r);
    }
  }
  if (!baseline.empty()) {
    std::set<std::string> modes;
    for (const auto& [key, _] : groups) modes.insert(key.first);
    for (const auto& mode : modes) {
      auto& zero = groups[{mode, 0.0}];
      if (zero.empty()) zero = baseline;
    }
  }
  return groups;
}

std::vector<CurvePoint> perturbation_curve(const CurveGroups& groups, std::size_t* excluded) {
  std::vector<CurvePoint> points;
  std::size_t skipped = 0;
  for (const auto& [key, members] : groups) {
    if (members.empty()) {
      ++skipped;
      continue;
    }
    points.push_back({key.first, key.second, accuracy(members), members.size()});
  }
  if (excluded) *excluded += skipped;
  return points;
}

ExperimentReport build_report(const std::vector<PredictionRecord>& records,
                              const ReportMeta& meta) {
  if (records.empty()) throw ArgumentError("cannot build a report without records");
  ExperimentReport report;
  report.meta = meta;
  report.total_records = records.size();

  using Key = std::tuple<std::string, std::string, std::string>;  // style, context, perturbation
  std::map<Key, std::vector<const PredictionRecord*>> cells;
  std::map<std::pair<std::string, std::string>, std::vector<const PredictionRecord*>> by_style;
  for (const auto& r : records) {
    const std::string style = r.style.key();
    const std::string context(to_string(r.context));
    cells[{style, context, r.perturbation.key()}].push_back(&r);
    by_style[{style, context}].push_back(&r);
  }

  for (const auto& [key, members] : cells) {
    AccuracyRow row;
    std::tie(row.style, row.context, row.perturbation) = key;
    row.accuracy = accuracy(members);
    row.n = members.size();
    for (const auto* r : members) row.unparsable += r->parsed.ok() ? 0 : 1;
    row.unparsable_rate = static_cast<double>(row.unparsable) / static_cast<double>(row.n);
    report.accuracy.push_back(std::move(row));
  }

  for (const auto& [key, members] : by_style) {
    CorrelationRow row;
    row.style = key.first;
    row.context = key.second;
    std::vector<double> values;
    auto flags = std::make_unique<bool[]>(members.size());  // vector<bool> has no span view
    for (const auto* r : members) {
      if (r->perturbation.kind != Perturbation::Kind::none || !r->homophily) continue;
      flags[values.size()] = r->correct;
      values.push_back(*r->homophily);
    }
    if (values.empty()) {
      row.omitted_reason = "no records with a defined homophily ratio";
    } else {
      try {
        row.result = point_biserial(values, std::span<const bool>(flags.get(), values.size()));
      } catch (const UndefinedCorrelationError& e) {
        row.omitted_reason = e.what();
      }
    }
    report.correlations.push_back(std::move(row));

    const auto groups = group_for_curves(members);
    if (groups.empty()) continue;
    CurveSet set{key.first, key.second, perturbation_curve(groups, &report.excluded_groups)};
    if (!set.points.empty()) report.curves.push_back(std::move(set));
  }
  return report;
}

json report_to_json(const ExperimentReport& report) {
  json accuracy_rows = json::array();
  for (const auto& row : report.accuracy) {
    accuracy_rows.push_back({{"style", row.style},
                             {"context", row.context},
                             {"perturbation", row.perturbation},
                             {"accuracy", row.accuracy},
                             {"n", row.n},
                             {"unparsable", row.unparsable},
                             {"unparsable_rate", row.unparsable_rate}});
  }
  json correlations = json::array();
  for (const auto& row : report.correlations) {
    json j = {{"style", row.style}, {"context", row.context}};
    if (row.result) {
      j["r"] = row.result->r;
      j["p_value"] = row.result->p_value;
      j["n"] = row.result->n;
    } else {
      j["omitted"] = row.omitted_reason;
    }
    correlations.push_back(std::move(j));
  }
  json curves = json::array();
  for (const auto& set : report.curves) {
    json points = json::array();
    for (const auto& p : set.points) {
      points.push_back({{"mode", p.mode}, {"p", p.p}, {"accuracy", p.accuracy}, {"n", p.n}});
    }
    curves.push_back({{"style", set.style}, {"context", set.context}, {"points", points}});
  }
  return {{"metadata",
           {{"seed", report.meta.seed},
            {"model_tag", report.meta.model_tag},
            {"dataset", report.meta.dataset},
            {"started_at", report.meta.started_at},
            {"finished_at", report.meta.finished_at}}},
          {"total_records", report.total_records},
          {"accuracy", accuracy_rows},
          {"correlations", correlations},
          {"curves", curves},
          {"excluded_groups", report.excluded_groups}};
}

std::string curve_to_tsv(const std::vector<CurvePoint>& points) {
  std::string out = "mode\tp\taccuracy\tn\n";
  char buf[64];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "\t%g\t%.6f\t", p.p, p.accuracy);
    out += p.mode + buf + std::to_string(p.n) + "\n";
  }
  return out;
}

namespace {

std::string file_safe(std::string text) {
  for (auto& c : text) {
    if (c == '@' || c == '/' || c == ':' || c == '#') c = '_';
  }
  return text;
}

}  // namespace

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  write_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
  for (const auto& set : report.curves) {
    write_file(dir / "curves" / (file_safe(set.style) + "__" + set.context + ".tsv"),
               curve_to_tsv(set.points));
  }
}

}  // namespace tagbench
