#include "tagbench/records.hpp"

#include "tagbench/error.hpp"
#include "tagbench/io.hpp"

namespace tagbench {

using nlohmann::json;

std::string PredictionRecord::task_key() const {
  return node_id + "|" + style.key() + "|" + perturbation.key() + "|" +
         std::string(to_string(context));
}

namespace {

json optional_label(const std::optional<std::size_t>& label,
                    const std::vector<std::string>& vocab) {
  if (!label || *label >= vocab.size()) return nullptr;
  return vocab[*label];
}

}  // namespace

json record_to_json(const PredictionRecord& record, const std::vector<std::string>& vocab) {
  json j = {{"node_id", record.node_id},
            {"style", record.style.key()},
            {"perturbation", perturbation_to_json(record.perturbation)},
            {"perturbation_key", record.perturbation.key()},
            {"context", to_string(record.context)},
            {"raw_text", record.raw_text},
            {"parsed", record.parsed.label ? json(*record.parsed.label) : json(nullptr)},
            {"parsed_name", optional_label(record.parsed.label, vocab)},
            {"parse_error", record.parsed.reason},
            {"truth", record.truth ? json(*record.truth) : json(nullptr)},
            {"truth_name", optional_label(record.truth, vocab)},
            {"correct", record.correct},
            {"homophily", record.homophily ? json(*record.homophily) : json(nullptr)},
            {"neighbor_count", record.neighbor_count},
            {"ranking_fallback", record.ranking_fallback}};
  return j;
}

PredictionRecord record_from_json(const json& j) {
  PredictionRecord r;
  try {
    r.node_id = j.at("node_id").get<std::string>();
    r.style = PromptStyle::parse(j.at("style").get<std::string>());
    r.perturbation = perturbation_from_json(j.at("perturbation"));
    r.context = parse_context(j.at("context").get<std::string>());
    r.raw_text = j.at("raw_text").get<std::string>();
    if (!j.at("parsed").is_null()) r.parsed.label = j.at("parsed").get<std::size_t>();
    r.parsed.reason = j.value("parse_error", std::string());
    if (!j.at("truth").is_null()) r.truth = j.at("truth").get<std::size_t>();
    r.correct = j.at("correct").get<bool>();
    if (!j.at("homophily").is_null()) r.homophily = j.at("homophily").get<double>();
    r.neighbor_count = j.value("neighbor_count", std::size_t{0});
    r.ranking_fallback = j.value("ranking_fallback", false);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed prediction record: ") + e.what());
  } catch (const ConfigError& e) {
    throw SchemaError(std::string("malformed prediction record: ") + e.what());
  } catch (const ArgumentError& e) {
    throw SchemaError(std::string("malformed prediction record: ") + e.what());
  }
  if (r.correct && (!r.parsed.label || r.parsed.label != r.truth)) {
    throw SchemaError("record for '" + r.node_id + "' is marked correct but disagrees with truth");
  }
  return r;
}

std::vector<PredictionRecord> read_records(const std::filesystem::path& path) {
  std::vector<PredictionRecord> out;
  for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (line.empty()) return;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path.string(), number, e.what());
    } catch (const SchemaError& e) {
      throw ParseError(path.string(), number, e.what());
    }
  });
  return out;
}

}  // namespace tagbench
