#include "tagbench/profile.hpp"

#include "tagbench/error.hpp"
#include "tagbench/io.hpp"
#include "tagbench/resources.hpp"
#include "tagbench/text.hpp"
#include "tagbench/text_template.hpp"

namespace tagbench {

using nlohmann::json;

std::string_view to_string(AnswerFormat format) {
  switch (format) {
    case AnswerFormat::arxiv_subcategory:
      return "arxiv_subcategory";
    case AnswerFormat::arxiv_identifier:
      return "arxiv_identifier";
    case AnswerFormat::option_list:
      break;
  }
  return "option_list";
}

AnswerFormat parse_answer_format(std::string_view text) {
  if (text == "arxiv_subcategory") return AnswerFormat::arxiv_subcategory;
  if (text == "arxiv_identifier") return AnswerFormat::arxiv_identifier;
  if (text == "option_list") return AnswerFormat::option_list;
  throw ConfigError("unknown answer format '" + std::string(text) + "'");
}

DatasetProfile DatasetProfile::bound_to(const std::vector<std::string>& dataset_vocab) const {
  DatasetProfile out = *this;
  if (label_vocab.empty()) {
    out.label_vocab = dataset_vocab;
  } else if (label_vocab != dataset_vocab) {
    throw ConfigError("profile '" + name + "' label vocabulary does not match the dataset's");
  }
  validate_profile(out);
  return out;
}

std::string render_system_prompt(const DatasetProfile& profile) {
  if (profile.system_prompt.find("{{") == std::string::npos) return profile.system_prompt;
  json options = json::array();
  std::string csv, lower_csv, quoted_csv;
  for (const auto& name : profile.option_names()) {
    options.push_back({{"name", name}});
    if (!csv.empty()) {
      csv += ", ";
      lower_csv += ", ";
      quoted_csv += ", ";
    }
    csv += name;
    lower_csv += to_lower_ascii(name);
    quoted_csv += "\"" + name + "\"";
  }
  json ctx = {{"options", options},
              {"options_csv", csv},
              {"options_lower_csv", lower_csv},
              {"options_quoted_csv", quoted_csv}};
  return TextTemplate::compile(profile.system_prompt, "system prompt of " + profile.name)
      .render(ctx);
}

void validate_profile(const DatasetProfile& profile) {
  if (profile.name.empty()) throw ConfigError("profile without a name");
  if (!profile.display_names.empty() &&
      profile.display_names.size() != profile.label_vocab.size()) {
    throw ConfigError("profile '" + profile.name + "': display_names must match label_vocab");
  }
  if (profile.answer_format != AnswerFormat::option_list || profile.label_vocab.empty()) return;
  const std::string text = render_system_prompt(profile);
  std::size_t pos = 0;
  for (const auto& option : profile.option_names()) {
    auto found = text.find(option, pos);
    if (found == std::string::npos) {
      throw ConfigError("profile '" + profile.name + "': system prompt does not list '" + option +
                        "' in vocabulary order");
    }
    pos = found + option.size();
  }
}

DatasetProfile profile_from_json(const json& j) {
  DatasetProfile p;
  try {
    p.name = j.at("name").get<std::string>();
    p.answer_format = parse_answer_format(j.at("answer_format").get<std::string>());
    if (j.contains("system_prompt")) {
      p.system_prompt = j["system_prompt"].get<std::string>();
    } else {
      auto generic = embedded_resource("templates/system_generic.txt");
      p.system_prompt = generic ? std::string(*generic) : std::string();
    }
    if (j.contains("label_vocab")) p.label_vocab = j["label_vocab"].get<std::vector<std::string>>();
    if (j.contains("display_names")) {
      p.display_names = j["display_names"].get<std::vector<std::string>>();
    }
    if (j.contains("caps")) {
      p.caps.hop1_max = j["caps"].at("hop1_max").get<std::size_t>();
      p.caps.hop2_max = j["caps"].at("hop2_max").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed profile: ") + e.what());
  }
  validate_profile(p);
  return p;
}

json profile_to_json(const DatasetProfile& p) {
  json j = {{"name", p.name},
            {"answer_format", to_string(p.answer_format)},
            {"system_prompt", p.system_prompt},
            {"label_vocab", p.label_vocab},
            {"caps", {{"hop1_max", p.caps.hop1_max}, {"hop2_max", p.caps.hop2_max}}}};
  if (!p.display_names.empty()) j["display_names"] = p.display_names;
  return j;
}

const ProfileRegistry& ProfileRegistry::builtin() {
  static const ProfileRegistry registry = [] {
    auto text = embedded_resource("data/profiles.json");
    if (!text) throw Error("built-in profiles are missing");
    return from_json(json::parse(*text));
  }();
  return registry;
}

ProfileRegistry ProfileRegistry::from_json(const json& j) {
  ProfileRegistry r;
  if (!j.contains("profiles") || !j["profiles"].is_array()) {
    throw ConfigError("profile file must contain a 'profiles' array");
  }
  for (const auto& p : j["profiles"]) r.add(profile_from_json(p));
  return r;
}

ProfileRegistry ProfileRegistry::from_file(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void ProfileRegistry::add(DatasetProfile profile) {
  auto name = profile.name;
  profiles_.insert_or_assign(std::move(name), std::move(profile));
}

const DatasetProfile& ProfileRegistry::get(std::string_view name) const {
  auto it = profiles_.find(name);
  if (it == profiles_.end()) throw LookupError("unknown dataset profile '" + std::string(name) + "'");
  return it->second;
}

bool ProfileRegistry::contains(std::string_view name) const { return profiles_.find(name) != profiles_.end(); }

std::vector<std::string> ProfileRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : profiles_) out.push_back(name);
  return out;
}

}  // namespace tagbench
