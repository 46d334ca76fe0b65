#include "tagbench/config.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>

#include "tagbench/error.hpp"
#include "tagbench/io.hpp"
#include "tagbench/profile.hpp"

namespace tagbench {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::remote: return "remote";
    case BackendKind::majority_vote: return "majority_vote";
    case BackendKind::keyword: return "keyword";
  }
  return "?";
}

namespace {

// Accumulates problems as "<field path>: <message>".
class Checker {
 public:
  Checker(fs::path base_dir) : base_(std::move(base_dir)) {}

  void fail(const std::string& path, const std::string& message) {
    problems_.push_back(path + ": " + message);
  }
  const std::vector<std::string>& problems() const { return problems_; }

  void allow_keys(const json& obj, const std::string& path,
                  std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) return;
    for (const auto& [key, _] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        fail(join(path, key), "unknown field");
      }
    }
  }

  const json* section(const json& obj, const std::string& path, const char* key, bool required) {
    if (obj.is_object() && obj.contains(key) && !obj.at(key).is_null()) {
      const json& s = obj.at(key);
      if (!s.is_object()) {
        fail(join(path, key), "must be an object");
        return nullptr;
      }
      return &s;
    }
    if (required) fail(join(path, key), "is required");
    return nullptr;
  }

  template <class T>
  std::optional<T> get(const json& obj, const std::string& path, const char* key, bool required) {
    const std::string where = join(path, key);
    if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) {
      if (required) fail(where, "is required");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return wrong(where, "a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return wrong(where, "a string");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return wrong(where, "a number");
    } else if constexpr (std::is_unsigned_v<T>) {
      // Literals built in code arrive as signed integers; parsed text as unsigned.
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        return wrong(where, "a non-negative integer");
      }
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return wrong(where, "an integer");
    }
    return v.get<T>();
  }

  // Resolves against the config directory; checks existence when asked.
  std::optional<fs::path> file(const json& obj, const std::string& path, const char* key,
                               bool required, bool must_exist) {
    auto raw = get<std::string>(obj, path, key, required);
    if (!raw) return std::nullopt;
    fs::path p(*raw);
    if (p.is_relative()) p = base_ / p;
    p = p.lexically_normal();
    if (must_exist && !fs::exists(p)) fail(join(path, key), "file not found: " + p.string());
    return p;
  }

  fs::path resolve(const std::string& raw) const {
    fs::path p(raw);
    if (p.is_relative()) p = base_ / p;
    return p.lexically_normal();
  }

  template <class Fn>
  void attempt(const std::string& path, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      fail(path, e.what());
    } catch (const json::exception& e) {
      fail(path, e.what());
    }
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

 private:
  std::nullopt_t wrong(const std::string& where, const char* expected) {
    fail(where, std::string("must be ") + expected);
    return std::nullopt;
  }

  fs::path base_;
  std::vector<std::string> problems_;
};

std::optional<HopCaps> read_caps(Checker& c, const json& obj, const std::string& path) {
  const json* s = c.section(obj, path, "caps", false);
  if (!s) return std::nullopt;
  const std::string where = Checker::join(path, "caps");
  c.allow_keys(*s, where, {"hop1", "hop2"});
  HopCaps caps;
  if (auto v = c.get<std::size_t>(*s, where, "hop1", false)) caps.hop1_max = *v;
  if (auto v = c.get<std::size_t>(*s, where, "hop2", false)) caps.hop2_max = *v;
  return caps;
}

DatasetSpec read_dataset(Checker& c, const json& s, const std::string& path, bool must_exist) {
  c.allow_keys(s, path, {"nodes", "edges", "labels", "splits", "profile", "profiles_file", "caps"});
  DatasetSpec d;
  if (auto v = c.file(s, path, "nodes", true, must_exist)) d.nodes = *v;
  if (auto v = c.file(s, path, "edges", true, must_exist)) d.edges = *v;
  if (auto v = c.file(s, path, "labels", true, must_exist)) d.labels = *v;
  d.splits = c.file(s, path, "splits", false, must_exist);
  d.profiles_file = c.file(s, path, "profiles_file", false, true);
  if (auto v = c.get<std::string>(s, path, "profile", false)) d.profile = *v;
  d.caps = read_caps(c, s, path);

  c.attempt(Checker::join(path, "profile"), [&] {
    if (d.profiles_file) {
      auto registry = ProfileRegistry::from_file(*d.profiles_file);
      if (registry.contains(d.profile)) return;
    }
    ProfileRegistry::builtin().get(d.profile);
  });
  return d;
}

RetryPolicy read_retry(Checker& c, const json& obj, const std::string& path) {
  RetryPolicy r;
  const json* s = c.section(obj, path, "retry", false);
  if (!s) return r;
  const std::string where = Checker::join(path, "retry");
  c.allow_keys(*s, where, {"max_attempts", "base_delay_ms", "multiplier", "max_delay_ms"});
  if (auto v = c.get<int>(*s, where, "max_attempts", false)) {
    if (*v < 1) c.fail(Checker::join(where, "max_attempts"), "must be at least 1");
    r.max_attempts = *v;
  }
  if (auto v = c.get<std::uint64_t>(*s, where, "base_delay_ms", false)) {
    r.base_delay = std::chrono::milliseconds(*v);
  }
  if (auto v = c.get<double>(*s, where, "multiplier", false)) {
    if (*v < 1.0) c.fail(Checker::join(where, "multiplier"), "must be at least 1");
    r.multiplier = *v;
  }
  if (auto v = c.get<std::uint64_t>(*s, where, "max_delay_ms", false)) {
    r.max_delay = std::chrono::milliseconds(*v);
  }
  return r;
}

BackendSpec read_backend(Checker& c, const json& s, const std::string& path) {
  c.allow_keys(s, path,
               {"kind", "endpoint", "model_tag", "credential_env", "cache", "max_in_flight",
                "timeout_ms", "retry", "decoding", "prior_label", "keywords"});
  BackendSpec b;
  if (auto kind = c.get<std::string>(s, path, "kind", true)) {
    if (*kind == "remote") {
      b.kind = BackendKind::remote;
    } else if (*kind == "majority_vote") {
      b.kind = BackendKind::majority_vote;
    } else if (*kind == "keyword") {
      b.kind = BackendKind::keyword;
    } else {
      c.fail(Checker::join(path, "kind"), "must be remote, majority_vote or keyword");
    }
  }
  const bool remote = b.kind == BackendKind::remote;
  if (auto v = c.get<std::string>(s, path, "endpoint", remote)) b.remote.endpoint = *v;
  if (auto v = c.get<std::string>(s, path, "model_tag", remote)) b.remote.model_tag = *v;
  if (auto v = c.get<std::string>(s, path, "credential_env", false)) b.remote.credential_env = *v;
  if (auto v = c.get<std::size_t>(s, path, "max_in_flight", false)) {
    if (*v == 0) c.fail(Checker::join(path, "max_in_flight"), "must be at least 1");
    b.remote.max_in_flight = *v;
  }
  if (auto v = c.get<std::uint64_t>(s, path, "timeout_ms", false)) {
    b.remote.timeout = std::chrono::milliseconds(*v);
  }
  b.remote.retry = read_retry(c, s, path);
  if (auto v = c.get<std::string>(s, path, "cache", false)) b.cache = c.resolve(*v);
  if (remote && !b.remote.endpoint.empty() && b.remote.endpoint.rfind("http://", 0) != 0 &&
      b.remote.endpoint.rfind("https://", 0) != 0) {
    c.fail(Checker::join(path, "endpoint"), "must be an http(s) URL");
  }

  if (const json* d = c.section(s, path, "decoding", false)) {
    const std::string where = Checker::join(path, "decoding");
    c.allow_keys(*d, where, {"temperature", "max_tokens"});
    if (auto v = c.get<double>(*d, where, "temperature", false)) {
      if (*v < 0) c.fail(Checker::join(where, "temperature"), "must be >= 0");
      b.decoding.temperature = *v;
    }
    if (auto v = c.get<int>(*d, where, "max_tokens", false)) {
      if (*v < 1) c.fail(Checker::join(where, "max_tokens"), "must be at least 1");
      b.decoding.max_output_tokens = *v;
    }
  }
  if (auto v = c.get<std::string>(s, path, "prior_label", false)) b.prior_label = *v;

  if (s.contains("keywords")) {
    const std::string where = Checker::join(path, "keywords");
    c.attempt(where, [&] {
      json map = s.at("keywords");
      if (map.is_string()) map = json::parse(read_file(c.resolve(map.get<std::string>())));
      if (!map.is_object()) throw ConfigError("must map labels to keyword lists");
      b.keywords = map.get<KeywordMap>();
    });
  } else if (b.kind == BackendKind::keyword) {
    c.fail(Checker::join(path, "keywords"), "is required for the keyword backend");
  }
  return b;
}

std::optional<SplitSpec> read_split(Checker& c, const json& doc, bool required) {
  const json* s = c.section(doc, "", "split", required);
  if (!s) return std::nullopt;
  c.allow_keys(*s, "split", {"ratios", "train_before", "val_years", "test_years"});
  SplitSpec spec;
  if (const json* r = c.section(*s, "split", "ratios", false)) {
    c.allow_keys(*r, "split.ratios", {"train", "validation", "test"});
    SplitRatios ratios;
    ratios.train = c.get<double>(*r, "split.ratios", "train", true).value_or(0.0);
    ratios.validation = c.get<double>(*r, "split.ratios", "validation", false).value_or(0.0);
    ratios.test = c.get<double>(*r, "split.ratios", "test", true).value_or(0.0);
    for (double v : {ratios.train, ratios.validation, ratios.test}) {
      if (v < 0 || v > 1) c.fail("split.ratios", "fractions must lie in [0, 1]");
    }
    if (ratios.train + ratios.validation + ratios.test > 1.0 + 1e-9) {
      c.fail("split.ratios", "fractions sum above 1");
    }
    spec.ratios = ratios;
  }
  spec.train_before = c.get<int>(*s, "split", "train_before", false);
  c.attempt("split.val_years", [&] {
    if (s->contains("val_years")) spec.val_years = s->at("val_years").get<std::set<int>>();
  });
  c.attempt("split.test_years", [&] {
    if (s->contains("test_years")) spec.test_years = s->at("test_years").get<std::set<int>>();
  });
  if (!spec.ratios && !spec.train_before) {
    c.fail("split", "needs either ratios or train_before with year sets");
  }
  return spec;
}

std::optional<PrepareSpec> read_prepare(Checker& c, const json& doc, bool required) {
  const json* s = c.section(doc, "", "prepare", required);
  if (!s) return std::nullopt;
  const std::string path = "prepare";
  c.allow_keys(*s, path,
               {"corpus", "resolver_url", "seeds_from_year", "n_seeds", "threshold", "hops",
                "search_budget", "transport_attempts", "cutoff_year", "parallel",
                "requests_per_second", "prior"});
  PrepareSpec p;
  if (auto v = c.file(*s, path, "corpus", true, true)) p.corpus = *v;
  if (auto v = c.get<std::string>(*s, path, "resolver_url", false)) {
    HttpResolverConfig http;
    http.base_url = *v;
    p.http = http;
  }
  p.seeds_from_year = c.get<int>(*s, path, "seeds_from_year", false).value_or(0);
  p.n_seeds = c.get<std::size_t>(*s, path, "n_seeds", false).value_or(0);
  if (auto v = c.get<double>(*s, path, "threshold", false)) {
    if (!(*v > 0 && *v < 1)) c.fail(path + ".threshold", "must lie in (0, 1)");
    p.policy.threshold = *v;
  }
  if (auto v = c.get<int>(*s, path, "hops", false)) {
    if (*v != 1 && *v != 2) c.fail(path + ".hops", "must be 1 or 2");
    p.build.hops = *v;
  }
  if (auto v = c.get<std::size_t>(*s, path, "search_budget", false)) p.build.search_budget = *v;
  if (auto v = c.get<int>(*s, path, "transport_attempts", false)) {
    if (*v < 1) c.fail(path + ".transport_attempts", "must be at least 1");
    p.build.transport_attempts = *v;
  }
  p.build.cutoff_year = c.get<int>(*s, path, "cutoff_year", false);
  if (auto v = c.get<std::size_t>(*s, path, "parallel", false)) p.build.max_parallel = *v;
  if (auto v = c.get<double>(*s, path, "requests_per_second", false)) {
    if (*v < 0) c.fail(path + ".requests_per_second", "must be >= 0");
    p.requests_per_second = *v;
  }
  if (const json* prior = c.section(*s, path, "prior", false)) {
    p.prior = read_dataset(c, *prior, path + ".prior", true);
  }
  return p;
}

std::optional<MpnnSpec> read_mpnn(Checker& c, const json& doc, bool required) {
  const json* s = c.section(doc, "", "mpnn", required);
  if (!s) return std::nullopt;
  const std::string path = "mpnn";
  c.allow_keys(*s, path,
               {"model", "feature_dim", "n_configs", "n_repeats", "max_epochs", "patience",
                "parallel", "layers", "hidden", "learning_rate", "dropout", "weight_decay"});
  MpnnSpec m;
  if (auto v = c.get<std::string>(*s, path, "model", false)) {
    c.attempt(path + ".model", [&] { m.model = parse_model_kind(*v); });
  }
  if (auto v = c.get<std::size_t>(*s, path, "feature_dim", false)) {
    if (*v == 0) c.fail(path + ".feature_dim", "must be at least 1");
    m.feature_dim = *v;
  }
  if (auto v = c.get<std::size_t>(*s, path, "n_configs", false)) m.n_configs = *v;
  if (auto v = c.get<std::size_t>(*s, path, "n_repeats", false)) m.n_repeats = *v;
  if (m.n_configs == 0) c.fail(path + ".n_configs", "must be at least 1");
  if (m.n_repeats == 0) c.fail(path + ".n_repeats", "must be at least 1");
  if (auto v = c.get<std::size_t>(*s, path, "max_epochs", false)) m.space.max_epochs = *v;
  if (auto v = c.get<std::size_t>(*s, path, "patience", false)) m.space.patience = *v;
  if (auto v = c.get<std::size_t>(*s, path, "parallel", false)) m.parallel = std::max<std::size_t>(*v, 1);
  c.attempt(path, [&] {
    if (s->contains("layers")) m.space.layers = s->at("layers").get<std::vector<std::size_t>>();
    if (s->contains("hidden")) m.space.hidden = s->at("hidden").get<std::vector<std::size_t>>();
    if (s->contains("learning_rate")) {
      m.space.learning_rate = s->at("learning_rate").get<std::vector<double>>();
    }
    if (s->contains("dropout")) m.space.dropout = s->at("dropout").get<std::vector<double>>();
    if (s->contains("weight_decay")) {
      m.space.weight_decay = s->at("weight_decay").get<std::vector<double>>();
    }
  });
  for (double d : m.space.dropout) {
    if (!(d >= 0 && d < 1)) c.fail(path + ".dropout", "values must lie in [0, 1)");
  }
  if (m.space.grid_size() == 0) c.fail(path, "hyperparameter grid is empty");
  if (m.space.grid_size() > 0 && m.n_configs > m.space.grid_size()) {
    c.fail(path + ".n_configs", "exceeds the " + std::to_string(m.space.grid_size()) +
                                    "-point grid");
  }
  return m;
}

}  // namespace

ExperimentConfig config_from_json(const json& document, const fs::path& base_dir, ConfigUse use,
                                  const ConfigOverrides& overrides) {
  Checker c(base_dir);
  ExperimentConfig cfg;
  if (!document.is_object()) throw ValidationError({"(root): must be an object"});
  json doc = document;
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.output) doc["output"] = overrides.output->string();

  c.allow_keys(doc, "",
               {"name", "seed", "dataset", "sample", "styles", "context", "neighbor_render",
                "perturbations", "few_shot", "backend", "workers", "output", "templates_dir",
                "split", "prepare", "mpnn"});
  cfg.name = c.get<std::string>(doc, "", "name", false).value_or("experiment");
  if (auto v = c.get<std::uint64_t>(doc, "", "seed", true)) cfg.seed = *v;
  if (auto v = c.get<std::string>(doc, "", "output", true)) cfg.output = c.resolve(*v);

  const bool needs_dataset = use == ConfigUse::run || use == ConfigUse::split ||
                             use == ConfigUse::mpnn;
  if (const json* d = c.section(doc, "", "dataset", needs_dataset)) {
    cfg.dataset = read_dataset(c, *d, "dataset", needs_dataset);
  }

  const bool is_run = use == ConfigUse::run;
  if (const json* s = c.section(doc, "", "sample", is_run)) {
    c.allow_keys(*s, "sample", {"n", "split", "ids"});
    cfg.sample.n = c.get<std::size_t>(*s, "sample", "n", false).value_or(0);
    if (auto v = c.get<std::string>(*s, "sample", "split", false)) {
      c.attempt("sample.split", [&] { cfg.sample.split = parse_split(*v); });
    }
    c.attempt("sample.ids", [&] {
      if (s->contains("ids")) cfg.sample.ids = s->at("ids").get<std::vector<std::string>>();
    });
    if (cfg.sample.n == 0 && cfg.sample.ids.empty()) {
      c.fail("sample", "needs n >= 1 or a list of ids");
    }
  }

  if (doc.contains("styles")) {
    if (!doc.at("styles").is_array()) {
      c.fail("styles", "must be a list");
    } else {
      for (std::size_t i = 0; i < doc.at("styles").size(); ++i) {
        c.attempt("styles[" + std::to_string(i) + "]", [&] {
          auto style = PromptStyle::parse(doc.at("styles")[i].get<std::string>());
          style.validate();
          cfg.styles.push_back(style);
        });
      }
    }
  }
  if (is_run && cfg.styles.empty()) c.fail("styles", "needs at least one prompt style");

  if (auto v = c.get<std::string>(doc, "", "context", false)) {
    c.attempt("context", [&] { cfg.context = parse_context(*v); });
  }
  if (auto v = c.get<std::string>(doc, "", "neighbor_render", false)) {
    c.attempt("neighbor_render", [&] { cfg.neighbor_render = parse_neighbor_render(*v); });
  }

  if (doc.contains("perturbations")) {
    if (!doc.at("perturbations").is_array()) {
      c.fail("perturbations", "must be a list");
    } else {
      const auto& list = doc.at("perturbations");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string where = "perturbations[" + std::to_string(i) + "]";
        const json& item = list[i];
        if (item.is_object() && item.contains("p") && item.at("p").is_number()) {
          const double p = item.at("p").get<double>();
          if (!(p >= 0.0 && p <= 1.0)) {
            c.fail(where + ".p", "must lie in [0, 1], got " + item.at("p").dump());
            continue;
          }
        }
        c.attempt(where, [&] {
          auto pert = perturbation_from_json(item);
          if (pert.kind != Perturbation::Kind::none) cfg.perturbations.push_back(pert);
        });
      }
    }
  }

  if (const json* f = c.section(doc, "", "few_shot", false)) {
    c.allow_keys(*f, "few_shot", {"n", "probe_budget"});
    if (auto v = c.get<std::size_t>(*f, "few_shot", "n", false)) cfg.few_shot.n = *v;
    if (auto v = c.get<std::size_t>(*f, "few_shot", "probe_budget", false)) {
      cfg.few_shot.probe_budget = *v;
    }
  }

  if (const json* b = c.section(doc, "", "backend", is_run)) {
    cfg.backend = read_backend(c, *b, "backend");
  }
  if (auto v = c.get<std::size_t>(doc, "", "workers", false)) {
    if (*v == 0) c.fail("workers", "must be at least 1");
    cfg.workers = *v;
  }
  cfg.templates_dir = c.file(doc, "", "templates_dir", false, true);

  cfg.split = read_split(c, doc, use == ConfigUse::split);
  cfg.prepare = read_prepare(c, doc, use == ConfigUse::prepare);
  cfg.mpnn = read_mpnn(c, doc, use == ConfigUse::mpnn);

  if (!c.problems().empty()) throw ValidationError(c.problems());
  cfg.digest = sha256_hex(doc.dump());
  return cfg;
}

ExperimentConfig validate_config(const fs::path& path, ConfigUse use,
                                 const ConfigOverrides& overrides) {
  if (!fs::exists(path)) throw ValidationError({"config file not found: " + path.string()});
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError({path.string() + ": " + e.what()});
  }
  auto cfg = config_from_json(doc, path.parent_path(), use, overrides);
  cfg.source = path;
  return cfg;
}

}  // namespace tagbench
