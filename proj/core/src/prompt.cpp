#include "tagbench/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "tagbench/answer.hpp"
#include "tagbench/error.hpp"
#include "tagbench/io.hpp"
#include "tagbench/resources.hpp"
#include "tagbench/rng.hpp"

namespace tagbench {

using nlohmann::json;

namespace {

struct KindName {
  StyleKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {StyleKind::zero_shot, "zero_shot"},
    {StyleKind::zero_shot_cot, "zero_shot_cot"},
    {StyleKind::few_shot, "few_shot"},
    {StyleKind::khop_title, "khop_title"},
    {StyleKind::khop_title_label, "khop_title_label"},
    {StyleKind::khop_attention, "khop_attention"},
    {StyleKind::linearized_khop_title, "linearized_khop_title"},
    {StyleKind::linearized_khop_title_label, "linearized_khop_title_label"},
    {StyleKind::linearized_khop_attention, "linearized_khop_attention"},
};

}  // namespace

std::string_view to_string(StyleKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

StyleKind parse_style_kind(std::string_view text) {
  for (const auto& k : kKindNames) {
    if (k.name == text) return k.kind;
  }
  throw ArgumentError("unknown prompt style '" + std::string(text) + "'");
}

bool PromptStyle::uses_neighbors() const {
  return kind != StyleKind::zero_shot && kind != StyleKind::zero_shot_cot &&
         kind != StyleKind::few_shot;
}

bool PromptStyle::is_attention() const {
  return kind == StyleKind::khop_attention || kind == StyleKind::linearized_khop_attention;
}

bool PromptStyle::is_linearized() const {
  return kind == StyleKind::linearized_khop_title ||
         kind == StyleKind::linearized_khop_title_label ||
         kind == StyleKind::linearized_khop_attention;
}

bool PromptStyle::shows_labels() const {
  return kind == StyleKind::khop_title_label || kind == StyleKind::linearized_khop_title_label;
}

void PromptStyle::validate() const {
  if (!uses_neighbors()) return;
  if (hops != 1 && hops != 2) throw ArgumentError("hops must be 1 or 2");
  if (is_attention()) {
    if (hops != 1) throw ArgumentError("attention styles are 1-hop only");
    if (attention_k < 1) throw ArgumentError("attention_k must be at least 1");
  }
}

std::string PromptStyle::key() const {
  std::string out(to_string(kind));
  if (is_attention()) return out + "@k" + std::to_string(attention_k);
  if (uses_neighbors()) return out + "@" + std::to_string(hops);
  return out;
}

PromptStyle PromptStyle::parse(std::string_view key) {
  PromptStyle s;
  auto at = key.find('@');
  s.kind = parse_style_kind(key.substr(0, at));
  if (at != std::string_view::npos) {
    auto rest = std::string(key.substr(at + 1));
    try {
      if (!rest.empty() && rest.front() == 'k') {
        s.attention_k = std::stoi(rest.substr(1));
      } else {
        s.hops = std::stoi(rest);
      }
    } catch (const std::exception&) {
      throw ArgumentError("malformed style key '" + std::string(key) + "'");
    }
  }
  s.validate();
  return s;
}

std::string_view to_string(TextContext context) {
  return context == TextContext::rich ? "rich" : "scarce";
}

TextContext parse_context(std::string_view text) {
  if (text == "rich") return TextContext::rich;
  if (text == "scarce") return TextContext::scarce;
  throw ArgumentError("context must be 'rich' or 'scarce'");
}

std::string_view to_string(NeighborRender render) {
  switch (render) {
    case NeighborRender::title_and_label:
      return "title_and_label";
    case NeighborRender::title_only:
      return "title_only";
    case NeighborRender::label_only:
      break;
  }
  return "label_only";
}

NeighborRender parse_neighbor_render(std::string_view text) {
  if (text == "title_and_label") return NeighborRender::title_and_label;
  if (text == "title_only") return NeighborRender::title_only;
  if (text == "label_only") return NeighborRender::label_only;
  throw ArgumentError("unknown neighbor render '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = [] {
    TemplateSet s;
    for (auto name : embedded_resource_names()) {
      constexpr std::string_view prefix = "templates/";
      constexpr std::string_view suffix = ".txt";
      if (!name.starts_with(prefix) || !name.ends_with(suffix)) continue;
      std::string stem(name.substr(prefix.size(), name.size() - prefix.size() - suffix.size()));
      s.templates_.emplace(stem, TextTemplate::compile(*embedded_resource(name), stem));
    }
    return s;
  }();
  return set;
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
  TemplateSet s = builtin();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    const auto stem = entry.path().stem().string();
    s.templates_.insert_or_assign(stem, TextTemplate::compile(read_file(entry.path()), stem));
  }
  return s;
}

const TextTemplate& TemplateSet::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw LookupError("no template named '" + std::string(name) + "'");
  return it->second;
}

// ---------------------------------------------------------------------------

namespace {

const TemplateSet& templates_of(const RenderOptions& options) {
  return options.templates ? *options.templates : TemplateSet::builtin();
}

bool label_visible(const NodeRecord& n) {
  return n.label && (n.split == Split::train || n.split == Split::validation);
}

std::string label_name(const NodeRecord& n, const DatasetProfile& profile) {
  if (*n.label >= profile.label_vocab.size()) {
    throw ArgumentError("label of '" + n.id + "' is outside the profile vocabulary");
  }
  return profile.label_vocab[*n.label];
}

json target_context(const EgoGraph& ego, TextContext context) {
  const bool rich = context == TextContext::rich;
  if (rich && !ego.target.body) {
    throw ArgumentError("rich context needs a body for target '" + ego.target.id + "'");
  }
  return {{"rich", rich},
          {"abstract", rich ? *ego.target.body : std::string()},
          {"title", ego.target.title}};
}

// Hop sections for graph-structured and linearized khop styles. Papers are
// numbered hop-1 first; linkage lists the numbers of rendered papers sharing
// an intra edge (either direction), excluding the target.
json hop_sections(const EgoGraph& ego, int hops, bool with_labels, const DatasetProfile& profile) {
  std::vector<const NodeRecord*> rendered;
  std::vector<int> hop_of;
  for (const auto& n : ego.hop1) {
    rendered.push_back(&n);
    hop_of.push_back(1);
  }
  if (hops >= 2) {
    for (const auto& n : ego.hop2) {
      rendered.push_back(&n);
      hop_of.push_back(2);
    }
  }
  std::unordered_map<std::string, std::size_t> number;
  for (std::size_t i = 0; i < rendered.size(); ++i) number.emplace(rendered[i]->id, i + 1);

  std::vector<std::set<std::size_t>> links(rendered.size());
  for (const auto& e : ego.intra_edges) {
    auto s = number.find(e.source);
    auto t = number.find(e.target);
    if (s == number.end() || t == number.end()) continue;
    links[s->second - 1].insert(t->second);
    links[t->second - 1].insert(s->second);
  }

  json sections = json::array();
  for (int hop = 1; hop <= hops; ++hop) {
    json papers = json::array();
    for (std::size_t i = 0; i < rendered.size(); ++i) {
      if (hop_of[i] != hop) continue;
      const auto& n = *rendered[i];
      std::string link_text;
      for (auto m : links[i]) {
        if (!link_text.empty()) link_text += ", ";
        link_text += std::to_string(m);
      }
      papers.push_back({{"number", i + 1},
                        {"title", n.title},
                        {"label", with_labels && label_visible(n) ? json(label_name(n, profile))
                                                                 : json(false)},
                        {"links", link_text.empty() ? json(false) : json(link_text)}});
    }
    if (!papers.empty()) sections.push_back({{"hop", hop}, {"papers", papers}});
  }
  return sections;
}

std::optional<double> homophily_over(const NodeRecord& target,
                                     const std::vector<const NodeRecord*>& included) {
  if (!target.label) return std::nullopt;
  std::size_t labeled = 0, same = 0;
  for (const auto* n : included) {
    if (!n->label) continue;
    ++labeled;
    if (*n->label == *target.label) ++same;
  }
  if (labeled == 0) return std::nullopt;
  return static_cast<double>(same) / static_cast<double>(labeled);
}

void check_selection(const EgoGraph& ego, std::span<const std::size_t> selected) {
  for (auto i : selected) {
    if (i >= ego.hop1.size()) {
      throw ArgumentError("attention index " + std::to_string(i) + " out of range for " +
                          std::to_string(ego.hop1.size()) + " neighbors");
    }
  }
}

}  // namespace

std::string render_attention_stage1(const EgoGraph& ego, int attention_k,
                                    const RenderOptions& options) {
  json candidates = json::array();
  for (std::size_t i = 0; i < ego.hop1.size(); ++i) {
    candidates.push_back({{"number", i + 1}, {"title", ego.hop1[i].title}});
  }
  json ctx = {{"title", ego.target.title}, {"k", attention_k}, {"candidates", candidates}};
  return templates_of(options).get("khop_attention_extract").render(ctx);
}

std::string render_attention_stage2(const EgoGraph& ego,
                                    std::span<const std::size_t> selected_hop1_indices,
                                    const DatasetProfile& /*profile*/, TextContext context,
                                    bool linearized, const RenderOptions& options) {
  check_selection(ego, selected_hop1_indices);
  json ctx = target_context(ego, context);
  json selected = json::array();
  std::size_t rank = 0;
  for (auto i : selected_hop1_indices) {
    selected.push_back({{"rank", ++rank}, {"title", ego.hop1[i].title}});
  }
  ctx["selected"] = selected;
  const char* name = linearized ? "linearized_khop_attention_predict" : "khop_attention_predict";
  return templates_of(options).get(name).render(ctx);
}

PromptBundle render_prompt(const EgoGraph& ego, const PromptStyle& style,
                           const DatasetProfile& profile, TextContext context,
                           std::span<const FewShotExemplar> exemplars,
                           const RenderOptions& options) {
  style.validate();
  const auto& templates = templates_of(options);

  PromptBundle bundle;
  bundle.system_text = render_system_prompt(profile);
  bundle.style = style;
  bundle.context = context;
  bundle.target_id = ego.target.id;
  bundle.suppress_reasoning = style.kind != StyleKind::zero_shot_cot;

  std::vector<const NodeRecord*> included;
  json ctx = target_context(ego, context);

  switch (style.kind) {
    case StyleKind::zero_shot:
    case StyleKind::zero_shot_cot:
      bundle.stages.push_back(templates.get(to_string(style.kind)).render(ctx));
      break;
    case StyleKind::few_shot: {
      if (exemplars.empty()) throw ArgumentError("few_shot style needs exemplars");
      json items = json::array();
      for (const auto& ex : exemplars) {
        if (context == TextContext::rich && !ex.abstract) {
          throw ArgumentError("rich context needs an abstract for exemplar '" + ex.node_id + "'");
        }
        items.push_back({{"title", ex.title},
                         {"abstract", ex.abstract.value_or("")},
                         {"label", ex.label}});
      }
      ctx["exemplars"] = items;
      bundle.stages.push_back(templates.get("few_shot").render(ctx));
      break;
    }
    case StyleKind::khop_title:
    case StyleKind::khop_title_label:
    case StyleKind::linearized_khop_title:
    case StyleKind::linearized_khop_title_label: {
      std::string name(to_string(style.kind));
      bool with_labels = style.shows_labels();
      if (options.neighbor_render && !style.is_linearized()) {
        switch (*options.neighbor_render) {
          case NeighborRender::title_and_label:
            name = "khop_title_label";
            with_labels = true;
            break;
          case NeighborRender::title_only:
            name = "khop_title";
            with_labels = false;
            break;
          case NeighborRender::label_only:
            name = "khop_label";
            with_labels = true;
            break;
        }
      }
      ctx["hops"] = hop_sections(ego, style.hops, with_labels, profile);
      bundle.stages.push_back(templates.get(name).render(ctx));
      bundle.included_neighbor_ids.push_back(ego.hop1_ids());
      for (const auto& n : ego.hop1) included.push_back(&n);
      if (style.hops >= 2) {
        bundle.included_neighbor_ids.push_back(ego.hop2_ids());
        for (const auto& n : ego.hop2) included.push_back(&n);
      }
      break;
    }
    case StyleKind::khop_attention:
    case StyleKind::linearized_khop_attention: {
      const auto selection = default_attention_selection(ego.hop1.size(),
                                                         static_cast<std::size_t>(style.attention_k));
      bundle.stages.push_back(render_attention_stage1(ego, style.attention_k, options));
      bundle.stages.push_back(render_attention_stage2(ego, selection, profile, context,
                                                      style.is_linearized(), options));
      std::vector<std::string> ids;
      for (auto i : selection) {
        ids.push_back(ego.hop1[i].id);
        included.push_back(&ego.hop1[i]);
      }
      bundle.included_neighbor_ids.push_back(std::move(ids));
      break;
    }
  }
  bundle.homophily = homophily_over(ego.target, included);
  return bundle;
}

std::vector<std::size_t> parse_ranked_list(std::string_view raw, std::size_t n_neighbors,
                                           std::size_t k) {
  if (k == 0) throw ArgumentError("k must be at least 1");
  std::size_t search_from = 0;
  while (true) {
    const auto open = raw.find('[', search_from);
    if (open == std::string_view::npos) break;
    const auto close = raw.find(']', open + 1);
    if (close == std::string_view::npos) break;
    search_from = open + 1;

    const std::string_view body = raw.substr(open + 1, close - open - 1);
    std::vector<long long> values;
    bool valid = true;
    std::size_t i = 0;
    while (i < body.size() && valid) {
      while (i < body.size() && (body[i] == ' ' || body[i] == ',' || body[i] == '\t' ||
                                 body[i] == '\n' || body[i] == '\r')) {
        ++i;
      }
      if (i >= body.size()) break;
      std::size_t start = i;
      if (body[i] == '-' || body[i] == '+') ++i;
      std::size_t digits = i;
      while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) ++i;
      if (i == digits || i - digits > 18) {
        valid = false;
        break;
      }
      if (i < body.size() && body[i] != ' ' && body[i] != ',' && body[i] != '\t' &&
          body[i] != '\n' && body[i] != '\r') {
        valid = false;
        break;
      }
      values.push_back(std::stoll(std::string(body.substr(start, i - start))));
    }
    if (!valid) continue;

    std::vector<std::size_t> out;
    std::unordered_set<std::size_t> seen;
    for (auto v : values) {
      if (v < 1 || static_cast<unsigned long long>(v) > n_neighbors) continue;
      auto index = static_cast<std::size_t>(v - 1);
      if (!seen.insert(index).second) continue;
      out.push_back(index);
      if (out.size() == k) break;
    }
    return out;
  }
  throw UnparsableRankingError("no bracketed integer list in response");
}

std::vector<std::size_t> default_attention_selection(std::size_t n_neighbors, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(n_neighbors, k); ++i) out.push_back(i);
  return out;
}

std::vector<FewShotExemplar> build_few_shot_exemplars(const TextAttributedGraph& graph,
                                                      const DatasetProfile& profile,
                                                      Predictor& backend,
                                                      const FewShotOptions& options) {
  if (options.n == 0) throw ArgumentError("few-shot n must be at least 1");
  std::vector<std::string> train;
  for (const auto& n : graph.nodes()) {
    if (n.split == Split::train && n.label) {
      if (options.context == TextContext::rich && !n.body) continue;
      train.push_back(n.id);
    }
  }
  if (train.empty()) throw ArgumentError("training split is empty");
  std::sort(train.begin(), train.end());
  Rng rng(derive_seed(options.seed, "few-shot"));
  rng.shuffle(train);

  const std::string system_text = render_system_prompt(profile);
  const PromptStyle zero_shot{StyleKind::zero_shot};
  std::vector<FewShotExemplar> out;
  std::size_t probes = 0;
  for (const auto& id : train) {
    if (out.size() == options.n || probes == options.probe_budget) break;
    ++probes;
    EgoGraph ego;
    ego.target = graph.node(id);
    ego.caps = {0, 0};
    PromptBundle bundle = render_prompt(ego, zero_shot, profile, options.context);
    PredictorRequest request{system_text, bundle.stages, options.decoding, options.model_tag,
                             RequestPurpose::classify, &ego};
    RawResponse response = backend.complete(request);
    ParsedLabel parsed = parse_answer(response.text, profile);
    if (!parsed.ok() || *parsed.label != *ego.target.label) continue;
    out.push_back({id, ego.target.title,
                   options.context == TextContext::rich ? ego.target.body : std::nullopt,
                   profile.label_vocab.at(*ego.target.label)});
  }
  if (out.size() < options.n) {
    throw ExemplarShortageError("found " + std::to_string(out.size()) + " of " +
                                std::to_string(options.n) + " correct exemplars within " +
                                std::to_string(probes) + " probes");
  }
  return out;
}

}  // namespace tagbench
