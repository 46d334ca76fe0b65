#include <algorithm>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tagbench/citation.hpp"
#include "tagbench/error.hpp"
#include "tagbench/io.hpp"
#include "tagbench/text.hpp"

namespace tagbench {

using nlohmann::json;

namespace {

PaperStub stub_from_json(const json& j) {
  PaperStub p;
  if (j.contains("id") && !j.at("id").is_null()) p.arxiv_id = j.at("id").get<std::string>();
  p.title = j.at("title").get<std::string>();
  p.year = j.value("year", 0);
  if (j.contains("refs")) p.raw_references = j.at("refs").get<std::vector<std::string>>();
  if (j.contains("label") && !j.at("label").is_null()) p.label = j.at("label").get<std::string>();
  return p;
}

}  // namespace

std::vector<PaperStub> read_corpus(const std::filesystem::path& path) {
  std::vector<PaperStub> out;
  for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (trim(line).empty()) return;
    try {
      out.push_back(stub_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path.string(), number, e.what());
    }
  });
  return out;
}

ScriptedResolver::ScriptedResolver(std::vector<PaperStub> corpus, std::size_t max_candidates)
    : corpus_(std::move(corpus)), max_candidates_(max_candidates) {
  for (std::size_t i = 0; i < corpus_.size(); ++i) {
    if (corpus_[i].arxiv_id) by_id_.emplace(*corpus_[i].arxiv_id, i);
  }
}

ScriptedResolver ScriptedResolver::from_file(const std::filesystem::path& path) {
  return ScriptedResolver(read_corpus(path));
}

std::optional<PaperStub> ScriptedResolver::lookup_by_id(const std::string& id) {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return corpus_[it->second];
}

std::vector<PaperStub> ScriptedResolver::search_by_title(const std::string& title) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < corpus_.size(); ++i) {
    scored.emplace_back(normalized_levenshtein(corpus_[i].title, title), i);
  }
  const std::size_t keep = std::min(max_candidates_, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end());
  std::vector<PaperStub> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(corpus_[scored[i].second]);
  return out;
}

HttpResolver::HttpResolver(HttpResolverConfig config) : config_(std::move(config)) {
  if (config_.base_url.rfind("http://", 0) != 0 && config_.base_url.rfind("https://", 0) != 0) {
    throw ConfigError("resolver base URL must start with http:// or https://");
  }
}

namespace {

std::string url_encode(std::string_view text) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

std::string substitute(std::string pattern, std::string_view tag, std::string_view value) {
  const auto pos = pattern.find(tag);
  if (pos != std::string::npos) pattern.replace(pos, tag.size(), url_encode(value));
  return pattern;
}

}  // namespace

std::string HttpResolver::get(const std::string& path, bool allow_not_found, bool* not_found) {
  httplib::Client client(config_.base_url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
  client.set_connection_timeout(secs);
  client.set_read_timeout(secs);
  auto result = client.Get(path);
  if (!result) throw TransportError("resolver request failed: " + httplib::to_string(result.error()));
  if (allow_not_found && result->status == 404) {
    *not_found = true;
    return {};
  }
  if (result->status == 429 || result->status >= 500) {
    throw TransportError("resolver returned HTTP " + std::to_string(result->status));
  }
  if (result->status != 200) throw EndpointError(result->status, result->body);
  return result->body;
}

std::optional<PaperStub> HttpResolver::lookup_by_id(const std::string& id) {
  bool not_found = false;
  const auto body = get(substitute(config_.id_path, "{id}", id), true, &not_found);
  if (not_found) return std::nullopt;
  try {
    return stub_from_json(json::parse(body));
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed resolver response: ") + e.what());
  }
}

std::vector<PaperStub> HttpResolver::search_by_title(const std::string& title) {
  bool not_found = false;
  const auto body = get(substitute(config_.search_path, "{query}", title), false, &not_found);
  try {
    std::vector<PaperStub> out;
    for (const auto& item : json::parse(body)) out.push_back(stub_from_json(item));
    return out;
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed resolver response: ") + e.what());
  }
}

RateLimitedResolver::RateLimitedResolver(std::shared_ptr<ReferenceResolver> inner,
                                         double requests_per_second, std::size_t burst,
                                         std::size_t max_concurrent)
    : inner_(std::move(inner)),
      rate_(requests_per_second),
      burst_(static_cast<double>(std::max<std::size_t>(burst, 1))),
      tokens_(burst_),
      last_(std::chrono::steady_clock::now()),
      concurrent_(std::max<std::size_t>(max_concurrent, 1)) {
  if (!(rate_ > 0)) throw ConfigError("requests per second must be positive");
}

void RateLimitedResolver::take_token() {
  std::unique_lock lock(mutex_);
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

std::optional<PaperStub> RateLimitedResolver::lookup_by_id(const std::string& id) {
  take_token();
  concurrent_.acquire();
  struct Release {
    CountingSemaphore& s;
    ~Release() { s.release(); }
  } release{concurrent_};
  return inner_->lookup_by_id(id);
}

std::vector<PaperStub> RateLimitedResolver::search_by_title(const std::string& title) {
  take_token();
  concurrent_.acquire();
  struct Release {
    CountingSemaphore& s;
    ~Release() { s.release(); }
  } release{concurrent_};
  return inner_->search_by_title(title);
}

}  // namespace tagbench
