#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tagbench/backend.hpp"
#include "tagbench/error.hpp"
#include "tagbench/io.hpp"

namespace tagbench {

using nlohmann::json;

TranscriptCache::TranscriptCache(std::string path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  for_each_line(path_, [&](std::string_view line, std::size_t) {
    if (line.empty()) return;
    try {
      json j = json::parse(line);
      entries_.insert_or_assign(j.at("key").get<std::string>(), j.at("response").get<std::string>());
    } catch (const json::exception&) {
      ++skipped_lines_;
    }
  });
}

std::optional<std::string> TranscriptCache::lookup(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranscriptCache::store(const std::string& key, const std::string& request_digest,
                            const std::string& response) {
  std::lock_guard lock(mutex_);
  if (entries_.count(key)) return;
  const json line = {{"key", key},
                     {"request_digest", request_digest},
                     {"response", response},
                     {"ts", iso8601_now()}};
  const auto parent = std::filesystem::path(path_).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot append to cache " + path_);
  const std::string text = line.dump(-1, ' ', false, json::error_handler_t::replace);
  out << text << '\n';
  out.flush();
  // Keep memory identical to what a reload will see (invalid UTF-8 is replaced on disk).
  entries_.emplace(key, json::parse(text).at("response").get<std::string>());
}

std::size_t TranscriptCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string TranscriptCache::key_for(const PredictorRequest& r) {
  const json j = {r.model_tag, r.decoding.temperature, r.decoding.max_output_tokens,
                  r.system_text, r.user_texts};
  return sha256_hex(j.dump(-1, ' ', false, json::error_handler_t::replace));
}

std::string TranscriptCache::digest_for(const PredictorRequest& r) {
  const json j = {r.system_text, r.user_texts};
  return sha256_hex(j.dump(-1, ' ', false, json::error_handler_t::replace));
}

}  // namespace tagbench
