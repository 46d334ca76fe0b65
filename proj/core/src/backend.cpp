#include "tagbench/backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tagbench/error.hpp"

namespace tagbench {

using nlohmann::json;

std::string_view to_string(ResponseOrigin origin) {
  switch (origin) {
    case ResponseOrigin::live:
      return "live";
    case ResponseOrigin::cache:
      return "cache";
    case ResponseOrigin::oracle:
      break;
  }
  return "oracle";
}

void CountingSemaphore::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return count_ > 0; });
  --count_;
}

void CountingSemaphore::release() {
  {
    std::lock_guard lock(mutex_);
    ++count_;
  }
  cv_.notify_one();
}

namespace {

struct SemaphoreGuard {
  CountingSemaphore& sem;
  explicit SemaphoreGuard(CountingSemaphore& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
};

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

RemoteChatBackend::RemoteChatBackend(RemoteConfig config)
    : config_(std::move(config)), in_flight_(config_.max_in_flight == 0 ? 1 : config_.max_in_flight) {
  const auto& url = config_.endpoint;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an http(s) URL: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported scheme in " + url);
  auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (scheme_host_port_.size() <= scheme_end + 3) throw ConfigError("endpoint has no host: " + url);

  if (config_.credential_env.empty()) throw ConfigError("credential_env must name a variable");
  const char* token = std::getenv(config_.credential_env.c_str());
  if (!token || !*token) {
    throw ConfigError("credential variable " + config_.credential_env + " is not set");
  }
  credential_ = token;
  if (config_.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
}

RemoteChatBackend::~RemoteChatBackend() = default;

std::string RemoteChatBackend::exchange(const PredictorRequest& request,
                                        const std::string& user_text) {
  json messages = json::array();
  if (!request.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_text}});
  }
  messages.push_back({{"role", "user"}, {"content", user_text}});
  const json body = {
      {"model", request.model_tag.empty() ? config_.model_tag : request.model_tag},
      {"messages", messages},
      {"temperature", request.decoding.temperature},
      {"max_tokens", request.decoding.max_output_tokens}};
  const std::string payload = body.dump(-1, ' ', false, json::error_handler_t::replace);

  auto delay = config_.retry.base_delay;
  std::string last_failure;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(delay);
      delay = std::min(config_.retry.max_delay,
                       std::chrono::milliseconds(static_cast<std::int64_t>(
                           static_cast<double>(delay.count()) * config_.retry.multiplier)));
    }
    httplib::Client client(scheme_host_port_);
    const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    client.set_connection_timeout(timeout_s.count(), 0);
    client.set_read_timeout(timeout_s.count(), 0);
    client.set_write_timeout(timeout_s.count(), 0);
    client.set_bearer_token_auth(credential_);

    ++http_calls_;
    auto result = client.Post(path_, payload, "application/json");
    if (!result) {
      last_failure = "transport failure: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status == 200) {
      try {
        json reply = json::parse(result->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw EndpointError(result->status, std::string("malformed completion: ") + e.what());
      }
    }
    if (!transient_status(result->status)) throw EndpointError(result->status, result->body);
    last_failure = "status " + std::to_string(result->status);
  }
  throw TransportError("gave up after " + std::to_string(config_.retry.max_attempts) +
                       " attempts (" + last_failure + ")");
}

RawResponse RemoteChatBackend::complete(const PredictorRequest& request) {
  if (request.user_texts.empty()) throw ArgumentError("request has no user text");
  SemaphoreGuard guard(in_flight_);
  const auto start = std::chrono::steady_clock::now();
  std::string text;
  for (const auto& stage : request.user_texts) text = exchange(request, stage);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  return {std::move(text), ResponseOrigin::live,
          std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count()};
}

RawResponse CachedPredictor::complete(const PredictorRequest& request) {
  const std::string key = TranscriptCache::key_for(request);
  if (auto hit = cache_->lookup(key)) {
    ++hits_;
    return {std::move(*hit), ResponseOrigin::cache, std::nullopt};
  }
  ++misses_;
  RawResponse response = inner_->complete(request);
  cache_->store(key, TranscriptCache::digest_for(request), response.text);
  if (auto stored = cache_->lookup(key)) response.text = std::move(*stored);
  return response;
}

}  // namespace tagbench
