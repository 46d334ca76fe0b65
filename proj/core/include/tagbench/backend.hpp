#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <string>
#include <string_view>
#include <vector>

#include "tagbench/ego.hpp"

namespace tagbench {

struct DecodingParams {
  double temperature = 0.0;
  int max_output_tokens = 500;
};

enum class RequestPurpose { classify, rank };

struct PredictorRequest {
  std::string system_text;
  std::vector<std::string> user_texts;  // one HTTP exchange per stage, in order
  DecodingParams decoding;
  std::string model_tag;
  RequestPurpose purpose = RequestPurpose::classify;
  // Structured context for oracle backends; remote backends ignore it.
  const EgoGraph* ego = nullptr;
};

enum class ResponseOrigin { live, cache, oracle };
std::string_view to_string(ResponseOrigin origin);

struct RawResponse {
  std::string text;
  ResponseOrigin origin = ResponseOrigin::live;
  std::optional<std::int64_t> latency_ms;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  // Must be safe to call from several threads at once.
  virtual RawResponse complete(const PredictorRequest& request) = 0;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{30'000};
};

struct RemoteConfig {
  // http(s)://host[:port]/path of a chat-completions endpoint.
  std::string endpoint;
  // Environment variable holding the bearer token.
  std::string credential_env = "OPENAI_API_KEY";
  std::string model_tag;
  RetryPolicy retry;
  std::chrono::milliseconds timeout{60'000};
  std::size_t max_in_flight = 4;
};

class CountingSemaphore {
 public:
  explicit CountingSemaphore(std::size_t count) : count_(count) {}
  void acquire();
  void release();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t count_;
};

// POSTs {"model", "messages", "temperature", "max_tokens"} per stage and
// returns the final stage's assistant text. Connection failures, 429 and 5xx
// are retried with exponential backoff; other statuses raise EndpointError.
class RemoteChatBackend : public Predictor {
 public:
  // Throws ConfigError when the endpoint is malformed or the credential
  // variable is unset.
  explicit RemoteChatBackend(RemoteConfig config);
  ~RemoteChatBackend() override;

  RawResponse complete(const PredictorRequest& request) override;

  std::size_t http_calls() const { return http_calls_.load(); }

 private:
  std::string exchange(const PredictorRequest& request, const std::string& user_text);

  RemoteConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string credential_;
  CountingSemaphore in_flight_;
  std::atomic<std::size_t> http_calls_{0};
};

// Append-only JSONL transcript store:
//   {"key": hex, "request_digest": hex, "response": str, "ts": iso8601}
// Writes are serialized; a torn final line from a crash is ignored on load.
class TranscriptCache {
 public:
  explicit TranscriptCache(std::string path);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& request_digest,
             const std::string& response);
  std::size_t size() const;
  std::size_t skipped_lines() const { return skipped_lines_; }

  // sha256 over (model_tag, decoding, system_text, user_texts).
  static std::string key_for(const PredictorRequest& request);
  // sha256 over the prompt texts alone.
  static std::string digest_for(const PredictorRequest& request);

 private:
  std::string path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::size_t skipped_lines_ = 0;
};

class CachedPredictor : public Predictor {
 public:
  CachedPredictor(std::shared_ptr<Predictor> inner, std::shared_ptr<TranscriptCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  RawResponse complete(const PredictorRequest& request) override;

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }

 private:
  std::shared_ptr<Predictor> inner_;
  std::shared_ptr<TranscriptCache> cache_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

}  // namespace tagbench
