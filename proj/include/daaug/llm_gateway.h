// Copyright 2026 The daaug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Provider-agnostic text completion with a record/replay cache.
//
// Every completion is identified by a cache key: the SHA-256 of the prompt
// texts, the generation parameters and an attempt index. The attempt index
// lets callers draw several distinct samples for one prompt and still
// replay each of them exactly.
//
//   live    call the provider, persist nothing
//   record  serve cached keys, call the provider otherwise and append the
//           response to the cache file
//   replay  serve cached keys only; a miss is an error and the provider is
//           never touched

#ifndef DAAUG_LLM_GATEWAY_H_
#define DAAUG_LLM_GATEWAY_H_

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace daaug {

struct GenerationParams {
  double temperature = 1.0;
  double top_p = 1.0;
  int max_output_length = 1024;
  std::string model_name;
};

struct Prompt {
  std::string system_text;
  std::string user_text;
  GenerationParams params;

  // Throws std::invalid_argument on an empty user text or bad parameters.
  void validate() const;
};

struct CompletionRecord {
  std::string cache_key;
  std::string response_text;
  nlohmann::json provider_meta;
};

std::string cache_key(const Prompt& prompt, int attempt);

class GatewayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CacheMissError : public GatewayError {
 public:
  explicit CacheMissError(const std::string& key)
      : GatewayError("replay cache miss for key " + key), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class BudgetExceededError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class ProviderError : public GatewayError {
 public:
  ProviderError(const std::string& what, bool retryable)
      : GatewayError(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

struct ProviderResponse {
  std::string text;
  nlohmann::json meta = nlohmann::json::object();
};

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  // Throws ProviderError; retryable errors are retried by the gateway.
  virtual ProviderResponse complete(const Prompt& prompt, int attempt) = 0;
};

// Minimal HTTP seam so tests can observe (or forbid) network traffic.
struct HttpResult {
  int status = 0;  // 0: transport failure
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResult post(const std::string& url, const std::string& body,
                          const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

std::shared_ptr<HttpTransport> make_default_http_transport(
    std::chrono::seconds timeout = std::chrono::seconds(120));

// Chat-completions style JSON API (`<endpoint>/chat/completions`).
class HttpCompletionProvider : public CompletionProvider {
 public:
  HttpCompletionProvider(std::string endpoint, std::string api_key,
                         std::shared_ptr<HttpTransport> transport);
  ProviderResponse complete(const Prompt& prompt, int attempt) override;

 private:
  std::string endpoint_;
  std::string api_key_;
  std::shared_ptr<HttpTransport> transport_;
};

// Append-only line-delimited cache of CompletionRecords. Reads may run
// concurrently; appends are serialized.
class CompletionCache {
 public:
  // In-memory only.
  CompletionCache() = default;
  // Loads `path` if it exists; appends go to the same file.
  explicit CompletionCache(std::filesystem::path path);

  std::optional<CompletionRecord> lookup(const std::string& key) const;
  // No-op when the key is already present.
  void append(const CompletionRecord& record);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, CompletionRecord> records_;
};

enum class LlmMode { kLive, kRecord, kReplay };

std::string_view llm_mode_name(LlmMode mode);
std::optional<LlmMode> parse_llm_mode(std::string_view name);

struct GatewayOptions {
  LlmMode mode = LlmMode::kReplay;
  // Maximum provider dispatches (retries included); negative = unlimited.
  long max_requests = -1;
  int parallelism = 4;
  int max_retries = 3;
  std::chrono::milliseconds base_backoff{200};
  std::chrono::milliseconds max_backoff{5000};
  // Injectable for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct CompletionResult {
  std::string text;
  std::string cache_key;
};

struct CompletionRequest {
  Prompt prompt;
  int attempt = 0;
};

struct BatchItem {
  CompletionResult result;
  std::exception_ptr error;  // set instead of result on failure
};

class LlmGateway {
 public:
  LlmGateway(GatewayOptions options, std::shared_ptr<CompletionProvider> provider,
             std::shared_ptr<CompletionCache> cache);

  CompletionResult complete(const Prompt& prompt, int attempt);

  // Runs up to `parallelism` requests at a time. Output order matches input
  // order regardless of completion order.
  std::vector<BatchItem> complete_batch(std::span<const CompletionRequest> requests);

  long requests_dispatched() const { return dispatched_.load(); }
  LlmMode mode() const { return options_.mode; }

 private:
  ProviderResponse dispatch_with_retry(const Prompt& prompt, int attempt);
  void reserve_budget();

  GatewayOptions options_;
  std::shared_ptr<CompletionProvider> provider_;
  std::shared_ptr<CompletionCache> cache_;
  std::atomic<long> dispatched_{0};
};

}  // namespace daaug

#endif  // DAAUG_LLM_GATEWAY_H_
