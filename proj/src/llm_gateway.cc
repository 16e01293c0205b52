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

#include "daaug/llm_gateway.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "daaug/util.h"

namespace daaug {

using nlohmann::json;

void Prompt::validate() const {
  if (user_text.empty()) throw std::invalid_argument("prompt user text is empty");
  if (!(params.temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (!(params.top_p > 0.0 && params.top_p <= 1.0)) {
    throw std::invalid_argument("top_p must lie in (0, 1]");
  }
  if (params.max_output_length <= 0) throw std::invalid_argument("max_output_length must be positive");
}

std::string cache_key(const Prompt& prompt, int attempt) {
  // Doubles are rendered with round-trip precision by the JSON writer.
  json j = {{"system", prompt.system_text},
            {"user", prompt.user_text},
            {"temperature", prompt.params.temperature},
            {"top_p", prompt.params.top_p},
            {"max_output_length", prompt.params.max_output_length},
            {"model", prompt.params.model_name},
            {"attempt", attempt}};
  return sha256_hex(j.dump());
}

std::string_view llm_mode_name(LlmMode mode) {
  switch (mode) {
    case LlmMode::kLive: return "live";
    case LlmMode::kRecord: return "record";
    case LlmMode::kReplay: return "replay";
  }
  return "replay";
}

std::optional<LlmMode> parse_llm_mode(std::string_view name) {
  if (name == "live") return LlmMode::kLive;
  if (name == "record") return LlmMode::kRecord;
  if (name == "replay") return LlmMode::kReplay;
  return std::nullopt;
}

HttpCompletionProvider::HttpCompletionProvider(std::string endpoint, std::string api_key,
                                               std::shared_ptr<HttpTransport> transport)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)),
      transport_(std::move(transport)) {
  if (!transport_) throw std::invalid_argument("http provider needs a transport");
}

ProviderResponse HttpCompletionProvider::complete(const Prompt& prompt, int /*attempt*/) {
  json messages = json::array();
  if (!prompt.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", prompt.system_text}});
  }
  messages.push_back({{"role", "user"}, {"content", prompt.user_text}});
  json body = {{"model", prompt.params.model_name},
               {"messages", std::move(messages)},
               {"temperature", prompt.params.temperature},
               {"top_p", prompt.params.top_p},
               {"max_tokens", prompt.params.max_output_length}};
  std::vector<std::pair<std::string, std::string>> headers = {
      {"Content-Type", "application/json"}};
  if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);

  std::string url = endpoint_;
  if (!url.empty() && url.back() == '/') url.pop_back();
  HttpResult res = transport_->post(url + "/chat/completions", body.dump(), headers);
  if (res.status == 0) throw ProviderError("transport failure: " + res.body, true);
  if (res.status == 429 || res.status >= 500) {
    throw ProviderError("provider returned HTTP " + std::to_string(res.status), true);
  }
  if (res.status != 200) {
    throw ProviderError("provider returned HTTP " + std::to_string(res.status) + ": " + res.body,
                        false);
  }
  try {
    json reply = json::parse(res.body);
    ProviderResponse out;
    out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    out.meta = {{"model", reply.value("model", prompt.params.model_name)}};
    if (reply.contains("usage")) out.meta["usage"] = reply["usage"];
    return out;
  } catch (const json::exception& e) {
    throw ProviderError(std::string("malformed provider response: ") + e.what(), false);
  }
}

CompletionCache::CompletionCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      CompletionRecord r{j.at("cache_key").get<std::string>(),
                         j.at("response_text").get<std::string>(),
                         j.value("provider_meta", json::object())};
      records_.emplace(r.cache_key, std::move(r));
    } catch (const json::exception& e) {
      throw GatewayError("cache " + path_.string() + " line " + std::to_string(line_no) +
                         ": " + e.what());
    }
  }
}

std::optional<CompletionRecord> CompletionCache::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void CompletionCache::append(const CompletionRecord& record) {
  std::unique_lock lock(mu_);
  if (records_.count(record.cache_key)) return;
  if (!path_.empty()) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    if (!out) throw GatewayError("cannot append to cache " + path_.string());
    out << json{{"cache_key", record.cache_key},
                {"response_text", record.response_text},
                {"provider_meta", record.provider_meta}}
               .dump()
        << '\n';
  }
  records_.emplace(record.cache_key, record);
}

std::size_t CompletionCache::size() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

LlmGateway::LlmGateway(GatewayOptions options, std::shared_ptr<CompletionProvider> provider,
                       std::shared_ptr<CompletionCache> cache)
    : options_(std::move(options)), provider_(std::move(provider)), cache_(std::move(cache)) {
  if (!cache_) cache_ = std::make_shared<CompletionCache>();
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  if (options_.parallelism < 1) options_.parallelism = 1;
  if (options_.mode != LlmMode::kReplay && !provider_) {
    throw GatewayError("live/record mode requires a provider");
  }
}

void LlmGateway::reserve_budget() {
  if (options_.max_requests < 0) {
    dispatched_.fetch_add(1);
    return;
  }
  long cur = dispatched_.load();
  do {
    if (cur >= options_.max_requests) {
      throw BudgetExceededError("request budget of " + std::to_string(options_.max_requests) +
                                " exhausted");
    }
  } while (!dispatched_.compare_exchange_weak(cur, cur + 1));
}

ProviderResponse LlmGateway::dispatch_with_retry(const Prompt& prompt, int attempt) {
  for (int retry = 0;; ++retry) {
    reserve_budget();
    try {
      return provider_->complete(prompt, attempt);
    } catch (const ProviderError& e) {
      if (!e.retryable() || retry >= options_.max_retries) throw;
    }
    auto backoff = options_.base_backoff * (1LL << std::min(retry, 20));
    options_.sleep(std::min<std::chrono::milliseconds>(backoff, options_.max_backoff));
  }
}

CompletionResult LlmGateway::complete(const Prompt& prompt, int attempt) {
  prompt.validate();
  std::string key = cache_key(prompt, attempt);
  if (options_.mode != LlmMode::kLive) {
    if (auto hit = cache_->lookup(key)) return {hit->response_text, key};
    if (options_.mode == LlmMode::kReplay) throw CacheMissError(key);
  }
  ProviderResponse resp = dispatch_with_retry(prompt, attempt);
  if (options_.mode == LlmMode::kRecord) {
    cache_->append({key, resp.text, resp.meta});
  }
  return {std::move(resp.text), std::move(key)};
}

std::vector<BatchItem> LlmGateway::complete_batch(std::span<const CompletionRequest> requests) {
  std::vector<BatchItem> out(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= requests.size()) return;
      try {
        out[i].result = complete(requests[i].prompt, requests[i].attempt);
      } catch (...) {
        out[i].error = std::current_exception();
      }
    }
  };
  std::size_t workers = std::min<std::size_t>(options_.parallelism, requests.size());
  if (workers <= 1) {
    worker();
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();  // joins
  return out;
}

}  // namespace daaug
