#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "hh/advisor.hpp"

namespace hh {

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix + /chat/completions
};

Endpoint split_url(const std::string& base_url) {
  const auto scheme = base_url.find("://");
  if (scheme == std::string::npos) {
    throw Error(Errc::ConfigError, "advisor URL needs a scheme: " + base_url);
  }
  const auto slash = base_url.find('/', scheme + 3);
  Endpoint e;
  e.origin = base_url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : base_url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  e.path = prefix + "/chat/completions";
  return e;
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

LiveAdvisorConfig LiveAdvisorConfig::from_env() {
  LiveAdvisorConfig c;
  c.base_url = env_or_empty("HH_ADVISOR_URL");
  c.api_key = env_or_empty("HH_ADVISOR_KEY");
  c.model = env_or_empty("HH_ADVISOR_MODEL");
  return c;
}

LiveAdvisor::LiveAdvisor(LiveAdvisorConfig config) : config_(std::move(config)) {}

long LiveAdvisor::calls_made() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::string LiveAdvisor::complete(const AdvisorRequest& request) {
  {
    std::lock_guard lock(mutex_);
    if (config_.call_budget && calls_ + reserved_ >= *config_.call_budget) {
      throw Error(Errc::BudgetExhausted, "advisor call budget of " +
                                             std::to_string(*config_.call_budget) +
                                             " used up");
    }
    ++reserved_;
  }
  struct Release {
    LiveAdvisor* self;
    bool success = false;
    ~Release() {
      std::lock_guard lock(self->mutex_);
      --self->reserved_;
      if (success) ++self->calls_;
    }
  } release{this};

  if (config_.base_url.empty()) {
    throw Error(Errc::AdvisorUnavailable, "HH_ADVISOR_URL is not set");
  }
  const Endpoint endpoint = split_url(config_.base_url);
  nlohmann::json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::json::array(
      {{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.decoding.temperature;
  body["top_p"] = request.decoding.top_p;
  body["max_tokens"] = request.decoding.max_tokens;
  const std::string payload = body.dump();

  httplib::Client client(endpoint.origin);
  const auto seconds = config_.timeout.count() / 1000;
  const auto micros = (config_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  auto backoff = config_.backoff;
  Errc last_code = Errc::HttpError;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(endpoint.path, headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      last_code = err == httplib::Error::Read || err == httplib::Error::Write ||
                          err == httplib::Error::ConnectionTimeout
                      ? Errc::Timeout
                      : Errc::HttpError;
      last_error = httplib::to_string(err);
      continue;
    }
    if (res->status == 200) {
      const auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
        throw Error(Errc::HttpError, "unexpected chat completion body");
      }
      const auto& message = j["choices"][0]["message"];
      release.success = true;
      return message.value("content", "");
    }
    last_code = Errc::HttpError;
    last_error = "status " + std::to_string(res->status);
    if (!retryable(res->status)) break;
  }
  throw Error(last_code, "chat completion failed: " + last_error);
}

}  // namespace hh
