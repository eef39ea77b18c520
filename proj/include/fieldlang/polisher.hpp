#pragma once

// Optional rewrite of template answers by an external text service. The
// service may rephrase but never change numbers: any numeral of the draft
// missing from the rewrite makes polish() fall back to the draft.
//
// Wire contract: POST <endpoint> with {"draft": str, "report": AnalysisReport}
// and a JSON reply {"text": str}.

#include <chrono>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "fieldlang/features.hpp"
#include "httplib.h"

namespace fieldlang {

class PolisherClient {
 public:
  virtual ~PolisherClient() = default;
  /// Returns the rewritten text, or nullopt (with `error` set) on failure.
  virtual std::optional<std::string> rewrite(const std::string& draft, const json& report, std::string& error) = 0;
};

struct HttpPolisherConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080/polish
  std::chrono::milliseconds timeout{5000};
  int retries = 1;
};

class HttpPolisherClient final : public PolisherClient {
 public:
  explicit HttpPolisherClient(HttpPolisherConfig cfg) : cfg_(std::move(cfg)) {}

  std::optional<std::string> rewrite(const std::string& draft, const json& report, std::string& error) override {
    const auto split = split_endpoint(cfg_.endpoint);
    if (!split) {
      error = "malformed polisher endpoint '" + cfg_.endpoint + "'";
      return std::nullopt;
    }
    const std::string body = json{{"draft", draft}, {"report", report}}.dump();
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
      httplib::Client client(split->first);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());
      auto res = client.Post(split->second, body, "application/json");
      if (!res) {
        error = "polisher request failed: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        error = "polisher returned HTTP " + std::to_string(res->status);
        continue;
      }
      try {
        const auto reply = json::parse(res->body);
        if (!reply.contains("text") || !reply["text"].is_string()) {
          error = "polisher reply has no 'text' string";
          return std::nullopt;
        }
        return reply["text"].get<std::string>();
      } catch (const json::exception& e) {
        error = std::string("polisher reply is not JSON: ") + e.what();
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

 private:
  // "http://host:port/path" -> {"http://host:port", "/path"}
  static std::optional<std::pair<std::string, std::string>> split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos || scheme == 0) return std::nullopt;
    const auto slash = url.find('/', scheme + 3);
    if (slash == scheme + 3) return std::nullopt;
    if (slash == std::string::npos) return std::make_pair(url, std::string("/"));
    return std::make_pair(url.substr(0, slash), url.substr(slash));
  }

  HttpPolisherConfig cfg_;
};

/// Decimal numerals in order of appearance ("-142.15", "0.40", "2").
inline std::vector<std::string> extract_numerals(const std::string& text) {
  static const std::regex numeral(R"(-?\d+(?:\.\d+)?)");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), numeral); it != std::sregex_iterator(); ++it)
    out.push_back(it->str());
  return out;
}

struct PolishResult {
  std::string text;
  bool polished = false;
  std::vector<std::string> warnings;
};

inline PolishResult polish(PolisherClient& client, const std::string& draft, const AnalysisReport& context) {
  PolishResult result{draft, false, {}};
  std::string error;
  const auto rewritten = client.rewrite(draft, json(context), error);
  if (!rewritten) {
    result.warnings.push_back(error.empty() ? "polisher failed" : error);
    return result;
  }
  const auto kept = extract_numerals(*rewritten);
  const std::set<std::string> available(kept.begin(), kept.end());
  for (const auto& n : extract_numerals(draft)) {
    if (!available.count(n)) {
      result.warnings.push_back("polisher dropped or altered the value " + n + "; keeping the draft");
      return result;
    }
  }
  result.text = *rewritten;
  result.polished = true;
  return result;
}

}  // namespace fieldlang
