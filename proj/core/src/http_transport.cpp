#include <cstdlib>
#include <string>

#include <httplib.h>

#include "ej/error.h"
#include "ej/remote_judge.h"

namespace ej {

namespace {

class HttpTransport final : public ChatTransport {
 public:
  HttpTransport(const std::string& base, std::string path, std::string token, double timeout)
      : client_(base), path_(std::move(path)), token_(std::move(token)) {
    const auto sec = static_cast<time_t>(timeout);
    const auto usec = static_cast<time_t>((timeout - static_cast<double>(sec)) * 1e6);
    client_.set_connection_timeout(sec, usec);
    client_.set_read_timeout(sec, usec);
    client_.set_write_timeout(sec, usec);
    if (!token_.empty()) client_.set_bearer_token_auth(token_);
  }

  HttpResponse post(const std::string& body) override {
    auto res = client_.Post(path_, body, "application/json");
    if (!res) {
      const auto err = res.error();
      const auto msg = "POST " + path_ + ": " + httplib::to_string(err);
      if (err == httplib::Error::Read || err == httplib::Error::Write) {
        fail(ErrorKind::timeout, msg);
      }
      fail(ErrorKind::remote_unavailable, msg);
    }
    return {res->status, res->body};
  }

 private:
  httplib::Client client_;
  std::string path_;
  std::string token_;
};

}  // namespace

std::unique_ptr<ChatTransport> make_http_transport(const JudgeBackendConfig& config) {
  config.validate();
  std::string url = config.endpoint_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorKind::config_error, "endpoint_url needs a scheme: " + config.endpoint_url);
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.compare(0, scheme_end, "https") == 0) {
    fail(ErrorKind::config_error, "built without TLS support; cannot reach " + url);
  }
#endif
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string base = url.substr(0, path_start);
  const std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);

  const char* token = std::getenv(config.api_key_env.c_str());
  if (token == nullptr) {
    fail(ErrorKind::config_error, "environment variable " + config.api_key_env + " is not set");
  }
  return std::make_unique<HttpTransport>(base, prefix + "/chat/completions", token,
                                         config.timeout_seconds);
}

}  // namespace ej
