#pragma once

// Local HTTP service: stateless JSON endpoints over the engine plus an
// in-memory table of Sobol jobs. Restarting the process loses all jobs.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "llmroi/scenario_io.hpp"
#include "llmroi/sobol.hpp"

namespace llmroi {

struct ServiceConfig {
  /// Sobol specs needing fewer evaluations than this run synchronously.
  std::size_t sync_threshold = 1'000'000;
  std::chrono::seconds retention{3600};
  unsigned max_concurrent_jobs = 1;
  /// Evaluation workers per Sobol run.
  unsigned workers = 1;
  std::string cors_origin = "*";
};

enum class JobState { Queued, Running, Done, Failed };

const char* to_string(JobState s);

struct JobRecord {
  std::string id;
  JobState state = JobState::Queued;
  double progress = 0.0;
  std::string submitted_at;  // ISO 8601, UTC
  std::optional<std::string> finished_at;
  SobolSpec spec;
  std::optional<SobolIndices> result;
  std::optional<std::string> error_code;
  std::optional<std::string> error;
};

Json to_json(const JobRecord& job);

struct HttpResponse {
  int status = 200;
  std::string body;
};

/// Transport-independent request handling. Thread-safe.
class Service {
 public:
  explicit Service(ServiceConfig config = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  std::optional<JobRecord> job(const std::string& id) const;
  /// Blocks until no job is queued or running.
  void wait_idle();

  const ServiceConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Serves a Service over HTTP until stop() is called.
class HttpServer {
 public:
  HttpServer(Service& service, std::string host = "127.0.0.1", int port = 8080);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  int bind();
  /// Blocks serving requests. Calls bind() first if needed.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace llmroi
