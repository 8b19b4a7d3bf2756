#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "discovars/centrality.hpp"
#include "discovars/depnet.hpp"
#include "discovars/ingest.hpp"

namespace httplib {
class Server;
}

namespace discovars::service {

struct ServiceOptions {
  std::chrono::seconds idle_timeout{3600};
  std::size_t max_upload_bytes = 50u * 1024u * 1024u;
  std::string cors_origin = "*";
  /// Static files served under /ui when the directory exists.
  std::filesystem::path ui_dir;
  /// Sample CSVs listed by GET /samples and loadable via POST /datasets?sample=NAME.
  std::filesystem::path data_dir;
  std::size_t threads = 0;
};

/// One uploaded dataset plus everything computed from it.
struct Session {
  std::string id;
  DataTable dataset;
  std::chrono::steady_clock::time_point created;
  std::chrono::steady_clock::time_point last_access;

  std::mutex mutex;
  std::map<std::string, std::shared_ptr<const depnet::DependencyNetwork>> networks;
  std::string current_network;
  std::map<std::string, centrality::CentralityScores> scores;
  bool building = false;
  std::size_t network_builds = 0;
  std::size_t centrality_computations = 0;
};

/// In-memory session store exposing the pipeline over HTTP/JSON.
class Service {
 public:
  explicit Service(ServiceOptions options = {});

  /// Registers every route (and CORS handling) on `server`.
  void mount(httplib::Server& server);

  [[nodiscard]] std::size_t session_count() const;
  /// Drops sessions idle for longer than the configured timeout.
  std::size_t evict_idle();

 private:
  std::shared_ptr<Session> find(const std::string& id);
  std::string new_id();
  [[nodiscard]] std::filesystem::path sample_path(const std::string& name) const;

  ServiceOptions options_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex rng_mutex_;
  std::uint64_t rng_state_;
};

}  // namespace discovars::service
