#include "discovars/service.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "discovars/error.hpp"
#include "discovars/pipeline.hpp"
#include "discovars/report.hpp"

namespace discovars::service {

using nlohmann::json;
using clock = std::chrono::steady_clock;

namespace {

/// Carries an HTTP status out of a handler.
struct HttpError : std::runtime_error {
  int status;
  HttpError(int code, const std::string& msg) : std::runtime_error(msg), status(code) {}
};

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const HttpError& e) {
      send_json(res, {{"error", e.what()}}, e.status);
    } catch (const json::exception& e) {
      send_json(res, {{"error", std::string("invalid JSON: ") + e.what()}}, 400);
    } catch (const ArgumentError& e) {
      send_json(res, {{"error", e.what()}}, 422);
    } catch (const DataError& e) {
      send_json(res, {{"error", e.what()}}, 422);
    } catch (const NumericError& e) {
      send_json(res, {{"error", e.what()}}, 422);
    } catch (const std::exception& e) {
      send_json(res, {{"error", e.what()}}, 500);
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body);
  if (!body.is_object()) throw HttpError(422, "request body must be a JSON object");
  return body;
}

double number_field(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  if (!obj[key].is_number()) throw HttpError(422, std::string("'") + key + "' must be a number");
  return obj[key].get<double>();
}

linmod::SelectionMethod method_from(const json& body) {
  if (!body.contains("method") || !body["method"].is_string()) {
    throw HttpError(422, "'method' must be one of stepwise, forward, stepaic, lasso");
  }
  linmod::SelectionMethod m;
  m.kind = linmod::parse_method(body["method"].get<std::string>());
  json params = body.value("params", json::object());
  if (!params.is_object()) throw HttpError(422, "'params' must be an object");
  m.p_enter = number_field(params, "p_enter", m.p_enter);
  m.p_exit = number_field(params, "p_exit", m.p_exit);
  if (params.contains("lambda") && !params["lambda"].is_null()) m.lasso_lambda = number_field(params, "lambda", 0.0);
  m.validate();
  return m;
}

std::string network_key(const linmod::SelectionMethod& m, depnet::EdgeDirection dir) {
  std::ostringstream key;
  key.precision(17);
  key << linmod::to_string(m.kind) << '|' << m.p_enter << '|' << m.p_exit << '|'
      << (m.lasso_lambda ? *m.lasso_lambda : -1.0) << '|' << depnet::to_string(dir);
  return key.str();
}

centrality::MeasureParams measure_params_from(const httplib::Request& req) {
  centrality::MeasureParams p;
  json extra = json::object();
  if (req.has_param("params")) {
    extra = json::parse(req.get_param_value("params"));
    if (!extra.is_object()) throw HttpError(422, "'params' must be a JSON object");
  }
  auto pick = [&](const char* key, double& slot) {
    if (req.has_param(key)) {
      try {
        slot = std::stod(req.get_param_value(key));
      } catch (const std::exception&) {
        throw HttpError(422, std::string("'") + key + "' must be a number");
      }
    } else {
      slot = number_field(extra, key, slot);
    }
  };
  pick("damping", p.damping);
  pick("attenuation", p.attenuation);
  pick("beta", p.beta);
  p.validate();
  return p;
}

centrality::Measure measure_from(const httplib::Request& req) {
  if (!req.has_param("measure")) throw HttpError(422, "query parameter 'measure' is required");
  return centrality::parse_measure(req.get_param_value("measure"));
}

std::string scores_key(const std::string& net, centrality::Measure m, const centrality::MeasureParams& p) {
  std::ostringstream key;
  key.precision(17);
  key << net << '#' << centrality::to_string(m) << '|' << p.damping << '|' << p.attenuation << '|' << p.beta;
  return key.str();
}

/// Looks up or computes scores on the session's current network.
std::pair<std::shared_ptr<const depnet::DependencyNetwork>, centrality::CentralityScores> scores_for(
    Session& s, centrality::Measure measure, const centrality::MeasureParams& params) {
  std::shared_ptr<const depnet::DependencyNetwork> net;
  std::string key;
  {
    std::lock_guard lock(s.mutex);
    if (s.current_network.empty()) throw HttpError(409, "no network has been built for this session");
    net = s.networks.at(s.current_network);
    key = scores_key(s.current_network, measure, params);
    if (auto it = s.scores.find(key); it != s.scores.end()) return {net, it->second};
  }
  auto computed = centrality::compute(net->graph(), measure, params);
  std::lock_guard lock(s.mutex);
  ++s.centrality_computations;
  s.scores.emplace(key, computed);
  return {net, computed};
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)), rng_state_(std::random_device{}()) {
  rng_state_ = (rng_state_ << 32) ^ std::random_device{}();
}

std::size_t Service::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

std::size_t Service::evict_idle() {
  auto now = clock::now();
  std::unique_lock lock(sessions_mutex_);
  std::size_t evicted = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock session_lock(it->second->mutex, std::try_to_lock);
    bool idle = session_lock.owns_lock() && !it->second->building &&
                now - it->second->last_access > options_.idle_timeout;
    if (idle) {
      session_lock.unlock();
      it = sessions_.erase(it);
      ++evicted;
    } else {
      ++it;
    }
  }
  return evicted;
}

std::filesystem::path Service::sample_path(const std::string& name) const {
  bool safe = !name.empty() && std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
  if (!safe) throw HttpError(422, "invalid sample name");
  auto path = options_.data_dir / (name + ".csv");
  if (options_.data_dir.empty() || !std::filesystem::is_regular_file(path)) {
    throw HttpError(404, "unknown sample '" + name + "'");
  }
  return path;
}

std::string Service::new_id() {
  std::lock_guard lock(rng_mutex_);
  std::mt19937_64 rng(rng_state_);
  rng_state_ = rng();
  std::ostringstream id;
  id << std::hex << rng() << rng();
  return id.str();
}

std::shared_ptr<Session> Service::find(const std::string& id) {
  evict_idle();
  std::shared_ptr<Session> s;
  {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw HttpError(404, "unknown session '" + id + "'");
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  s->last_access = clock::now();
  return s;
}

void Service::mount(httplib::Server& server) {
  server.set_payload_max_length(options_.max_upload_bytes);
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });
  server.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  if (!options_.ui_dir.empty() && std::filesystem::is_directory(options_.ui_dir)) {
    server.set_mount_point("/ui", options_.ui_dir.string());
  }

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

  server.Get("/samples", guarded([this](const httplib::Request&, httplib::Response& res) {
    std::vector<std::string> names;
    if (!options_.data_dir.empty() && std::filesystem::is_directory(options_.data_dir)) {
      for (const auto& entry : std::filesystem::directory_iterator(options_.data_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") names.push_back(entry.path().stem().string());
      }
    }
    std::sort(names.begin(), names.end());
    send_json(res, {{"samples", names}});
  }));

  server.Post("/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) {
    bool header = !(req.has_param("header") && req.get_param_value("header") == "false");
    std::string text;
    if (req.has_param("sample")) {
      text = ingest::read_file(sample_path(req.get_param_value("sample")));
    }
    auto load = ingest::load_csv(req.has_param("sample") ? std::string_view(text) : std::string_view(req.body), header);
    auto constant = ingest::drop_constant_columns(load.table);
    if (constant.table.cols() < 3) throw HttpError(422, "need at least 3 non-constant numeric columns");

    auto session = std::make_shared<Session>();
    session->id = new_id();
    session->dataset = std::move(constant.table);
    session->created = session->last_access = clock::now();

    json warnings = json::array();
    for (const auto& w : load.dropped_columns) warnings.push_back({{"column", w.column}, {"reason", w.reason}});
    for (const auto& c : constant.dropped) warnings.push_back({{"column", c}, {"reason", "constant"}});
    json body = {{"session_id", session->id},
                 {"columns", session->dataset.names},
                 {"m", session->dataset.rows()},
                 {"d", session->dataset.cols()},
                 {"dropped_rows", load.dropped_rows},
                 {"warnings", std::move(warnings)}};
    evict_idle();
    {
      std::unique_lock lock(sessions_mutex_);
      sessions_.emplace(session->id, std::move(session));
    }
    send_json(res, body, 201);
  }));

  server.Post(R"(/sessions/([0-9a-f]+)/network)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto session = find(req.matches[1]);
    json body = parse_body(req);
    auto method = method_from(body);
    auto direction = depnet::parse_direction(body.value("edge_direction", std::string("child-to-parent")));
    const std::string key = network_key(method, direction);

    std::shared_ptr<const depnet::DependencyNetwork> net;
    bool cached = false;
    double elapsed_ms = 0.0;
    {
      std::lock_guard lock(session->mutex);
      if (session->building) throw HttpError(409, "a network build is already running for this session");
      if (auto it = session->networks.find(key); it != session->networks.end()) {
        net = it->second;
        cached = true;
        session->current_network = key;
      } else {
        session->building = true;
      }
    }
    if (!cached) {
      auto t0 = clock::now();
      try {
        net = std::make_shared<const depnet::DependencyNetwork>(
            depnet::build_network(session->dataset, method, {direction, options_.threads}));
      } catch (...) {
        std::lock_guard lock(session->mutex);
        session->building = false;
        throw;
      }
      elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      std::lock_guard lock(session->mutex);
      session->building = false;
      ++session->network_builds;
      session->networks.emplace(key, net);
      session->current_network = key;
    }
    json out = report::network_json(*net);
    out["elapsed_ms"] = elapsed_ms;
    out["cached"] = cached;
    send_json(res, out);
  }));

  server.Get(R"(/sessions/([0-9a-f]+)/centrality)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto session = find(req.matches[1]);
    auto measure = measure_from(req);
    auto params = measure_params_from(req);
    auto [net, scores] = scores_for(*session, measure, params);
    send_json(res, report::scores_json(scores, net->nodes));
  }));

  server.Get(R"(/sessions/([0-9a-f]+)/topn)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto session = find(req.matches[1]);
    auto measure = measure_from(req);
    auto params = measure_params_from(req);
    if (!req.has_param("n")) throw HttpError(422, "query parameter 'n' is required");
    long n = 0;
    try {
      n = std::stol(req.get_param_value("n"));
    } catch (const std::exception&) {
      throw HttpError(422, "'n' must be an integer");
    }
    auto [net, scores] = scores_for(*session, measure, params);
    if (n < 1 || static_cast<std::size_t>(n) > net->nodes.size()) {
      throw HttpError(422, "'n' must lie in [1, " + std::to_string(net->nodes.size()) + "]");
    }
    auto names = centrality::rank_top_n(scores, net->nodes, static_cast<std::size_t>(n));
    send_json(res, {{"measure", centrality::to_string(measure)}, {"n", n}, {"names", names}});
  }));

  server.Post(R"(/sessions/([0-9a-f]+)/cluster)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto session = find(req.matches[1]);
    json body = parse_body(req);
    if (!body.contains("variables") || !body["variables"].is_array() || body["variables"].empty()) {
      throw HttpError(422, "'variables' must be a non-empty array of column names");
    }
    pipeline::ClusterRequest cr;
    for (const auto& v : body["variables"]) {
      if (!v.is_string()) throw HttpError(422, "'variables' entries must be strings");
      auto name = v.get<std::string>();
      if (!session->dataset.index_of(name)) throw HttpError(422, "unknown variable '" + name + "'");
      cr.variables.push_back(name);
    }
    if (!body.contains("algo") || !body["algo"].is_string()) throw HttpError(422, "'algo' must be kmeans or gmm");
    cr.algo = pipeline::parse_cluster_algo(body["algo"].get<std::string>());
    if (cr.algo == pipeline::ClusterAlgo::none) throw HttpError(422, "'algo' must be kmeans or gmm");
    cr.k = static_cast<int>(number_field(body, "k", cr.k));
    cr.k_max = static_cast<int>(number_field(body, "k_max", cr.k_max));
    cr.seed = static_cast<std::uint64_t>(number_field(body, "seed", static_cast<double>(cr.seed)));
    cr.restarts = static_cast<int>(number_field(body, "restarts", cr.restarts));
    if (body.contains("standardize")) cr.standardize = body["standardize"].get<bool>();
    cr.threads = options_.threads;
    send_json(res, pipeline::run_clustering(session->dataset, cr));
  }));

  server.Get(R"(/sessions/([0-9a-f]+)/stats)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto session = find(req.matches[1]);
    std::lock_guard lock(session->mutex);
    send_json(res, {{"network_builds", session->network_builds},
                    {"centrality_computations", session->centrality_computations},
                    {"networks_cached", session->networks.size()},
                    {"building", session->building},
                    {"m", session->dataset.rows()},
                    {"d", session->dataset.cols()}});
  }));
}

}  // namespace discovars::service
