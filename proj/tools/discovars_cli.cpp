#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "discovars/error.hpp"
#include "discovars/pipeline.hpp"
#include "discovars/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

namespace {

using namespace discovars;

const std::map<std::string, ingest::ReturnDenominator> kDenominators{
    {"current", ingest::ReturnDenominator::current}, {"previous", ingest::ReturnDenominator::previous}};


struct BuildArgs {
  std::string input;
  std::string output;
  std::string method = "stepwise";
  std::string measure = "alpha";
  std::optional<double> lambda;
  std::optional<std::string> date_col;
  int lags = 2;
  ingest::ReturnDenominator denominator = ingest::ReturnDenominator::current;
  bool no_header = false;
  std::string direction = "child-to-parent";
  std::string cluster = "none";
  pipeline::PipelineConfig config;
};

struct ReturnsArgs {
  std::string input;
  std::string output;
  pipeline::ReturnsOptions options;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::string ui_dir;
  int idle_timeout = 3600;
  std::size_t max_upload_mb = 50;
  std::size_t threads = 0;
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

int cmd_build(BuildArgs& args) {
  auto& cfg = args.config;
  cfg.input = args.input;
  cfg.header = !args.no_header;
  cfg.method.kind = linmod::parse_method(args.method);
  cfg.method.lasso_lambda = args.lambda;
  cfg.measure = centrality::parse_measure(args.measure);
  cfg.direction = depnet::parse_direction(args.direction);
  cfg.cluster = pipeline::parse_cluster_algo(args.cluster);
  if (args.date_col) cfg.returns = pipeline::ReturnsOptions{*args.date_col, args.lags, args.denominator};
  auto report = pipeline::run_pipeline(cfg);
  write_output(args.output, report.dump(2) + "\n");
  return 0;
}

int cmd_returns(const ReturnsArgs& args) {
  auto doc = ingest::parse_csv(ingest::read_file(args.input));
  auto table = pipeline::prepare_returns(doc, args.options);
  write_output(args.output, ingest::to_csv(table));
  return 0;
}

int cmd_serve(const ServeArgs& args) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGUSR1);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::ServiceOptions options;
  options.idle_timeout = std::chrono::seconds(args.idle_timeout);
  options.max_upload_bytes = args.max_upload_mb * 1024u * 1024u;
  options.data_dir = args.data_dir;
  options.ui_dir = args.ui_dir;
  options.threads = args.threads;
  service::Service svc(options);
  httplib::Server server;
  svc.mount(server);

  int port = args.port;
  if (port == 0) {
    port = server.bind_to_any_port(args.host);
    if (port < 0) port = -1;
  } else if (!server.bind_to_port(args.host, port)) {
    port = -1;
  }
  if (port < 0) {
    std::cerr << "error: cannot bind " << args.host << ":" << args.port << "\n";
    return 1;
  }
  std::cerr << "listening on http://" << args.host << ":" << port << std::endl;

  std::atomic<bool> interrupted{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    if (sig != SIGUSR1) interrupted = true;
    server.stop();
  });
  bool ok = server.listen_after_bind();
  if (!interrupted) pthread_kill(waiter.native_handle(), SIGUSR1);
  waiter.join();
  if (interrupted) {
    std::cerr << "shutting down\n";
    return 0;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable discovery through dependency networks and graph centrality"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Build the dependency network, rank variables and optionally cluster the Top-n");
  b->add_option("--input,-i", build.input, "Input CSV (numeric columns; non-numeric columns are dropped)")
      ->required()
      ->check(CLI::ExistingFile);
  b->add_option("--method", build.method, "Selection method: stepwise, forward, stepaic, lasso")
      ->check(CLI::IsMember({"stepwise", "forward", "stepaic", "aic", "lasso"}))
      ->capture_default_str();
  b->add_option("--p-enter", build.config.method.p_enter, "Entry p-value threshold (stepwise, forward)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  b->add_option("--p-exit", build.config.method.p_exit, "Exit p-value threshold (stepwise)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  b->add_option("--lambda", build.lambda, "Lasso penalty (default 16/m)")->check(CLI::PositiveNumber);
  b->add_option("--measure", build.measure,
                "Centrality: degree, pagerank, authority, hub, eigen, betweenness, closeness, alpha, power")
      ->check(CLI::IsMember({"degree", "pagerank", "authority", "hub", "eigen", "betweenness", "closeness", "alpha",
                             "power"}))
      ->capture_default_str();
  b->add_option("--damping", build.config.measure_params.damping, "PageRank damping in (0,1)")
      ->capture_default_str();
  b->add_option("--attenuation", build.config.measure_params.attenuation, "Alpha centrality factor times 1/lambda_max")
      ->capture_default_str();
  b->add_option("--beta", build.config.measure_params.beta, "Power centrality factor times 1/lambda_max")
      ->capture_default_str();
  b->add_option("--top,-n", build.config.top_n, "Number of top-ranked variables (>= 1)")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  b->add_option("--edge-direction", build.direction, "Edge orientation: child-to-parent (i->s) or parent-to-child")
      ->check(CLI::IsMember({"child-to-parent", "parent-to-child"}))
      ->capture_default_str();
  b->add_option("--cluster", build.cluster, "Cluster the Top-n variables: none, kmeans, gmm")
      ->check(CLI::IsMember({"none", "kmeans", "gmm"}))
      ->capture_default_str();
  b->add_option("--k", build.config.k, "Number of k-means clusters (>= 1)")->check(CLI::Range(1, 1000000))->capture_default_str();
  b->add_option("--k-max", build.config.k_max, "Largest mixture size tried by gmm")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  b->add_option("--restarts", build.config.restarts, "k-means restarts")->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--seed", build.config.seed, "Random seed for clustering")->capture_default_str();
  b->add_flag("!--raw-clusters", build.config.standardize_clusters, "Cluster raw values instead of z-scores");
  b->add_option("--date-col", build.date_col, "Treat input as prices indexed by this date column and use daily returns");
  b->add_option("--lags", build.lags, "Lagged return copies per symbol (with --date-col)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  b->add_option("--returns-denominator", build.denominator, "Return denominator: current or previous price")
      ->transform(CLI::CheckedTransformer(kDenominators, CLI::ignore_case))
      ->default_str("current");
  b->add_flag("--no-header", build.no_header, "Input CSV has no header row");
  b->add_flag("--timings", build.config.timings, "Add per-stage wall-clock timings to the report");
  b->add_option("--threads", build.config.threads, "Worker threads (0 = DISCOVARS_THREADS or hardware)")
      ->capture_default_str();
  b->add_option("--output,-o", build.output, "Report path (default stdout)");

  ReturnsArgs returns;
  auto* r = app.add_subcommand("returns", "Convert a price CSV into daily returns with lagged copies");
  r->add_option("--input,-i", returns.input, "Price CSV with a date column")->required()->check(CLI::ExistingFile);
  r->add_option("--date-col", returns.options.date_column, "Date column (strictly ascending, excluded from output)")
      ->required();
  r->add_option("--lags", returns.options.lags, "Lagged copies per symbol")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  r->add_option("--returns-denominator", returns.options.denominator, "Return denominator: current or previous price")
      ->transform(CLI::CheckedTransformer(kDenominators, CLI::ignore_case))
      ->default_str("current");
  r->add_option("--out,--output,-o", returns.output, "Output CSV (default stdout)");

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Run the HTTP/JSON service");
  s->add_option("--port,-p", serve.port, "TCP port (0 picks a free port)")->check(CLI::Range(0, 65535))->capture_default_str();
  s->add_option("--host", serve.host, "Bind address")->capture_default_str();
  s->add_option("--data-dir", serve.data_dir, "Directory of sample CSVs offered by GET /samples");
  s->add_option("--ui-dir", serve.ui_dir, "Static web UI served under /ui");
  s->add_option("--idle-timeout", serve.idle_timeout, "Session idle timeout in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--max-upload-mb", serve.max_upload_mb, "Upload size limit in MB")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--threads", serve.threads, "Worker threads per network build")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*b) return cmd_build(build);
    if (*r) return cmd_returns(returns);
    return cmd_serve(serve);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
