#include <doctest.h>

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "discovars/ingest.hpp"
#include "fixtures.hpp"

#include <httplib.h>

extern char** environ;

namespace {

const std::string kCli = DISCOVARS_CLI_PATH;
const std::string kData = DISCOVARS_DATA_DIR;

std::filesystem::path tmp(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& args, const std::string& tag = "cli") {
  std::string cmd = kCli + " " + args + " >" + tmp(tag + ".out").string() + " 2>" + tmp(tag + ".err").string();
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

pid_t spawn(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>(kCli.c_str()));
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  pid_t pid = 0;
  posix_spawn(&pid, kCli.c_str(), nullptr, nullptr, argv.data(), environ);
  return pid;
}

int wait_exit(pid_t pid) {
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool wait_health(int port) {
  httplib::Client c("127.0.0.1", port);
  for (int i = 0; i < 200; ++i) {
    if (auto res = c.Get("/health"); res && res->status == 200 && res->body == "ok") return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  return false;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help exits 0 and lists every flag") {
  CHECK(run("build --help", "help_build") == 0);
  auto text = slurp(tmp("help_build.out"));
  for (const char* flag : {"--input", "--method", "--measure", "--top", "--p-enter", "--p-exit", "--lambda",
                           "--edge-direction", "--cluster", "--k", "--seed", "--output", "--date-col", "--lags",
                           "--returns-denominator", "--timings", "--threads"}) {
    CHECK_MESSAGE(text.find(flag) != std::string::npos, flag);
  }
  CHECK(run("returns --help", "help_returns") == 0);
  auto rtext = slurp(tmp("help_returns.out"));
  for (const char* flag : {"--input", "--date-col", "--lags", "--out", "--returns-denominator"}) {
    CHECK_MESSAGE(rtext.find(flag) != std::string::npos, flag);
  }
  CHECK(run("serve --help", "help_serve") == 0);
  auto stext = slurp(tmp("help_serve.out"));
  CHECK(stext.find("--port") != std::string::npos);
  CHECK(stext.find("--data-dir") != std::string::npos);
  CHECK(run("--help") == 0);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("build --input " + kData + "/boston_housing.csv --top 0") == 2);
  CHECK(run("build --input " + kData + "/boston_housing.csv --method ridge") == 2);
  CHECK(run("build") == 2);
  CHECK(run("") == 2);
}

TEST_CASE("build writes a byte-reproducible report") {
  std::string args = "build --input " + kData + "/boston_housing.csv --method lasso --measure authority --top 3 "
                     "--cluster kmeans --k 3 --seed 5 --output ";
  CHECK(run(args + tmp("r1.json").string()) == 0);
  CHECK(run(args + tmp("r2.json").string()) == 0);
  auto a = slurp(tmp("r1.json"));
  CHECK(!a.empty());
  CHECK(a == slurp(tmp("r2.json")));
  CHECK(a.find("\"schema\": 1") != std::string::npos);
}

TEST_CASE("stage failures exit nonzero with a diagnostic") {
  std::ofstream(tmp("two_cols.csv")) << "a,b\n1,2\n2,3\n3,5\n";
  CHECK(run("build --input " + tmp("two_cols.csv").string(), "fail") == 1);
  CHECK(slurp(tmp("fail.err")).find("error:") != std::string::npos);
}

TEST_CASE("returns subcommand") {
  CHECK(run("returns --input " + kData + "/coin_sample.csv --date-col date --lags 2 --out " + tmp("ret.csv").string()) == 0);
  auto t = discovars::ingest::load_csv_file(tmp("ret.csv"));
  CHECK(t.table.cols() == 24);
  CHECK(t.table.rows() == 1087);
  CHECK(run("returns --input " + kData + "/coin_sample.csv --date-col date --lags 0 --out " + tmp("ret0.csv").string()) == 0);
  CHECK(discovars::ingest::load_csv_file(tmp("ret0.csv")).table.cols() == 8);

  std::ofstream(tmp("bad_prices.csv")) << "date,A,B\n2020-01-01,1,2\n2020-01-02,2,2\n2020-01-03,-1,3\n2020-01-04,2,2\n";
  CHECK(run("returns --input " + tmp("bad_prices.csv").string() + " --date-col date --lags 0", "neg") == 1);
  CHECK(slurp(tmp("neg.err")).find("row 3") != std::string::npos);
}

TEST_CASE("serve: health, double bind, interrupt") {
  const int port = 18000 + static_cast<int>(getpid() % 1000);
  pid_t first = spawn({"serve", "--port", std::to_string(port)});
  REQUIRE(wait_health(port));
  pid_t second = spawn({"serve", "--port", std::to_string(port)});
  CHECK(wait_exit(second) == 1);
  kill(first, SIGINT);
  CHECK(wait_exit(first) == 0);
}

}
