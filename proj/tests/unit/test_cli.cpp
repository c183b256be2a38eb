#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qae/cli.hpp"
#include "qae/io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = qae::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("qae_cli_" + std::to_string(++counter_))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("solve prints a summary and writes outputs") {
  TempDir dir;
  const Outcome r = run({"solve", "--n", "4", "--mu", "20", "--alpha", "0.1", "--gamma", "0.25",
                         "--out", dir.file("s.json"), "--grid-csv", dir.file("g.csv"),
                         "--trace-csv", dir.file("q.csv"), "--max-grid-points", "100"});
  REQUIRE(r.code == qae::cli::kOk);
  const json j = json::parse(r.out);
  CHECK(j["t_a"].get<double>() == -10.0);
  CHECK(j["c_e"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["iterations"] == 1);
  CHECK(fs::exists(dir.file("s.json")));
  CHECK(fs::exists(dir.file("g.csv")));
  CHECK(fs::exists(dir.file("q.csv")));

  const json m = json::parse(qae::read_text_file(dir.file("s.json.manifest.json")));
  CHECK(m["command"] == "solve");
  CHECK(m["params"]["mu"] == 20.0);
  CHECK(m["outputs"].size() == 3);
  for (const auto& o : m["outputs"]) CHECK(fs::exists(o.get<std::string>()));
}

TEST_CASE("solve, then verify, tail and simulate-cost on the saved file") {
  TempDir dir;
  REQUIRE(run({"solve", "--mu", "3", "--alpha", "6", "--gamma", "1", "--epsilon", "1e-9", "--out",
               dir.file("s.json")})
              .code == 0);

  const Outcome v = run({"verify", "--solution", dir.file("s.json"), "--reps", "20000", "--grid",
                         "8", "--out", dir.file("v.json"), "--csv", dir.file("v.csv")});
  REQUIRE(v.code == 0);
  const json vj = json::parse(v.out);
  CHECK(vj["indifference_ok"] == true);
  CHECK(vj["probes"] == 8);
  CHECK(qae::read_text_file(dir.file("v.csv")).rfind("t,mean,ci_low,ci_high\n", 0) == 0);

  const Outcome t = run({"tail", "--solution", dir.file("s.json"), "--csv", dir.file("h.csv")});
  REQUIRE(t.code == 0);
  CHECK(json::parse(t.out)["eta_hat"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(fs::exists(dir.file("h.csv")));

  const Outcome s = run({"simulate-cost", "--solution", dir.file("s.json"), "--probe-t", "-0.1",
                         "0.5", "--reps", "20000"});
  REQUIRE(s.code == 0);
  const json sj = json::parse(s.out);
  REQUIRE(sj["probes"].size() == 2);
  for (const auto& row : sj["probes"]) {
    CHECK(row["analytic"].get<double>() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(row["mean"].get<double>() - 1.0) < 3.0 * row["half_width"].get<double>());
  }
}

TEST_CASE("closed-form reports the densities on both sides of opening") {
  const Outcome r = run({"closed-form", "--scenario", "index", "--mu", "3", "--alpha", "6",
                         "--gamma", "1"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["density_before_opening"].get<double>() == doctest::Approx(2.0));
  CHECK(j["density_after_opening"].get<double>() == doctest::Approx(2.0 / 3.0));
  CHECK(j["total_mass"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["c_e"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("price of anarchy table and single cell") {
  const Outcome t = run({"poa", "--table"});
  REQUIRE(t.code == 0);
  std::istringstream lines(t.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "mu,0.05,1,5");
  std::getline(lines, line);
  CHECK(line.rfind("0.5,", 0) == 0);

  const Outcome c = run({"poa", "--mu", "1", "--gamma", "1"});
  REQUIRE(c.code == 0);
  CHECK(json::parse(c.out)["poa"].get<double>() == doctest::Approx(2.002).epsilon(5e-3));

  const Outcome d = run({"poa", "--benchmark", "dynamic-release", "--mu", "2", "--gamma", "0.5",
                         "--beta", "0.4"});
  REQUIRE(d.code == 0);
  CHECK(json::parse(d.out)["poa"].get<double>() > 2.0);
}

TEST_CASE("exit codes") {
  CHECK(run({"solve", "--mu", "-1"}).code == qae::cli::kUsage);
  CHECK(run({"solve", "--bogus"}).code == qae::cli::kUsage);
  CHECK(run({}).code == qae::cli::kUsage);
  CHECK(run({"solve", "--n", "2", "--beta", "1", "--no-early-birds"}).code == qae::cli::kUsage);
  CHECK(run({"verify", "--solution", "/nonexistent.json"}).code == qae::cli::kUsage);
  CHECK(run({"solve", "--n", "2", "--beta", "0.5", "--gamma", "1", "--max-bisect", "3"}).code ==
        qae::cli::kNotConverged);
  CHECK(run({"--help"}).code == qae::cli::kOk);
}

TEST_CASE("identical flags give identical files") {
  TempDir dir;
  for (const char* name : {"a", "b"}) {
    const std::string base = dir.file(name);
    REQUIRE(run({"solve", "--n", "2", "--beta", "0.3", "--gamma", "1", "--out", base + ".json",
                 "--grid-csv", base + ".csv"})
                .code == 0);
    REQUIRE(run({"verify", "--solution", base + ".json", "--reps", "5000", "--grid", "4", "--out",
                 base + ".v.json"})
                .code == 0);
  }
  for (const char* suffix : {".json", ".csv", ".v.json"}) {
    CHECK(qae::read_text_file(dir.file("a") + suffix) == qae::read_text_file(dir.file("b") + suffix));
  }
}

TEST_CASE("numerics from a config file, overridden by flags") {
  TempDir dir;
  qae::write_text_file(dir.file("n.cfg"), "# coarse\ndelta = 2e-4\nepsilon = 1e-7\n");
  REQUIRE(run({"solve", "--gamma", "1", "--config", dir.file("n.cfg"), "--epsilon", "1e-8", "--out",
               dir.file("s.json")})
              .code == 0);
  const json s = json::parse(qae::read_text_file(dir.file("s.json")));
  CHECK(s["numerics"]["delta"] == 2e-4);
  CHECK(s["numerics"]["epsilon"] == 1e-8);
}

}
