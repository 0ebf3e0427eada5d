// Spawns the installed CLI binary and checks exit codes, output formats and
// rerun determinism.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "eqhmm/eqhmm.h"

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string capture = "./cli_capture.txt";
  const std::string cmd =
      std::string(EQHMM_CLI_PATH) + " " + args + " > " + capture + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (output) *output = slurp(capture);
  std::remove(capture.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

const char* kReferenceParams = R"({
  "n_states": 2,
  "pi": [0.0, 1.0],
  "trans": [0.446, 0.554, 0.040, 0.960],
  "lambda": [1.4, 21.1]
})";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("--version prints the library version and exits 0") {
  std::string out;
  CHECK(run_cli("--version", &out) == 0);
  CHECK(out.find(eqh_version()) != std::string::npos);
}

TEST_CASE("missing input files exit with code 2 and name the path") {
  std::string out;
  CHECK(run_cli("fit --catalog ./missing_catalog.csv", &out) == 2);
  CHECK(out.find("missing_catalog.csv") != std::string::npos);
}

TEST_CASE("forecast before the first event exits with code 3") {
  TempDir dir("./cli_dom");
  std::ofstream(dir / "params.json") << kReferenceParams;
  std::ofstream(dir / "catalog.csv")
      << "date,magnitude,latitude,longitude\n"
         "2000-06-01,4.5,34.0,-118.0\n"
         "2000-06-11,4.5,34.0,-118.0\n"
         "2000-06-21,4.5,34.0,-118.0\n";
  std::string out;
  CHECK(run_cli("forecast --params " + (dir / "params.json") + " --catalog " +
                    (dir / "catalog.csv") + " --date 1999-01-01",
                &out) == 3);
}

TEST_CASE("simulate is deterministic and fit consumes its output") {
  TempDir dir("./cli_sim");
  std::ofstream(dir / "params.json") << kReferenceParams;

  std::string out;
  CHECK(run_cli("--seed 42 simulate --params " + (dir / "params.json") +
                    " --n-events 240 --out " + (dir / "a.csv"),
                &out) == 0);
  CHECK(run_cli("--seed 42 simulate --params " + (dir / "params.json") +
                    " --n-events 240 --out " + (dir / "b.csv"),
                &out) == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.csv").find("true_state") != std::string::npos);

  // one-event catalogs are header plus one row
  CHECK(run_cli("--seed 1 simulate --params " + (dir / "params.json") +
                    " --n-events 1 --out " + (dir / "one.csv"),
                &out) == 0);
  std::istringstream lines(slurp(dir / "one.csv"));
  int count = 0;
  for (std::string line; std::getline(lines, line);) ++count;
  CHECK(count == 2);

  CHECK(run_cli("--out-dir " + dir.path.string() + " fit --catalog " +
                    (dir / "a.csv") + " --states 1",
                &out) == 0);
  CHECK(fs::exists(dir / "params.json"));
  CHECK(fs::exists(dir / "fit_result.json"));
  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "manifest.json"));

  // a one-state fit lands exactly on the sample mean of the gaps
  eqh_params* fitted = nullptr;
  REQUIRE(eqh_params_load((dir / "params.json").c_str(), &fitted) == EQH_OK);
  REQUIRE(eqh_params_n_states(fitted) == 1);
  double fitted_lambda = 0.0;
  REQUIRE(eqh_params_get(fitted, nullptr, nullptr, &fitted_lambda, nullptr) ==
          EQH_OK);
  eqh_catalog* catalog = nullptr;
  REQUIRE(eqh_catalog_load((dir / "a.csv").c_str(), 0.0, &catalog) == EQH_OK);
  double first_time = 0.0, last_time = 0.0;
  const size_t n = eqh_catalog_size(catalog);
  eqh_catalog_event(catalog, 0, &first_time, nullptr, nullptr, nullptr, nullptr);
  eqh_catalog_event(catalog, n - 1, &last_time, nullptr, nullptr, nullptr,
                    nullptr);
  const double sample_mean = (last_time - first_time) / double(n - 1);
  CHECK(fitted_lambda == doctest::Approx(sample_mean).epsilon(1e-9));
  eqh_catalog_free(catalog);
  eqh_params_free(fitted);
}

TEST_CASE("a two-state fit writes parameters in canonical order") {
  TempDir dir("./cli_fit2");
  std::ofstream(dir / "truth.json") << kReferenceParams;
  std::string out;
  REQUIRE(run_cli("--seed 3 simulate --params " + (dir / "truth.json") +
                      " --n-events 240 --out " + (dir / "catalog.csv"),
                  &out) == 0);
  REQUIRE(run_cli("--out-dir " + dir.path.string() + " fit --catalog " +
                      (dir / "catalog.csv") + " --states 2",
                  &out) == 0);
  eqh_params* fitted = nullptr;
  REQUIRE(eqh_params_load((dir / "params.json").c_str(), &fitted) == EQH_OK);
  double lambda[2];
  REQUIRE(eqh_params_get(fitted, nullptr, nullptr, lambda, nullptr) == EQH_OK);
  CHECK(lambda[0] < lambda[1]);
  CHECK(lambda[0] > 0.0);
  eqh_params_free(fitted);
}

TEST_CASE("forecast output format and values match the library") {
  TempDir dir("./cli_fc");
  std::ofstream(dir / "params.json") << kReferenceParams;
  std::ofstream(dir / "catalog.csv")
      << "date,magnitude,latitude,longitude\n"
         "2000-01-01,4.5,34.0,-118.0\n"
         "2000-01-03,4.5,34.0,-118.0\n"
         "2000-01-20,4.5,34.0,-118.0\n"
         "2000-02-01,4.5,34.0,-118.0\n";
  std::string out;
  REQUIRE(run_cli("forecast --params " + (dir / "params.json") +
                      " --catalog " + (dir / "catalog.csv") +
                      " --date 2000-02-15 --horizons 1,10",
                  &out) == 0);
  CHECK(out.find("t=4") != std::string::npos);
  CHECK(out.find("w=14.000000") != std::string::npos);
  CHECK(out.find("N=1 P=0.") != std::string::npos);
  CHECK(out.find("N=10 P=0.") != std::string::npos);

  // the printed probability equals the library value at 1e-6 formatting
  eqh_params* params = nullptr;
  REQUIRE(eqh_params_load((dir / "params.json").c_str(), &params) == EQH_OK);
  eqh_catalog* catalog = nullptr;
  REQUIRE(eqh_catalog_load((dir / "catalog.csv").c_str(), 0.0, &catalog) ==
          EQH_OK);
  double instant = 0.0;
  REQUIRE(eqh_catalog_instant(catalog, "2000-02-15", &instant) == EQH_OK);
  const double horizons[] = {1.0, 10.0};
  double probs[2], w = 0.0;
  long long t = 0;
  REQUIRE(eqh_forecast_at(params, catalog, instant, horizons, 2, 0, probs, &w,
                          &t, nullptr) == EQH_OK);
  char expected[64];
  std::snprintf(expected, sizeof expected, "N=1 P=%.6f", probs[0]);
  CHECK(out.find(expected) != std::string::npos);
  eqh_catalog_free(catalog);
  eqh_params_free(params);
}

TEST_CASE("regions derives a partition and labels the catalog") {
  TempDir dir("./cli_regions");
  std::ofstream(dir / "catalog.csv")
      << "date,magnitude,latitude,longitude\n"
         "2000-01-01,4.5,33.8,-120.0\n"
         "2000-01-07,4.5,34.2,-119.2\n"
         "2000-02-01,4.5,34.6,-118.4\n"
         "2000-02-20,4.5,35.0,-117.6\n"
         "2000-03-05,4.5,35.4,-116.8\n"
         "2000-03-30,4.5,35.8,-116.0\n";
  std::string out;
  REQUIRE(run_cli("regions --catalog " + (dir / "catalog.csv") +
                      " --preset east-west --out " + (dir / "partition.json") +
                      " --labeled-out " + (dir / "labeled.csv"),
                  &out) == 0);
  REQUIRE(fs::exists(dir / "partition.json"));
  const std::string partition = slurp(dir / "partition.json");
  CHECK(partition.find("\"mode\": \"quadrant-merge\"") != std::string::npos);
  CHECK(partition.find("\"merge_map\"") != std::string::npos);
  const std::string labeled = slurp(dir / "labeled.csv");
  CHECK(labeled.find(",region") != std::string::npos);

  // both labels appear: the cloud straddles its own principal center
  eqh_catalog* catalog = nullptr;
  REQUIRE(eqh_catalog_load((dir / "labeled.csv").c_str(), 0.0, &catalog) ==
          EQH_OK);
  int seen[3] = {0, 0, 0};
  for (size_t i = 0; i < eqh_catalog_size(catalog); ++i) {
    int region = 0;
    eqh_catalog_event(catalog, i, nullptr, nullptr, nullptr, nullptr, &region);
    REQUIRE((region == 1 || region == 2));
    seen[region] = 1;
  }
  CHECK(seen[1] == 1);
  CHECK(seen[2] == 1);
  eqh_catalog_free(catalog);
}

TEST_CASE("fit --region-mode labels consumes a simulated joint catalog") {
  TempDir dir("./cli_joint");
  std::ofstream(dir / "truth.json")
      << R"({
  "n_states": 2,
  "pi": [0.5, 0.5],
  "trans": [0.7, 0.3, 0.2, 0.8],
  "lambda": [2.0, 15.0],
  "region_dist": [0.9, 0.1, 0.2, 0.8]
})";
  std::ofstream(dir / "fit.json")
      << R"({"init_grid": [[2.0, 20.0]], "coarse_iters": 25})";
  std::string out;
  REQUIRE(run_cli("--seed 21 simulate --params " + (dir / "truth.json") +
                      " --n-events 220 --out " + (dir / "catalog.csv"),
                  &out) == 0);
  CHECK(slurp(dir / "catalog.csv").find(",region,") != std::string::npos);
  REQUIRE(run_cli("--out-dir " + dir.path.string() + " fit --catalog " +
                      (dir / "catalog.csv") +
                      " --states 2 --region-mode labels --config " +
                      (dir / "fit.json"),
                  &out) == 0);
  eqh_params* fitted = nullptr;
  REQUIRE(eqh_params_load((dir / "params.json").c_str(), &fitted) == EQH_OK);
  CHECK(eqh_params_n_regions(fitted) == 2);
  eqh_params_free(fitted);

  // without --region-mode the same catalog fits a time-only model
  REQUIRE(run_cli("--out-dir " + dir.path.string() + " fit --catalog " +
                      (dir / "catalog.csv") + " --states 2 --config " +
                      (dir / "fit.json"),
                  &out) == 0);
  eqh_params* plain = nullptr;
  REQUIRE(eqh_params_load((dir / "params.json").c_str(), &plain) == EQH_OK);
  CHECK(eqh_params_n_regions(plain) == 0);
  eqh_params_free(plain);
}

TEST_CASE("a long-elapsed forecast sits at the slow-state floor") {
  TempDir dir("./cli_floor");
  std::ofstream(dir / "params.json") << kReferenceParams;
  // the last event is ancient, so the weights collapse onto the slow state
  std::ofstream(dir / "catalog.csv")
      << "date,magnitude,latitude,longitude\n"
         "2000-01-01,4.5,34.0,-118.0\n"
         "2000-01-04,4.5,34.0,-118.0\n"
         "2000-01-09,4.5,34.0,-118.0\n"
         "2000-02-01,4.5,34.0,-118.0\n";
  std::string out;
  REQUIRE(run_cli("forecast --params " + (dir / "params.json") +
                      " --catalog " + (dir / "catalog.csv") +
                      " --date 2002-01-01 --horizons 1",
                  &out) == 0);
  const auto pos = out.find("N=1 P=");
  REQUIRE(pos != std::string::npos);
  const double prob = std::stod(out.substr(pos + 6));
  CHECK(std::abs(prob - 0.0463) < 5e-4);
}

TEST_CASE("evaluate writes the documented files and a manifest") {
  TempDir dir("./cli_eval");
  std::ofstream(dir / "params.json") << kReferenceParams;
  std::string out;
  REQUIRE(run_cli("--seed 5 simulate --params " + (dir / "params.json") +
                      " --n-events 250 --out " + (dir / "catalog.csv"),
                  &out) == 0);
  std::ofstream(dir / "eval.json")
      << "{\"warmup_events\": 25, \"forecast_start\": \"2002-01-01\","
         " \"forecast_end\": \"2005-01-01\", \"horizons\": [1, 5],"
         " \"split_low_count\": 0.9}";
  REQUIRE(run_cli("--out-dir " + dir.path.string() + " evaluate --params " +
                      (dir / "params.json") + " --catalog " +
                      (dir / "catalog.csv") + " --eval-config " +
                      (dir / "eval.json"),
                  &out) == 0);
  for (const char* name :
       {"daily_forecasts.csv", "summary_h1.csv", "summary_h5.csv",
        "sorted_h1.csv", "tables.txt", "manifest.json"})
    CHECK(fs::exists(dir / name));
  const std::string manifest = slurp(dir / "manifest.json");
  CHECK(manifest.find("\"command\": \"evaluate\"") != std::string::npos);
  CHECK(manifest.find("fnv1a64") != std::string::npos);
}
