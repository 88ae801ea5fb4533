#include <doctest.h>

#include <stdexcept>
#include <tuple>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "clusterpool/cli.hpp"

using namespace clusterpool;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("clusterpool_cli_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
};

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "clusterpool");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("help and usage errors") {
  std::string text;
  CHECK(cli({"--help"}, &text) == kExitOk);
  for (const char* sub : {"synth-mse", "synth-newsvendor", "real-data", "surface", "diagnose"})
    CHECK(text.find(sub) != std::string::npos);
  CHECK(cli({"frobnicate"}, &text) == kExitUsage);
  CHECK(text.find("Usage") != std::string::npos);
  CHECK(cli({}) == kExitUsage);
  CHECK(cli({"surface"}) == kExitUsage);
}

TEST_CASE("config errors exit 3") {
  TempDir t;
  CHECK(cli({"surface", "--config", (t.path / "missing.ini").string(), "--out", t.path.string()}) == kExitConfig);
  const auto typo = t.write("typo.ini", "[surface]\nsigmaa = 3\n");
  std::string text;
  CHECK(cli({"surface", "--config", typo, "--out", t.path.string()}, &text) == kExitConfig);
  CHECK(text.find("sigmaa") != std::string::npos);
  const auto bad = t.write("bad.ini", "[experiment]\nmethods = saa, nope\n");
  CHECK(cli({"synth-newsvendor", "--config", bad, "--out", t.path.string()}) == kExitConfig);
  const auto invalid = t.write("invalid.ini", "[generator]\nmu_low = 200\n");
  CHECK(cli({"synth-newsvendor", "--config", invalid, "--out", t.path.string()}) == kExitConfig);
}

TEST_CASE("happy path writes reports and a manifest") {
  TempDir t;
  const auto cfg = t.write("nv.ini",
                           "# small run\n[generator]\nK = 40\n[experiment]\nreplications = 2\nseed = 5\n"
                           "methods = saa, direct, cluster\n[output]\ndump_instance = true\n");
  const auto out = (t.path / "out").string();
  REQUIRE(cli({"synth-newsvendor", "--config", cfg, "--out", out}) == kExitOk);
  const auto report = slurp(fs::path(out) / "report.csv");
  CHECK(report.rfind("method,replication,K,N,n1,cost_model,total_cost,rel_advantage_pct,detail\n", 0) == 0);
  CHECK(slurp(fs::path(out) / "aggregate.csv").rfind("method,K,N,n1,mean_cost,se_cost,mean_rel_adv,se_rel_adv\n", 0) ==
        0);
  for (const char* f : {"manifest.txt", "instance.csv", "truth.csv", "clusters.csv", "cluster_tree.txt", "decisions.csv"})
    CHECK(fs::exists(fs::path(out) / f));
  CHECK(slurp(fs::path(out) / "manifest.txt").find("seed = 5") != std::string::npos);

  const auto out2 = (t.path / "out2").string();
  REQUIRE(cli({"synth-newsvendor", "--config", cfg, "--out", out2}) == kExitOk);
  CHECK(slurp(fs::path(out2) / "report.csv") == report);

  const auto out3 = (t.path / "out3").string();
  REQUIRE(cli({"synth-newsvendor", "--config", cfg, "--out", out3, "--seed", "6"}) == kExitOk);
  CHECK(slurp(fs::path(out3) / "report.csv") != report);
}

TEST_CASE("method failure exits 4 after writing reports") {
  TempDir t;
  const auto cfg = t.write("f.ini", "[generator]\nK = 20\n[experiment]\nmethods = saa, cluster-true\n");
  const auto out = (t.path / "out").string();
  CHECK(cli({"synth-newsvendor", "--config", cfg, "--out", out}) == kExitRuntime);
  CHECK(fs::exists(fs::path(out) / "report.csv"));
}

TEST_CASE("real-data workflow") {
  TempDir t;
  std::ostringstream csv;
  csv << "problem_id,period,value\n";
  for (int p = 0; p < 12; ++p)
    for (int d = 0; d < 14; ++d) csv << "sku" << p << ',' << d << ',' << (p < 6 ? 20 : 80) + (d * 7 + p * 3) % 11 << '\n';
  csv << "short,1,4\n";
  const auto data = t.write("sales.csv", csv.str());
  const auto cfg = t.write("rd.ini", "[data]\npath = " + data +
                                         "\nn_train = 10\n[experiment]\nreplications = 3\nn1 = 2\n"
                                         "methods = saa, direct, cluster, cluster:quantile, dac\n");
  const auto out = (t.path / "out").string();
  REQUIRE(cli({"real-data", "--config", cfg, "--out", out}) == kExitOk);
  CHECK(slurp(fs::path(out) / "manifest.txt").find("dropped") != std::string::npos);

  const auto broken = t.write("broken.csv", "problem_id,period,value\na,1,x\n");
  const auto cfg2 = t.write("rd2.ini", "[data]\npath = " + broken + "\n");
  std::string text;
  CHECK(cli({"real-data", "--config", cfg2, "--out", out}, &text) == kExitRuntime);
  CHECK(text.find("line 2") != std::string::npos);
}

TEST_CASE("surface, diagnose and relloss outputs") {
  TempDir t;
  const auto s = t.write("s.ini", "[surface]\nn1 = 1, 2\nd = 0, 1\n");
  REQUIRE(cli({"surface", "--config", s, "--out", (t.path / "s").string()}) == kExitOk);
  CHECK(slurp(t.path / "s" / "surface.csv").rfind("n1,d,direct_cost,cluster_cost,delta,method", 0) == 0);

  const auto d = t.write("d.ini", "[diagnose]\nreplications = 200\n[generator]\nK = 50\n");
  REQUIRE(cli({"diagnose", "--config", d, "--out", (t.path / "d").string()}) == kExitOk);
  CHECK(slurp(t.path / "d" / "diagnose.csv").find("ols_slope") != std::string::npos);

  const auto r = t.write("r.ini",
                         "[generator]\nK = 100\n[experiment]\nmode = relloss\nseed = 2\n"
                         "[relloss]\nk_values = 5, 20\nreplications = 3\n");
  REQUIRE(cli({"synth-newsvendor", "--config", r, "--out", (t.path / "r").string()}) == kExitOk);
  CHECK(fs::exists(t.path / "r" / "relloss_summary.csv"));
}
