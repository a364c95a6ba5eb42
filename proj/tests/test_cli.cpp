#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "weibayes/cli.hpp"

using namespace weibayes;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "weibayes");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("help and usage errors") {
  const Result help = run({"--help"});
  CHECK(help.code == 0);
  CHECK((help.out + help.err).find("simulate") != std::string::npos);
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"mrl", "--shape", "1.4"}).code == 1);
  CHECK(run({"--format", "xml", "mrl", "--shape", "1", "--scale", "1"}).code == 1);
}

TEST_CASE("mrl table") {
  const Result r = run({"mrl", "--shape", "1.43", "--scale", "40.34", "--times", "2,48"});
  CHECK(r.code == 0);
  CHECK(r.out == "time,mrl\n2,35.14\n48,22.64\n");
  CHECK(run({"mrl", "--shape", "-1", "--scale", "1"}).code == 1);
  CHECK(run({"mrl", "--shape", "1", "--scale", "1", "--times", "-3"}).code == 1);
}

TEST_CASE("fit command") {
  const Result r = run({"fit", "--data", "3 1 2 5 4 7 8 2.5", "--models", "classical"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("model,shape,scale,sampling_variance,V,WRE,r_hat,divergences\n", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);
  CHECK(r.out.find("\nMLE,") != std::string::npos);
  CHECK(run({"fit", "--data", "3 1 2 5 4 7 8 2.5", "--models", "mle,bogus"}).code == 1);
  CHECK(run({"fit", "--data", "x y z"}).code == 1);
  CHECK(run({"fit", "--data", "1 1 1 1 1", "--models", "mle"}).code == 2);
}

TEST_CASE("ppc and adapt argument checks") {
  CHECK(run({"ppc", "--data", "1 2 3 4 5 6", "--model", "Gamma-Gamma", "--bins", "0"}).code == 1);
  CHECK(run({"ppc", "--data", "1 2 3 4 5 6", "--model", "mle"}).code == 1);
  CHECK(run({"adapt", "--data", "1 2 3 4 5 6", "--model", "Gamma-Gamma", "--rounds", "0"}).code == 1);
}

TEST_CASE("simulate writes reports") {
  const fs::path dir = fs::temp_directory_path() / "weibayes_cli_sim";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << R"({
    "sample_sizes": [15], "shape_grids": {"DHR": [], "IHR": [1.5]},
    "models": ["mle", "moments", "regression", "Gamma-Gamma"],
    "bootstrap_B": 100, "seed": 3,
    "sampler": {"iterations": 300, "warmup": 150}
  })";
  const Result r = run({"--config", (dir / "config.json").string(), "--out", (dir / "out").string(), "simulate"});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out" / "report" / "wre_ihr_15.csv"));
  CHECK(fs::exists(dir / "out" / "report" / "awre.csv"));
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(run({"--config", (dir / "missing.json").string(), "simulate"}).code == 1);
}
