#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "tactile/config_io.hpp"
#include "tactile/dataset_io.hpp"

using namespace tactile;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string("\"") + TACTILE_CLI + "\" " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[512];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path root() {
  static const fs::path p = [] {
    const fs::path d = fs::temp_directory_path() / "tactile_unit_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

std::string out_flag(const std::string& name) { return "--out \"" + (root() / name).string() + "\" "; }

}  // namespace

TEST_CASE("collect a THT training grid and calibrate a kernel ridge model") {
  const Result c = run(out_flag("grid") + "collect --build tht --purpose train --lighting dark --seed 7 --rays 60 --descent-only");
  REQUIRE(c.code == 0);
  CHECK(c.out.find("121 events") != std::string::npos);
  const Dataset ds = load_dataset(root() / "grid" / "dataset");
  CHECK(ds.schedule.events.size() == 121);
  CHECK(fs::exists(root() / "grid" / "manifest.json"));

  const Result t = run(out_flag("model") + "train --data \"" + (root() / "grid" / "dataset").string() +
                       "\" --model krr --calibrate --calibration-rows 200 --max-rows 1500");
  REQUIRE(t.code == 0);
  const Json cal = Json::parse(read_file(root() / "model" / "calibration.json"));
  CHECK(cal["lambda"].get<double>() > 0.0);
  CHECK(cal["sigma"].get<double>() > 0.0);
  CHECK(cal["hardware_reference"].size() == 2);
  CHECK(cal["cells"].size() == 225);
  CHECK(fs::exists(root() / "model" / "model.json"));

  const Result e = run(out_flag("eval") + "evaluate --model \"" + (root() / "model" / "model").string() + "\" --data \"" +
                       (root() / "grid" / "dataset").string() + "\"");
  CHECK(e.code == 0);
  CHECK(fs::exists(root() / "eval" / "error_table.csv"));

  // A model used against another build's data is a digest mismatch.
  REQUIRE(run(out_flag("res") + "collect --build resistive --purpose test --events 2").code == 0);
  const Result bad = run(out_flag("bad") + "predict --model \"" + (root() / "model" / "model").string() + "\" --data \"" +
                         (root() / "res" / "dataset").string() + "\"");
  CHECK(bad.code == 5);
}

TEST_CASE("thickness sweep reports five curves") {
  const Result r = run(out_flag("sweep") + "sweep-thickness --thicknesses 5,7,8,10,12 --rays 500 --step 0.5");
  REQUIRE(r.code == 0);
  const std::string bands = read_file(root() / "sweep" / "sweep" / "dead_bands.csv");
  CHECK(std::count(bands.begin(), bands.end(), '\n') == 6);
}

TEST_CASE("run files mirror flags and explicit flags win") {
  const fs::path run_file = root() / "run.json";
  write_file_atomic(run_file, R"({"command": "collect", "build": "resistive", "purpose": "test", "events": 5, "seed": 3})");
  REQUIRE(run(out_flag("runfile") + "--run \"" + run_file.string() + "\"").code == 0);
  CHECK(load_dataset(root() / "runfile" / "dataset").schedule.events.size() == 5);
  REQUIRE(run(out_flag("override") + "collect --run \"" + run_file.string() + "\" --events 2").code == 0);
  CHECK(load_dataset(root() / "override" / "dataset").schedule.events.size() == 2);
}

TEST_CASE("the output root defaults to the environment variable") {
  const fs::path env_root = root() / "env";
  const std::string cmd = "TACTILE_OUTPUT_ROOT=\"" + env_root.string() + "\" \"" + TACTILE_CLI + "\" layout --build smt > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(env_root / "config.json"));
}

TEST_CASE("distinct exit codes") {
  CHECK(run("layout --bogus").code == 2);
  CHECK(run("collect --build nowhere").code == 2);
  CHECK(run(out_flag("missing") + "train --data /nonexistent/ds").code == 4);
  CHECK(run(out_flag("neg") + "collect --build resistive --purpose test --events 1 --pitch -1").code == 2);
  const Result r = run(out_flag("missing") + "train --data /nonexistent/ds");
  CHECK(r.out.find("\"error\":\"missing_input\"") != std::string::npos);
}

TEST_CASE("layout writes a loadable configuration") {
  REQUIRE(run(out_flag("layout") + "layout --build tht_large").code == 0);
  CHECK(load_config(root() / "layout" / "config.json").build == "tht_large");
}
