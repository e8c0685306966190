#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gclab/lab/runner.hpp"

using namespace gclab;
using namespace gclab::lab;
namespace fs = std::filesystem;

namespace {

const char* kChainSpec = R"({"kind": "MARKOV", "label": "chain", "states": [0, 1],
                             "transition": [[0.7, 0.3], [0.2, 0.8]]})";

std::string config_text(const std::string& id, const std::string& task, const std::string& params,
                        const std::string& spec = kChainSpec) {
  return R"({"experiment_id": ")" + id + R"(", "task": ")" + task + R"(", "seed": 7, "spec": )" +
         spec + R"(, "params": )" + params + "}";
}

struct Sandbox {
  fs::path root;
  Sandbox() {
    root = fs::temp_directory_path() / ("gclab_test_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    ::setenv(kOutputRootEnv, root.c_str(), 1);
  }
  ~Sandbox() { fs::remove_all(root); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = root / name;
    std::ofstream(p) << text;
    return p;
  }
};

int cli(const std::string& args) {
  const std::string cmd = std::string(GCLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cli_output(const std::string& args) {
  const std::string cmd = std::string(GCLAB_CLI_PATH) + " " + args + " 2>&1";
  std::string out;
  if (FILE* pipe = ::popen(cmd.c_str(), "r")) {
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe)) out += buf;
    ::pclose(pipe);
  }
  return out;
}

}  // namespace

TEST_CASE("config round-trip is field-by-field identical", "[lab]") {
  const std::vector<std::string> texts = {
      config_text("a", "GCIP_SCAN", R"({"delta": 1, "q_max": 64, "x_grid": [0.5]})"),
      config_text("b", "KS_STUDY", R"({"n_grid": [10, 100], "reps": 5, "threads": 2})",
                  R"({"kind": "IID", "marginal": {"type": "NORMAL", "mean": 1.5, "sd": 0.1}})"),
      config_text("c", "GENERATE", R"({"n": 10, "stream": 3})",
                  R"({"kind": "AR1", "rho": 0.25})"),
      config_text("d", "ENTROPY", R"({"epsilons": [0.5, 0.1], "metric": "ABS", "set_class": "intervals",
                                     "vc_universe": [1, 2, 3], "vc_max_n": 4})",
                  R"({"kind": "M_DEPENDENT", "m": 2, "base": {"type": "UNIFORM"}})"),
      config_text("e", "GC_VERDICT",
                  R"({"injected_covariance": {"gamma0": 0.25, "scale": 0.2, "exponent": 0.2}})",
                  R"({"kind": "IID", "marginal": {"type": "DISCRETE", "values": [0, 1], "probs": [0.4, 0.6]}})"),
  };
  for (const auto& t : texts) {
    const auto a = parse_config(t);
    const auto text2 = serialize_config(a);
    const auto b = parse_config(text2);
    REQUIRE(a == b);
    REQUIRE(serialize_config(b) == text2);
    REQUIRE(config_digest(a) == config_digest(b));
  }
  const auto c = parse_config(texts[0]);
  REQUIRE(c.output_dir == "a");
  REQUIRE(c.task == Task::kGcipScan);
  REQUIRE(c.params.q_max == std::optional<std::size_t>{64});
  REQUIRE(c.spec.markov_model()->stationary()[0] == Catch::Approx(0.4));
}

TEST_CASE("config schema violations", "[lab]") {
  REQUIRE_THROWS_AS(parse_config("{not json"), ParseError);
  REQUIRE_THROWS_AS(parse_config(config_text("x", "GENERATE", R"({"n": 5, "bogus": 1})")), ValidationError);
  REQUIRE_THROWS_AS(parse_config(config_text("x", "GENERATE", R"({"n": -5})")), ValidationError);
  REQUIRE_THROWS_AS(parse_config(config_text("x", "GENERATE", R"({"n": "5"})")), ValidationError);
  REQUIRE_THROWS_AS(parse_config(config_text("x", "FLY", "{}")), ValidationError);
  REQUIRE_THROWS_AS(parse_config(config_text("x", "GENERATE", "{}", R"({"kind": "IID",
      "marginal": {"type": "UNIFORM", "width": 2}})")), ValidationError);
  REQUIRE_THROWS_AS(parse_config(config_text("x", "GENERATE", "{}", R"({"kind": "MARKOV",
      "states": [0, 1], "transition": [[0.5, 0.6], [0.5, 0.5]]})")), ValidationError);
  REQUIRE_THROWS_AS(parse_config(R"({"experiment_id": "x", "task": "GENERATE", "spec": {"kind": "AR1",
      "rho": 0.1}, "extra": true})"), ValidationError);
  REQUIRE_THROWS_AS(parse_config(R"({"task": "GENERATE", "spec": {"kind": "AR1", "rho": 0.1}})"),
                    ValidationError);
}

TEST_CASE("pre-flight validation categories", "[lab]") {
  REQUIRE_THROWS_AS(validate_config(parse_config(config_text("x", "GENERATE", "{}"))), ValidationError);
  REQUIRE_THROWS_AS(validate_config(parse_config(config_text("x", "ENTROPY", R"({"vc_max_n": 13})"))),
                    FeasibilityError);
  REQUIRE_THROWS_AS(validate_config(parse_config(config_text("x", "GCIP_SCAN", R"({"delta": 3.5})"))),
                    ValidationError);
  REQUIRE_THROWS_AS(validate_config(parse_config(config_text(
                        "x", "MIXING_PROFILE", R"({"coefficients": ["BETA"]})", R"({"kind": "AR1", "rho": 0.5})"))),
                    ValidationError);
  REQUIRE_NOTHROW(validate_config(parse_config(config_text("x", "MIXING_PROFILE", R"({"delta": 0.5})"))));
}

TEST_CASE("GENERATE writes n rows and a run record", "[lab]") {
  Sandbox box;
  const auto rec = run(parse_config(config_text("gen", "GENERATE", R"({"n": 25})")));
  REQUIRE(rec.output_dir == box.root / "gen");
  std::ifstream is(rec.output_dir / "path.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(is, line)) ++lines;
  REQUIRE(lines == 26);
  REQUIRE(fs::exists(rec.output_dir / kRunRecordName));
  for (const auto& m : rec.manifest)
    REQUIRE(fnv1a_hex(read_file(rec.output_dir / m.file)) == m.digest);
}

TEST_CASE("GCIP_SCAN on the two-state chain is bounded", "[lab]") {
  Sandbox box;
  const auto rec = run(parse_config(config_text("scan", "GCIP_SCAN", R"({"delta": 1, "q_max": 128})")));
  REQUIRE(rec.summary.at("s1_verdict") == "BOUNDED");
  REQUIRE(rec.summary.at("s2_verdict") == "BOUNDED");
  REQUIRE(fs::exists(rec.output_dir / "gcip.csv"));
  REQUIRE(fs::exists(rec.output_dir / "gcip_summary.json"));
}

TEST_CASE("identical configs give byte-identical CSVs", "[lab][repro]") {
  Sandbox box;
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"KS_STUDY", R"({"n_grid": [50, 200], "reps": 20, "threads": 3})"},
      {"GCIP_SCAN", R"({"mode": "MONTE_CARLO", "reps": 300, "q_max": 8, "threads": 4})"},
      {"MIXING_PROFILE", R"({"delta": 0.5})"},
  };
  for (const auto& [task, params] : cases) {
    auto cfg = parse_config(config_text("r1", task, params));
    const auto a = run(cfg);
    cfg.output_dir = "r2";
    cfg.params.threads = 1;
    const auto b = run(cfg);
    std::size_t csvs = 0;
    for (const auto& m : a.manifest) {
      if (fs::path(m.file).extension() != ".csv") continue;
      ++csvs;
      REQUIRE(read_file(a.output_dir / m.file) == read_file(b.output_dir / m.file));
    }
    REQUIRE(csvs >= 1);
  }
}

TEST_CASE("CLI exit codes", "[lab][cli]") {
  Sandbox box;
  SECTION("malformed JSON exits 2 and writes nothing") {
    const auto p = box.write("bad.json", R"({"experiment_id": "bad", "task": )");
    REQUIRE(cli("run " + p.string()) == 2);
    REQUIRE_FALSE(fs::exists(box.root / "bad"));
  }
  SECTION("validation error exits 3") {
    const auto p = box.write("v.json", config_text("v", "GENERATE", "{}"));
    REQUIRE(cli("validate " + p.string()) == 3);
    REQUIRE(cli("run " + p.string()) == 3);
    REQUIRE_FALSE(fs::exists(box.root / "v"));
  }
  SECTION("feasibility error exits 4") {
    const auto p = box.write("f.json", config_text("f", "ENTROPY", R"({"vc_max_n": 20})"));
    REQUIRE(cli("run " + p.string()) == 4);
  }
  SECTION("missing config file is a parse error") { REQUIRE(cli("run /nonexistent/config.json") == 2); }
  SECTION("report on an empty directory exits 3") {
    fs::create_directories(box.root / "empty");
    REQUIRE(cli("report " + (box.root / "empty").string()) == 3);
  }
  SECTION("report on a tampered run exits 3") {
    const auto p = box.write("g.json", config_text("g", "GENERATE", R"({"n": 5})"));
    REQUIRE(cli("run " + p.string()) == 0);
    REQUIRE(cli("report " + (box.root / "g").string()) == 0);
    std::ofstream(box.root / "g" / "path.csv", std::ios::app) << "6,0\n";
    REQUIRE(cli("report " + (box.root / "g").string()) == 3);
  }
  SECTION("valid config validates") {
    const auto p = box.write("ok.json", config_text("ok", "GCIP_SCAN", "{}"));
    REQUIRE(cli("validate " + p.string()) == 0);
    REQUIRE_FALSE(fs::exists(box.root / "ok"));
  }
}

TEST_CASE("report digests", "[lab][cli]") {
  Sandbox box;
  SECTION("KS study prints per-n means and the fitted exponent") {
    const auto p = box.write("ks.json", config_text("ks", "KS_STUDY", R"({"n_grid": [100, 1000], "reps": 30})",
                                                    R"({"kind": "IID", "marginal": {"type": "UNIFORM"}})"));
    REQUIRE(cli("run " + p.string()) == 0);
    const auto out = cli_output("report " + (box.root / "ks").string());
    REQUIRE(out.find("n=100 ") != std::string::npos);
    REQUIRE(out.find("n=1000 ") != std::string::npos);
    REQUIRE(out.find("fitted b=") != std::string::npos);
    REQUIRE(out.find("DKW tail check: PASS") != std::string::npos);
  }
  SECTION("GC verdict prints the checklist") {
    const auto p = box.write("gc.json", config_text("gc", "GC_VERDICT", "{}"));
    REQUIRE(cli("run " + p.string()) == 0);
    const auto out = cli_output("report " + (box.root / "gc").string());
    REQUIRE(out.find("SUFFICIENT_CONDITIONS_VERIFIED") != std::string::npos);
    for (const char* id : {"(a1) pass", "(a2) pass", "(b1) pass", "(b2) pass"})
      REQUIRE(out.find(id) != std::string::npos);
  }
  SECTION("mixing report compares the fitted rate with the threshold") {
    const auto p = box.write("mx.json", config_text("mx", "MIXING_PROFILE", R"({"delta": 0.5})"));
    REQUIRE(cli("run " + p.string()) == 0);
    const auto out = cli_output("report " + (box.root / "mx").string());
    REQUIRE(out.find("BETA-decay a=inf (geometric) >= required 3 for delta=0.5 -> SATISFIED") !=
            std::string::npos);
  }
}
