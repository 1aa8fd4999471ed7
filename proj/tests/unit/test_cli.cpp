#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace skewifs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("skewifs_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump();
  return p;
}

int invoke(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "skewifs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  const cli::RunConfig d = cli::parse_config(json::object());
  CHECK(d.lambda == 0.48);
  CHECK(d.potentials == "quad; tent");
  CHECK(d.grid_n == 8192);
  CHECK(d.lambda_schedule == std::vector<double>{0.9, 0.99, 0.999});
  CHECK(d.oracle_len == 12);

  const cli::RunConfig c = cli::parse_config(json{{"lambda", 0.3}, {"seed", 9}, {"control", {0, 1, 1}}});
  CHECK(c.lambda == 0.3);
  CHECK(c.seed == 9);
  CHECK(c.control == std::vector<int>{0, 1, 1});
  CHECK(cli::parse_config(cli::to_json(c)).seed == 9);

  CHECK_THROWS_AS(cli::parse_config(json{{"lamda", 0.3}}), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json{{"lambda", "big"}}), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json{{"lambda", 1.0}}), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json{{"grid_n", 1001}}), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json{{"grid_n", -4}}), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json{{"lambda_schedule", {0.9, 0.8}}}), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json{{"oracle_len", 20}}), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json::array()), cli::ConfigError);
}

TEST_CASE("exact decimals") {
  CHECK(cli::exact_decimal(0.2472135954) == CirclePoint::rational(2472135954ULL, 10000000000ULL));
  CHECK(cli::exact_decimal(0.25) == CirclePoint::rational(1, 4));
  CHECK(cli::exact_decimal(-0.25) == CirclePoint::rational(3, 4));
  CHECK(cli::exact_decimal(1.1) == CirclePoint::rational(1, 10));
  CHECK(cli::exact_decimal(3.0) == CirclePoint{});
  CHECK(cli::exact_decimal(1e-5) == CirclePoint::rational(1, 100000));
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  const fs::path good = write_config(dir, json{{"potentials", "const 1"}, {"grid_n", 64}});
  std::string err;
  CHECK(invoke({"verify", "--config", (dir / "missing.json").string()}, nullptr, &err) == cli::kConfigError);
  CHECK(err.find("config error") != std::string::npos);
  CHECK(invoke({"nonsense", "--config", good.string()}) == cli::kConfigError);
  CHECK(invoke({"verify"}) == cli::kConfigError);

  std::ofstream(dir / "unknown.json") << R"({"lambda": 0.5, "colour": 3})";
  CHECK(invoke({"orbit", "--config", (dir / "unknown.json").string(), "--out", dir.string()}) == cli::kConfigError);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(invoke({"orbit", "--config", (dir / "broken.json").string(), "--out", dir.string()}) == cli::kConfigError);
  std::ofstream(dir / "bad_potential.json") << R"({"potentials": "quad; wobble"})";
  CHECK(invoke({"orbit", "--config", (dir / "bad_potential.json").string(), "--out", dir.string()}, nullptr, &err) ==
        cli::kConfigError);
  CHECK(err.find("wobble") != std::string::npos);
  CHECK(invoke({"orbit", "--config", good.string(), "--lambda", "1.5", "--out", dir.string()}) == cli::kConfigError);
  const fs::path deep = write_config(dir, json{{"potentials", "quad; tent"}, {"enum_depth", 14}, {"enum_grid", 256}});
  CHECK(invoke({"attractor", "--config", deep.string(), "--out", dir.string()}) == cli::kConfigError);
}

TEST_CASE("verify on a constant family") {
  const fs::path dir = scratch("verify");
  const fs::path cfg = write_config(dir, json{{"potentials", "const 1"}, {"grid_n", 256}, {"n_points", 2000}});
  std::string out;
  CHECK(invoke({"verify", "--config", cfg.string(), "--out", dir.string()}, &out) == cli::kOk);
  CHECK(out.find("FAIL") == std::string::npos);
  const json doc = json::parse(slurp(dir / "verify.json"));
  CHECK(doc.at("passed").get<bool>());
  CHECK(doc.at("config_hash").get<std::string>().size() == 16);
}

TEST_CASE("attractor and limit outputs") {
  const fs::path dir = scratch("outputs");
  const fs::path cfg = write_config(dir, json{{"grid_n", 512}, {"oracle_len", 8}});
  CHECK(invoke({"attractor", "--config", cfg.string(), "--out", dir.string()}) == cli::kOk);
  CHECK(line_count(dir / "attractor_chaos.csv") == 10001);
  CHECK(fs::exists(dir / "attractor.svg"));
  const json meta = json::parse(slurp(dir / "attractor_chaos.json"));
  CHECK(meta.at("command") == "attractor");
  CHECK(meta.at("seed") == 1);
  CHECK(meta.at("rows") == 10000);

  CHECK(invoke({"limit", "--config", cfg.string(), "--out", dir.string()}) == cli::kOk);
  CHECK(line_count(dir / "limit.csv") == 4);
}

TEST_CASE("reruns are byte-identical") {
  const fs::path a = scratch("rerun_a");
  const fs::path b = scratch("rerun_b");
  const json doc{{"grid_n", 256}, {"n_points", 3000}, {"srb_samples", 2000}, {"n_trials", 3}, {"n_steps", 2000}};
  const fs::path cfg = write_config(a, doc);
  for (const char* sub : {"orbit", "attractor", "srb"}) {
    REQUIRE(invoke({sub, "--config", cfg.string(), "--out", a.string()}) == cli::kOk);
    REQUIRE(invoke({sub, "--config", cfg.string(), "--out", b.string(), "--workers", "3"}) == cli::kOk);
  }
  for (const char* file : {"orbit.csv", "orbit.json", "attractor_chaos.csv", "attractor_enumerate.csv", "srb.json"})
    CHECK_MESSAGE(slurp(a / file) == slurp(b / file), file);
  REQUIRE(invoke({"orbit", "--config", cfg.string(), "--out", b.string(), "--seed", "2"}) == cli::kOk);
  CHECK(slurp(a / "orbit.csv") != slurp(b / "orbit.csv"));
}
