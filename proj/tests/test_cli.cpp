#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dealer/cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using dealer::cli::run;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const auto p = dir / "config.ini";
  std::ofstream(p) << body;
  return p;
}

const fs::path kConfigs = fs::path(DEALERLAB_SOURCE_DIR) / "configs";

}  // namespace

TEST_CASE("usage errors exit with the config code") {
  CHECK(invoke({}).code == dealer::cli::kExitConfig);
  CHECK(invoke({"no-such-command"}).code == dealer::cli::kExitConfig);
  CHECK(invoke({"liquidation", "--steps", "0"}).code == dealer::cli::kExitConfig);
  CHECK(invoke({"liquidation", "--bogus"}).code == dealer::cli::kExitConfig);
  CHECK(invoke({"welfare", "--lambda", "abc"}).code == dealer::cli::kExitConfig);
  CHECK(invoke({"welfare", "--lambda", "-1"}).code == dealer::cli::kExitConfig);
  CHECK(invoke({"liquidation", "--config", "/nonexistent/file.ini"}).code == dealer::cli::kExitConfig);
  CHECK(invoke({"equilibrium"}).code == dealer::cli::kExitConfig);
}

TEST_CASE("version flag") {
  const auto r = invoke({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out.find(dealer::cli::version()) != std::string::npos);
}

TEST_CASE("config files are checked strictly") {
  const auto dir = testing::scratch_dir("cli_cfg");
  const auto bad_key = write_config(dir, "[scenario]\nrho_c = 0.1\nrhoo_d = 0.2\n");
  const auto r = invoke({"liquidation", "--config", bad_key.string(), "--out", (dir / "o").string()});
  CHECK(r.code == dealer::cli::kExitConfig);
  CHECK(r.err.find("rhoo_d") != std::string::npos);

  const auto bad_value = write_config(dir, "[scenario]\nrho_c = -0.1\n");
  CHECK(invoke({"liquidation", "--config", bad_value.string(), "--out", (dir / "o").string()}).code ==
        dealer::cli::kExitConfig);

  const auto no_access = write_config(dir, "[market]\nsteps = 10\n[agent:a]\nmass = 1\nrho = 0.1\ncost = inf\n");
  CHECK(invoke({"equilibrium", "--config", no_access.string(), "--out", (dir / "o").string()}).code ==
        dealer::cli::kExitConfig);
  fs::remove_all(dir);
}

TEST_CASE("numerical failures exit with code 2") {
  const auto dir = testing::scratch_dir("cli_num");
  const auto cfg = write_config(dir, "[scenario]\nsigma_xi = 0\nregression_steps = 50\n");
  const auto r = invoke({"diffusive", "--config", cfg.string(), "--paths", "4", "--out", (dir / "o").string()});
  CHECK(r.code == dealer::cli::kExitNumerical);
  CHECK(r.err.find("numerical") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("liquidation figure files") {
  const auto dir = testing::scratch_dir("cli_liq");
  REQUIRE(invoke({"liquidation", "--out", dir.string()}).code == 0);
  const auto k = testing::read_csv(dir / "fig1_strategies.csv");
  REQUIRE(k.header == std::vector<std::string>{"t", "K_c_M1", "K_c_Minf"});
  CHECK(k.rows.size() == 1001u);
  CHECK(k.rows[0] == std::vector<double>{0.0, -0.5, -0.5});
  REQUIRE(k.comments.size() == 3u);
  CHECK(k.comments[0].find(dealer::cli::version()) != std::string::npos);
  CHECK(k.comments[1].find("seed=0") != std::string::npos);
  CHECK(k.comments[1].find("grid=") != std::string::npos);
  CHECK(k.comments[2].find("lambda=0.1") != std::string::npos);

  const auto p = testing::read_csv(dir / "fig1_price.csv");
  CHECK(p.rows[0][1] == doctest::Approx(-0.70710).epsilon(1e-5));
  CHECK(p.rows[0][2] == doctest::Approx(-0.5).epsilon(1e-6));

  std::ifstream js(dir / "liquidation_report.json");
  const auto doc = nlohmann::json::parse(js);
  CHECK(doc["version"] == dealer::cli::version());
  fs::remove_all(dir);
}

TEST_CASE("welfare ratio at small lambda") {
  const auto dir = testing::scratch_dir("cli_wel");
  REQUIRE(invoke({"welfare", "--lambda", "1e-6", "--out", dir.string()}).code == 0);
  const auto w = testing::read_csv(dir / "fig3_welfare.csv");
  CHECK(w.rows.size() == 20u);
  CHECK(w.rows[0][w.column("ratio")] == doctest::Approx(1.276).epsilon(1e-3));
  fs::remove_all(dir);
}

TEST_CASE("generic equilibrium from a config file") {
  const auto dir = testing::scratch_dir("cli_eq");
  const auto r = invoke({"equilibrium", "--config", (kConfigs / "mixed_market.ini").string(), "--out", dir.string()});
  REQUIRE(r.code == 0);
  std::ifstream js(dir / "equilibrium_report.json");
  const auto doc = nlohmann::json::parse(js);
  CHECK(doc["residuals"]["clearing"].get<double>() <= 1e-10);
  CHECK(doc["residuals"]["first_order"].get<double>() <= 1e-10);
  CHECK(doc["config"].contains("agent:client.cost"));

  const auto r2 =
      invoke({"equilibrium", "--config", (kConfigs / "diffusive_market.ini").string(), "--seed", "3", "--out", dir.string()});
  CHECK(r2.code == 0);
  fs::remove_all(dir);
}

TEST_CASE("oracle check") {
  const auto dir = testing::scratch_dir("cli_orc");
  REQUIRE(invoke({"oracle-check", "--steps", "400", "--out", dir.string()}).code == 0);
  std::ifstream js(dir / "oracle_gap.json");
  const auto doc = nlohmann::json::parse(js);
  CHECK(doc["runs"].size() == 4u);
  CHECK(doc["runs"][3]["steps"] == 400);
  CHECK(doc["system_checks_passed"] == true);
  fs::remove_all(dir);
}

TEST_CASE("repeated runs are byte identical, whatever the thread count") {
  const auto a = testing::scratch_dir("cli_det"), b = testing::scratch_dir("cli_det"), c = testing::scratch_dir("cli_det");
  const std::vector<std::string> base{"scaling-diffusive", "--paths", "300", "--seed", "7", "--lambda", "1e-1,1e-2,1e-3"};
  auto with = [&](const fs::path& d, const std::string& threads) {
    auto v = base;
    v.insert(v.end(), {"--out", d.string(), "--threads", threads});
    return invoke(v).code;
  };
  REQUIRE(with(a, "1") == 0);
  REQUIRE(with(b, "1") == 0);
  REQUIRE(with(c, "4") == 0);
  for (const char* f : {"scaling_report.json", "scaling_report.csv"}) {
    const auto x = testing::slurp(a / f);
    CHECK(!x.empty());
    CHECK(x == testing::slurp(b / f));
    CHECK(x == testing::slurp(c / f));
  }
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}
