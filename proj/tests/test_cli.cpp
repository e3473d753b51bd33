#include <catch2/catch.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#ifndef ZIPBF_CLI_PATH
#error "ZIPBF_CLI_PATH must be defined"
#endif
#ifndef ZIPBF_DATA_DIR
#error "ZIPBF_DATA_DIR must be defined"
#endif

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(ZIPBF_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data_file(const std::string& name) {
  return std::string(ZIPBF_DATA_DIR) + "/" + name;
}

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/zipbf_test_" + name;
  std::ofstream f(path);
  f << body;
  return path;
}

} // namespace

TEST_CASE("cli: UTI counts file") {
  const auto r = run_cli("test " + data_file("uti.csv"));
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["n"] == 98);
  CHECK(j["k"] == 81);
  CHECK(j["s"] == 26);
  CHECK(j["method"] == "closed_form");
  CHECK(j["bf10"].get<double>() == Approx(223.13).epsilon(0.005));
  CHECK(j["post_prob_m1"].get<double>() == Approx(0.995).margin(0.001));
}

TEST_CASE("cli: terror counts file, text format") {
  const auto r = run_cli("test " + data_file("terror.csv"));
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["bf10"].get<double>() == Approx(0.28).margin(0.01));
  CHECK(j["post_prob_m1"].get<double>() == Approx(0.219).margin(0.002));

  const auto t = run_cli("test " + data_file("terror.csv") + " --format text");
  REQUIRE(t.exit_code == 0);
  CHECK(t.out.find("B10 = ") != std::string::npos);
  CHECK(t.out.find("Pr(M1|x)") != std::string::npos);
  CHECK(t.out.find("Pr(M0|x)") != std::string::npos);
}

TEST_CASE("cli: all-zero counts route to the proper-prior Bayes factor") {
  const auto r = run_cli("test " + data_file("zeros3.csv"));
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["method"] == "all_zeros");
  CHECK(j["bf10"].get<double>() == Approx(25.0 / 12.0).epsilon(1e-12));
  REQUIRE(j["warnings"].size() >= 1);
  CHECK(j["warnings"][0].get<std::string>().find("all counts are zero") !=
        std::string::npos);
}

TEST_CASE("cli: gamma and l=1 priors") {
  const auto g = run_cli("test " + data_file("terror.csv") + " --prior gamma:1,1");
  REQUIRE(g.exit_code == 0);
  CHECK(nlohmann::json::parse(g.out)["method"] == "gamma_closed_form");

  const auto l1 = run_cli("test " + data_file("terror.csv") + " --prior jeffreys1");
  REQUIRE(l1.exit_code == 0);
  const auto j = nlohmann::json::parse(l1.out);
  CHECK(j["method"] == "quadrature_l1");
  // within the sqrt(2) band of the l=0 answer
  CHECK(j["bf10"].get<double>() > 0.28 / 1.5);
  CHECK(j["bf10"].get<double>() < 0.28 * 1.5);
}

TEST_CASE("cli: intercept-only regression CSV matches the closed form") {
  const auto path = write_temp("counts012.csv", "count\n0\n1\n2\n");
  const auto r = run_cli("test-reg " + path + " --intercept");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["bf10"].get<double>() == Approx(0.5945).margin(0.002));
  CHECK(j["method"] == "regression_quadrature");
  CHECK(j["integrability"]["recommended_prior"] == "j1");
}

TEST_CASE("cli: divergent design refused under j0, fine under j1") {
  const auto refused =
      run_cli("test-reg " + data_file("divergent_design.csv") + " --prior j0");
  CHECK(refused.exit_code == 3);

  const auto ok = run_cli("test-reg " + data_file("divergent_design.csv"));
  REQUIRE(ok.exit_code == 0);
  const auto j = nlohmann::json::parse(ok.out);
  CHECK(j["integrability"]["j0_condition_ok"] == false);
  CHECK(j["integrability"]["j1_condition_ok"] == true);
  CHECK(j["integrability"]["condition_411_violating_rows"][0] == 1);
  CHECK(std::isfinite(j["log_bf10"].get<double>()));
}

TEST_CASE("cli: forced run attaches divergence warnings") {
  const auto r = run_cli("test-reg " + data_file("divergent_design.csv") +
                         " --prior j0 --force --radius 20");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  bool risk = false, growth = false;
  for (const auto& w : j["warnings"]) {
    const auto s = w.get<std::string>();
    if (s.find("forced run") != std::string::npos) risk = true;
    if (s.find("grow") != std::string::npos) growth = true;
  }
  CHECK(risk);
  CHECK(growth);
}

TEST_CASE("cli: check subcommand") {
  const auto r = run_cli("check " + data_file("divergent_design.csv"));
  REQUIRE(r.exit_code == 0); // j1 recommended, so diagnostics succeed
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["integrability"]["recommended_prior"] == "j1");

  const auto text = run_cli("check " + data_file("divergent_design.csv") + " --format text");
  CHECK(text.out.find("cone condition violated at row 1") != std::string::npos);

  const auto rd = run_cli("check " + data_file("rankdef_symmetric.csv"));
  REQUIRE(rd.exit_code == 0);
  CHECK(nlohmann::json::parse(rd.out)["integrability"]["recommended_prior"] ==
        "partial");
}

TEST_CASE("cli: rank-deficient CSV produces the selection table") {
  const auto r = run_cli("test-reg " + data_file("rankdef_symmetric.csv") +
                         " --enumerate-selections --seed 99 --mc-samples 16384");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["method"] == "rank_deficient");
  CHECK(j["t"] == 1);
  CHECK(j["deficiency"] == 1);
  REQUIRE(j["selections"].size() == 2);
  CHECK(j.contains("bf_arithmetic_mean"));
  CHECK(j.contains("bf_geometric_mean"));
}

TEST_CASE("cli: byte-identical output for identical seed") {
  const std::string args = "test-reg " + data_file("offset_demo.csv") +
                           " --intercept --backend mc --seed 31337 --mc-samples 8192";
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);

  const auto c = run_cli("test-reg " + data_file("offset_demo.csv") +
                         " --intercept --backend mc --seed 31338 --mc-samples 8192");
  CHECK(a.out != c.out);
}

TEST_CASE("cli: JSON numeric fields round-trip at full precision") {
  const auto r = run_cli("test " + data_file("uti.csv"));
  const auto j = nlohmann::json::parse(r.out);
  const std::string again = j.dump(2) + "\n";
  CHECK(again == r.out);
  // and the parsed double reserializes to the same token
  const double lb = j["log_bf10"].get<double>();
  nlohmann::json j2 = lb;
  CHECK(j2.dump() == j["log_bf10"].dump());
}

TEST_CASE("cli: input errors exit with code 2") {
  const auto missing = run_cli("test /nonexistent/file.csv");
  CHECK(missing.exit_code == 2);

  const auto bad = write_temp("bad.csv", "count\n1\ntwo\n");
  CHECK(run_cli("test " + bad).exit_code == 2);

  const auto neg = write_temp("neg.csv", "count\n1\n-3\n");
  CHECK(run_cli("test " + neg).exit_code == 2);

  const auto badflag = run_cli("test " + data_file("uti.csv") + " --prior nope");
  CHECK(badflag.exit_code == 2);

  // regression file with rank-deficient full design
  const auto dup = write_temp("dup.csv", "count,x1,x2\n0,1,1\n1,2,2\n2,3,3\n");
  CHECK(run_cli("test-reg " + dup).exit_code == 2);
}

TEST_CASE("cli: prior odds feed the posterior probability") {
  const auto base = run_cli("test " + data_file("terror.csv"));
  const auto tilted = run_cli("test " + data_file("terror.csv") + " --prior-odds 4");
  const auto jb = nlohmann::json::parse(base.out);
  const auto jt = nlohmann::json::parse(tilted.out);
  CHECK(jb["log_bf10"].get<double>() == jt["log_bf10"].get<double>());
  const double bf = jb["bf10"].get<double>();
  CHECK(jt["post_prob_m1"].get<double>() ==
        Approx(1.0 - 1.0 / (1.0 + bf * 4.0)).epsilon(1e-12));
  CHECK(jt["prior_odds"].get<double>() == 4.0);
}

TEST_CASE("cli: check exits 3 when no usable prior exists") {
  const auto dup = write_temp("dup2.csv", "count,x1,x2\n0,1,1\n1,2,2\n2,3,3\n");
  const auto r = run_cli("check " + dup);
  CHECK(r.exit_code == 3);
  CHECK(nlohmann::json::parse(r.out)["integrability"]["recommended_prior"] ==
        "none");
}

TEST_CASE("cli: ZIPBF_SEED environment fallback") {
  const std::string base = "test-reg " + data_file("offset_demo.csv") +
                           " --intercept --backend mc --mc-samples 8192";
  const std::string env_cmd = "ZIPBF_SEED=777 " + std::string(ZIPBF_CLI_PATH) +
                              " " + base + " 2>/dev/null";
  std::array<char, 4096> buf{};
  std::string env_out;
  FILE* pipe = popen(env_cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    env_out.append(buf.data(), got);
  pclose(pipe);

  const auto flag = run_cli(base + " --seed 777");
  CHECK(env_out == flag.out);

  // an explicit --seed wins over the environment
  const auto j = nlohmann::json::parse(env_out);
  CHECK(j["seed"] == 777);
}
