#include <doctest.h>

#include <string>

#include "config.hpp"
#include "error.hpp"

using namespace splap;
using namespace splap::cli;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("empty input gives the reference protocol") {
  const ExperimentConfig c = parse_config_string("");
  CHECK(c == ExperimentConfig{});
  CHECK(c.p_list == std::vector<double>{1.1, 1.2, 1.5, 2.5});
  CHECK(c.mesh_n == 32);
  CHECK(c.tau_ladder == std::vector<double>{1, 0.5, 0.25, 0.125, 0.0625, 0.03125});
  CHECK(c.tau_ref == 0.03125);
  CHECK(c.n_r == 100);
  CHECK(c.phi == "inv_sqrt_radius");
  CHECK(c.initial == "one");
  CHECK(c.T == 1.0);
}

TEST_CASE("parsing values") {
  const ExperimentConfig c = parse_config_string(
      "# comment\n"
      "p_list = 1.5, 3   # trailing\n"
      "tau_ladder = {1/2, 1/4}\n"
      "tau_ref = 1/8\n"
      "mesh_n = 8\n"
      "master_seed = 18446744073709551615\n"
      "clip_initial = true\n"
      "formulation = componentwise\n"
      "\n");
  CHECK(c.p_list == std::vector<double>{1.5, 3.0});
  CHECK(c.tau_ladder == std::vector<double>{0.5, 0.25});
  CHECK(c.tau_ref == 0.125);
  CHECK(c.master_seed == 18446744073709551615ULL);
  CHECK(c.clip_initial);
  CHECK(c.formulation == "componentwise");
  CHECK(parse_number("1/32", "x") == 0.03125);
  CHECK(parse_number("2.5e-1", "x") == 0.25);
}

TEST_CASE("echo round trips") {
  ExperimentConfig c;
  c.p_list = {1.1, 4.0 / 3.0};
  c.tau_ladder = {0.5, 0.25};
  c.tau_ref = 0.125;
  c.fit_tau_max = 0.5;
  c.kappa = 0.1;
  c.master_seed = 987654321;
  c.output_dir = "out dir";
  c.grid_kind = "random";
  c.tau_ref = 1.0 / 16;
  CHECK_NOTHROW(c.validate());
  CHECK(parse_config_string(echo(c)) == c);
  CHECK(parse_config_string(echo(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("validation errors name the key") {
  CHECK(config_error("tau_ladder = 1/2, 1/4, 1/8, 1/16\ntau_ref = 1/24\n")
            .find("not an integer multiple") != std::string::npos);
  CHECK(config_error("tau_ref = 1/24\n").find("tau_ladder") != std::string::npos);
  CHECK(config_error("bogus = 1\n").find("bogus") != std::string::npos);
  CHECK(config_error("p_list = 1, 2\n").find("p_list") != std::string::npos);
  CHECK(config_error("mesh_n = 1\n").find("mesh_n") != std::string::npos);
  CHECK(config_error("n_r = 0\n").find("n_r") != std::string::npos);
  CHECK(config_error("phi = gauss\n").find("phi") != std::string::npos);
  CHECK(config_error("tau_ref = abc\n").find("tau_ref") != std::string::npos);
  CHECK(config_error("tau_ref = 1/0\n").find("tau_ref") != std::string::npos);
  CHECK(config_error("mesh_n = 3.5\n").find("mesh_n") != std::string::npos);
  CHECK(config_error("clip_initial = maybe\n").find("clip_initial") != std::string::npos);
  CHECK(config_error("just text\n").find("line 1") != std::string::npos);
  CHECK(config_error("grid_kind = random\n").find("4 tau_ref") != std::string::npos);
  CHECK(config_error("tau_ladder = 3/8\ntau_ref = 1/8\n").find("T is not") != std::string::npos);
}

TEST_CASE("missing file") {
  try {
    parse_config_file("/nonexistent/splap.cfg");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}
