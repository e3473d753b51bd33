#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "zipbf/zipbf.hpp"

namespace {

using zipbf::cli::RunConfig;

zipbf::priors::PriorSpec parse_prior(const std::string& s) {
  zipbf::priors::PriorSpec p;
  if (s == "jeffreys0") {
    p.family = zipbf::priors::PriorSpec::Family::jeffreys;
    p.l = 0;
  } else if (s == "jeffreys1") {
    p.family = zipbf::priors::PriorSpec::Family::jeffreys;
    p.l = 1;
  } else if (s == "j0" || s == "j1") {
    p.family = zipbf::priors::PriorSpec::Family::reg_jeffreys;
    p.j = (s == "j1") ? 1 : 0;
  } else if (s == "partial") {
    p.family = zipbf::priors::PriorSpec::Family::partial_jeffreys;
  } else if (s.rfind("gamma:", 0) == 0) {
    p.family = zipbf::priors::PriorSpec::Family::gamma;
    const auto body = s.substr(6);
    const auto comma = body.find(',');
    if (comma == std::string::npos)
      throw zipbf::input_error("--prior gamma needs the form gamma:a,b");
    try {
      p.a = std::stod(body.substr(0, comma));
      p.b = std::stod(body.substr(comma + 1));
    } catch (const std::exception&) {
      throw zipbf::input_error("--prior gamma needs numeric a,b");
    }
    if (!(p.a > 0.0) || !(p.b >= 0.0))
      throw zipbf::input_error("--prior gamma requires a > 0 and b >= 0");
  } else {
    throw zipbf::input_error(
        "unknown prior '" + s +
        "' (expected jeffreys0|jeffreys1|gamma:a,b|j0|j1|partial)");
  }
  return p;
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg, std::string& prior_str,
                      std::string& backend_str, std::string& format_str,
                      bool& seed_given) {
  cmd->add_option("input", cfg.input_path, "input data file")->required();
  cmd->add_option("--prior", prior_str,
                  "prior: jeffreys0|jeffreys1|gamma:a,b|j0|j1|partial");
  cmd->add_option("--prior-odds", cfg.prior_odds, "prior odds Pr(M1)/Pr(M0)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--backend", backend_str, "integration backend: quad|mc");
  cmd->add_option("--mc-samples", cfg.integration.mc_samples,
                  "importance-sampling draws");
  cmd->add_option("--seed", cfg.integration.seed, "random seed")
      ->each([&seed_given](const std::string&) { seed_given = true; });
  cmd->add_option("--radius", cfg.integration.truncation_radius,
                  "quadrature truncation radius (standardized units)");
  cmd->add_option("--format", format_str, "output format: json|text");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Objective Bayes tests of Poisson vs zero-inflated Poisson models"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string prior_str, backend_str = "quad", format_str = "json";
  bool seed_given = false;

  auto* test = app.add_subcommand("test", "Poisson vs ZIP on a counts file");
  add_common_flags(test, cfg, prior_str, backend_str, format_str, seed_given);

  auto* test_reg =
      app.add_subcommand("test-reg", "Poisson vs ZIP regression on a CSV file");
  add_common_flags(test_reg, cfg, prior_str, backend_str, format_str, seed_given);
  test_reg->add_flag("--intercept", cfg.intercept, "prepend a column of ones");
  test_reg->add_flag("--force", cfg.force,
                     "compute even when integrability is not guaranteed");
  test_reg->add_flag("--enumerate-selections", cfg.enumerate_selections,
                     "rank-deficient designs: one Bayes factor per selection");

  auto* check = app.add_subcommand("check", "integrability diagnostics only");
  add_common_flags(check, cfg, prior_str, backend_str, format_str, seed_given);
  check->add_flag("--intercept", cfg.intercept, "prepend a column of ones");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : zipbf::cli::exit_input_error;
  }

  try {
    if (!seed_given) {
      if (const char* env = std::getenv("ZIPBF_SEED"))
        cfg.integration.seed = std::stoull(env);
    }
    if (backend_str == "mc")
      cfg.integration.backend =
          zipbf::num::IntegrationConfig::Backend::importance_sampling;
    else if (backend_str != "quad")
      throw zipbf::input_error("unknown backend '" + backend_str + "'");
    cfg.output_format = format_str == "text" ? RunConfig::Format::text
                                             : RunConfig::Format::json;
    if (format_str != "text" && format_str != "json")
      throw zipbf::input_error("unknown format '" + format_str + "'");

    if (!prior_str.empty()) {
      cfg.prior = parse_prior(prior_str);
      using Family = zipbf::priors::PriorSpec::Family;
      const bool reg_family = cfg.prior.family == Family::reg_jeffreys ||
                              cfg.prior.family == Family::partial_jeffreys;
      if (test->parsed() && reg_family)
        throw zipbf::input_error("--prior " + prior_str +
                                 " applies to test-reg, not test");
      if (test_reg->parsed() && !reg_family)
        throw zipbf::input_error("--prior " + prior_str +
                                 " applies to test, not test-reg");
    } else if (test_reg->parsed()) {
      cfg.prior.family =
          zipbf::priors::PriorSpec::Family::reg_jeffreys; // default j = 1
    }

    zipbf::cli::RunReport rep;
    if (test->parsed()) {
      cfg.command = RunConfig::Command::test;
      rep = zipbf::cli::run_test(cfg);
    } else if (test_reg->parsed()) {
      cfg.command = RunConfig::Command::test_reg;
      rep = zipbf::cli::run_test_reg(cfg);
    } else {
      cfg.command = RunConfig::Command::check;
      rep = zipbf::cli::run_check(cfg);
    }

    if (cfg.output_format == RunConfig::Format::json)
      std::cout << rep.json.dump(2) << "\n";
    else
      std::cout << rep.text;
    return rep.exit_code;
  } catch (const zipbf::integrability_error& e) {
    std::cerr << "integrability: " << e.what() << "\n";
    return zipbf::cli::exit_integrability;
  } catch (const zipbf::input_error& e) {
    std::cerr << "input: " << e.what() << "\n";
    return zipbf::cli::exit_input_error;
  } catch (const zipbf::numerical_error& e) {
    std::cerr << "numerical: " << e.what() << "\n";
    return zipbf::cli::exit_numerical;
  } catch (const zipbf::domain_error& e) {
    std::cerr << "input: " << e.what() << "\n";
    return zipbf::cli::exit_input_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return zipbf::cli::exit_numerical;
  }
}
