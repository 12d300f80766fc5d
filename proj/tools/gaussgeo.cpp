// gaussgeo: geodesics, distances, midpoints and Lax flows on the manifold of
// multivariate normal distributions. Input is JSON (file or stdin).

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

#include "gaussgeo/commands.hpp"

namespace {

void configure_logging()
{
  spdlog::set_default_logger(spdlog::stderr_logger_mt("gaussgeo"));
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  const char * env = std::getenv("GAUSSGEO_LOG");
  if (env == nullptr) {
    return;
  }
  const std::string level(env);
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::warn("ignoring GAUSSGEO_LOG={} (expected error, info or debug)", level);
  }
}

bool read_input(const std::string & path, std::string & text)
{
  if (path.empty() || path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    return true;
  }
  std::ifstream in(path);
  if (!in) {
    return false;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

}  // namespace

int main(int argc, char ** argv)
{
  configure_logging();
  namespace cli = gaussgeo::cli;

  CLI::App app{"Fisher-Rao geometry of multivariate normal distributions"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 check failure, 2 input error, 3 numerical failure.\n"
             "Log level: GAUSSGEO_LOG=error|info|debug.");

  cli::RunConfig cfg;
  std::string input_path;
  std::string metric = "paper";
  int max_iter = 0;
  int steps = 0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App * sub) {
    sub->add_option("input", input_path, "JSON input file ('-' or omitted: stdin)");
    sub->add_option("--tol", cfg.tol, "convergence tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", max_iter, "iteration cap (default 60 for AHM, 100 for shooting)")
        ->check(CLI::PositiveNumber);
  };

  std::map<std::string, CLI::App *> subs;
  subs["shoot"] = app.add_subcommand("shoot", "sample the geodesic from a point along a tangent; CSV out");
  subs["log"] = app.add_subcommand("log", "log map of q at p by shooting; JSON out");
  subs["dist"] = app.add_subcommand("dist", "geodesic distance between p and q; JSON out");
  subs["midpoint"] = app.add_subcommand("midpoint", "geodesic midpoint via the AHM iteration; JSON out");
  subs["interp"] = app.add_subcommand("interp", "2^depth+1 dyadic points along the geodesic; JSON out");
  subs["lax"] = app.add_subcommand("lax", "integrate the Lax flow; CSV out, or JSON with --report");
  subs["verify"] = app.add_subcommand("verify", "run all invariant checks on one geodesic; JSON out");
  subs["fisher-check"] = app.add_subcommand("fisher-check", "quadrature Fisher information vs analytic metric");

  for (auto & [name, sub] : subs) {
    add_common(sub);
  }
  for (const char * name : {"shoot", "lax", "verify"}) {
    subs[name]->add_option("--dt", cfg.dt, "time step")->capture_default_str()->check(CLI::PositiveNumber);
    subs[name]->add_option("--t-end", cfg.t_end, "final time")->capture_default_str()->check(CLI::PositiveNumber);
    subs[name]->add_option("--seed", seed, "draw a random unit tangent of order \"n\" when no tangent is given");
  }
  subs["shoot"]->add_option("--steps", steps, "grid intervals (default t-end/dt)")->check(CLI::PositiveNumber);
  subs["dist"]
      ->add_option("--metric", metric, "metric convention")
      ->capture_default_str()
      ->check(CLI::IsMember({"paper", "fisher"}));
  subs["interp"]->add_option("--depth", cfg.depth, "dyadic depth")->capture_default_str()->check(CLI::Range(1, 20));
  subs["lax"]->add_flag("--report", cfg.report, "JSON report with residual checks instead of CSV");
  subs["lax"]->add_flag("--richardson", cfg.richardson,
                        "with --report: error ratio when dt halves (about 16; use dt >= 0.05 to stay above roundoff)");
  subs["verify"]
      ->add_option("--perturb", cfg.perturb, "shift one mean sample by this amount (harness self-test)")
      ->check(CLI::NonNegativeNumber);
  subs["fisher-check"]->add_option("--nodes", cfg.nodes, "Gauss-Hermite nodes per axis")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInputError;
  }

  for (auto & [name, sub] : subs) {
    if (sub->parsed()) {
      cfg.command = name;
    }
  }
  cfg.metric = metric == "fisher" ? gaussgeo::MetricConvention::fisher : gaussgeo::MetricConvention::paper;
  if (max_iter > 0) {
    cfg.max_iter = max_iter;
  }
  if (steps > 0) {
    cfg.steps = steps;
  }
  if (const auto * opt = subs[cfg.command]->get_option_no_throw("--seed"); opt != nullptr && opt->count() > 0) {
    cfg.seed = seed;
  }

  std::string text;
  if (!read_input(input_path, text)) {
    std::cerr << "input error: cannot open " << input_path << '\n';
    return cli::kInputError;
  }
  spdlog::debug("command {} with {} bytes of input", cfg.command, text.size());

  const cli::CommandResult result = cli::run_command_text(cfg, text);
  std::cout << result.out;
  if (!result.err.empty()) {
    spdlog::error("{}", result.err);
  }
  spdlog::info("exit code {}", result.exit_code);
  return result.exit_code;
}
