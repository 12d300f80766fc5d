#ifndef GAUSSGEO_COMMANDS_HPP
#define GAUSSGEO_COMMANDS_HPP

// Command implementations behind the gaussgeo executable. Every command takes
// parsed JSON plus a RunConfig and returns the exit code and the text to print.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gaussgeo/ahm.hpp"
#include "gaussgeo/geodesic.hpp"
#include "gaussgeo/io.hpp"
#include "gaussgeo/laxflow.hpp"
#include "gaussgeo/manifold.hpp"

namespace gaussgeo::cli {

using io::json;

enum ExitCode : int
{
  kOk = 0,
  kCheckFailed = 1,
  kInputError = 2,
  kNumericalFailure = 3,
};

struct RunConfig
{
  std::string command;
  double tol = 1e-12;
  std::optional<int> max_iter;  // unset: 60 for AHM, 100 for shooting
  MetricConvention metric = MetricConvention::paper;
  double dt = 1e-3;
  std::optional<int> steps;  // shoot grid intervals; unset: round(t_end / dt)
  std::optional<std::uint64_t> seed;
  double perturb = 0.0;
  double t_end = 1.0;
  int depth = 3;
  int nodes = 20;
  bool report = false;      // lax: JSON report instead of CSV
  bool richardson = false;  // lax --report: add the step-halving error ratio
};

struct CommandResult
{
  int exit_code = kOk;
  std::string out;
  std::string err;
};

// Thresholds used by verify; they match the acceptance tolerances.
namespace thresholds {
inline constexpr double geodesic_residual = 1e-6;
inline constexpr double first_integral_drift = 1e-6;
inline constexpr double special_symmetry = 1e-10;
inline constexpr double unit_determinant = 1e-9;
inline constexpr double lax_commutator = 1e-5;
inline constexpr double lax_spectral_drift = 1e-7;
inline constexpr double midpoint_cross_check = 1e-8;
inline constexpr double fisher_agreement = 1e-6;
}  // namespace thresholds

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string & bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline const char * metric_name(MetricConvention m) { return m == MetricConvention::paper ? "paper" : "fisher"; }

namespace detail {

inline void validate(const RunConfig & cfg)
{
  if (!(cfg.tol > 0.0) || !(cfg.dt > 0.0) || !(cfg.t_end > 0.0) || (cfg.max_iter && *cfg.max_iter <= 0) ||
      (cfg.steps && *cfg.steps <= 0) || cfg.nodes <= 0 || cfg.perturb < 0.0) {
    throw InputError("numeric parameters must be positive");
  }
}

inline LogMapOptions shooting_options(const RunConfig & cfg)
{
  LogMapOptions o;
  o.tol = cfg.tol;
  if (cfg.max_iter) {
    o.max_iter = *cfg.max_iter;
  }
  return o;
}

inline MidpointOptions midpoint_options(const RunConfig & cfg)
{
  MidpointOptions o;
  o.shooting = shooting_options(cfg);
  o.ahm.tol = cfg.tol;
  if (cfg.max_iter) {
    o.ahm.max_iter = *cfg.max_iter;
  }
  return o;
}

inline json check(double value, double threshold)
{
  return {{"value", value}, {"threshold", threshold}, {"pass", value <= threshold}};
}

inline bool all_pass(const json & checks)
{
  for (const auto & [name, c] : checks.items()) {
    if (!c.at("pass").get<bool>()) {
      return false;
    }
  }
  return true;
}

inline std::string digest(const RunConfig & cfg, const json & input)
{
  json flags = {{"command", cfg.command},   {"tol", cfg.tol},       {"metric", metric_name(cfg.metric)},
                {"dt", cfg.dt},             {"t_end", cfg.t_end},   {"depth", cfg.depth},
                {"nodes", cfg.nodes},       {"perturb", cfg.perturb}, {"report", cfg.report},
                {"richardson", cfg.richardson}};
  flags["max_iter"] = cfg.max_iter ? json(*cfg.max_iter) : json(nullptr);
  flags["steps"] = cfg.steps ? json(*cfg.steps) : json(nullptr);
  flags["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
  return fnv1a_hex(input.dump() + '\n' + flags.dump());
}

inline std::string report(const RunConfig & cfg, const json & input, json results, json checks)
{
  json r = {{"command", cfg.command},
            {"inputs_digest", digest(cfg, input)},
            {"results", std::move(results)},
            {"checks", std::move(checks)}};
  return r.dump(2) + '\n';
}

inline std::size_t grid_intervals(const RunConfig & cfg)
{
  if (cfg.steps) {
    return static_cast<std::size_t>(*cfg.steps);
  }
  return static_cast<std::size_t>(std::max(1.0, std::round(cfg.t_end / cfg.dt)));
}

/// Tangent from "tangent", or a random unit tangent of order "n" when --seed is given.
inline TangentN tangent_input(const RunConfig & cfg, const json & input)
{
  if (input.contains("tangent")) {
    return io::tangent_from_json(input.at("tangent"));
  }
  if (cfg.seed && input.contains("n")) {
    const json & n = input.at("n");
    if (!n.is_number_integer() || n.get<long long>() < 1) {
      throw InputError("\"n\" must be a positive integer");
    }
    std::mt19937_64 rng(*cfg.seed);
    return random_tangent(n.get<Index>(), 1.0, rng);
  }
  throw InputError("missing field \"tangent\" (or \"n\" together with --seed)");
}

inline GaussianPoint optional_point(const json & input, const char * key, Index n)
{
  if (input.contains(key)) {
    auto p = io::point_from_json(input.at(key));
    if (p.dim() != n) {
      throw InputError(std::string("\"") + key + "\" has a different dimension than the tangent");
    }
    return p;
  }
  return GaussianPoint::standard(n);
}

}  // namespace detail

inline CommandResult cmd_shoot(const RunConfig & cfg, const json & input)
{
  const TangentN xi = detail::tangent_input(cfg, input);
  const GaussianPoint base = detail::optional_point(input, "point", xi.dim());
  std::vector<double> ts;
  if (input.contains("tGrid")) {
    const json & grid = input.at("tGrid");
    if (!grid.is_array() || grid.empty()) {
      throw InputError("\"tGrid\" must be a non-empty array of times");
    }
    for (const auto & t : grid) {
      if (!t.is_number()) {
        throw InputError("\"tGrid\" entries must be numbers");
      }
      ts.push_back(t.get<double>());
    }
  } else {
    ts = uniform_grid(0.0, cfg.t_end, detail::grid_intervals(cfg));
  }
  const auto traj = sample_geodesic(base, xi, std::move(ts));
  for (const auto & p : traj.points) {
    EmbeddedPoint::checked(embed(p).spd());
  }
  std::ostringstream os;
  io::write_trajectory_csv(os, traj);
  return {kOk, os.str(), {}};
}

inline CommandResult cmd_log(const RunConfig & cfg, const json & input)
{
  const auto [p, q] = io::pair_from_json(input);
  const LogMapResult r = shoot(p, q, detail::shooting_options(cfg));
  json results = {{"xi", io::tangent_to_json(r.xi)},
                  {"residual", r.residual},
                  {"iterations", r.iterations},
                  {"stages", r.stages},
                  {"chart", "normalized at p"}};
  json checks = {{"shooting_residual", detail::check(r.residual, std::max(cfg.tol, 1e-10))}};
  const int code = detail::all_pass(checks) ? kOk : kCheckFailed;
  return {code, detail::report(cfg, input, std::move(results), std::move(checks)), {}};
}

inline CommandResult cmd_dist(const RunConfig & cfg, const json & input)
{
  const auto [p, q] = io::pair_from_json(input);
  const double d = distance(p, q, cfg.metric, detail::shooting_options(cfg));
  json results = {{"distance", d}, {"metric", metric_name(cfg.metric)}};
  return {kOk, detail::report(cfg, input, std::move(results), json::object()), {}};
}

inline CommandResult cmd_midpoint(const RunConfig & cfg, const json & input)
{
  const auto [p, q] = io::pair_from_json(input);
  const MidpointReport m = midpoint_report(p, q, detail::midpoint_options(cfg));
  json results = {{"midpoint", io::point_to_json(m.midpoint)},
                  {"halfway", io::point_to_json(m.halfway)},
                  {"ahm_iterations", m.ahm_iterations}};
  json checks = {{"cross_check", detail::check(m.cross_check, thresholds::midpoint_cross_check)},
                 {"lift_symmetry", detail::check(m.lift_symmetry, thresholds::special_symmetry)}};
  const int code = detail::all_pass(checks) ? kOk : kCheckFailed;
  return {code, detail::report(cfg, input, std::move(results), std::move(checks)), {}};
}

inline CommandResult cmd_interp(const RunConfig & cfg, const json & input)
{
  const auto [p, q] = io::pair_from_json(input);
  const auto points = interpolate(p, q, cfg.depth, detail::midpoint_options(cfg));
  json list = json::array();
  const double step = 1.0 / static_cast<double>(points.size() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    json entry = io::point_to_json(points[i]);
    entry["s"] = step * static_cast<double>(i);
    list.push_back(std::move(entry));
  }
  json results = {{"depth", cfg.depth}, {"points", std::move(list)}};
  return {kOk, detail::report(cfg, input, std::move(results), json::object()), {}};
}

inline json lax_checks(const LaxTrajectory & traj, double h)
{
  const LaxVerification v = verify_lax(traj, h);
  return {{"lax_commutator", detail::check(v.max_commutator_residual, thresholds::lax_commutator)},
          {"lax_spectral_drift", detail::check(v.max_spectral_drift, thresholds::lax_spectral_drift)}};
}

inline CommandResult cmd_lax(const RunConfig & cfg, const json & input)
{
  const TangentN xi = detail::tangent_input(cfg, input);
  const auto traj = integrate(LaxForm::v1, xi, cfg.t_end, cfg.dt);
  if (!cfg.report) {
    std::ostringstream os;
    io::write_lax_csv(os, traj);
    return {kOk, os.str(), {}};
  }
  const LaxState & last = traj.states.back();
  const Matrix closed = closed_form_L(xi, traj.ts.back());
  const LaxState exact = state_from_L(closed);
  const double err = std::max((last.q - exact.q).cwiseAbs().maxCoeff(), (last.r - exact.r).cwiseAbs().maxCoeff());
  json results = {{"t_end", traj.ts.back()},
                  {"Q", io::matrix_to_json(last.q)},
                  {"r", io::vector_to_json(last.r)},
                  {"closed_form_error", err}};
  if (cfg.richardson) {
    // informational: at dt near 1e-3 the differences reach roundoff and the ratio is noise
    results["richardson_ratio"] = richardson_ratio(LaxForm::v1, xi, cfg.t_end, cfg.dt);
  }
  json checks = lax_checks(traj, cfg.dt);
  checks["closed_form"] = detail::check(err, 1e-6);
  const int code = detail::all_pass(checks) ? kOk : kCheckFailed;
  return {code, detail::report(cfg, input, std::move(results), std::move(checks)), {}};
}

/**
 * Runs every invariant suite on the geodesic generated by the tangent from
 * the identity over [0, t_end]. --perturb shifts the mean of one interior
 * sample by the given amount before the checks run.
 */
inline CommandResult cmd_verify(const RunConfig & cfg, const json & input)
{
  const TangentN xi = detail::tangent_input(cfg, input);
  if (input.contains("tEnd")) {
    if (!input.at("tEnd").is_number() || !(input.at("tEnd").get<double>() > 0.0)) {
      throw InputError("\"tEnd\" must be a positive number");
    }
  }
  const double t_end = input.contains("tEnd") ? input.at("tEnd").get<double>() : cfg.t_end;
  const std::size_t intervals = static_cast<std::size_t>(std::max(4.0, std::round(t_end / cfg.dt)));
  const double h = t_end / static_cast<double>(intervals);

  auto traj = sample_geodesic(GaussianPoint::standard(xi.dim()), xi, uniform_grid(0.0, t_end, intervals));
  if (cfg.perturb > 0.0) {
    auto & victim = traj.points[traj.points.size() / 2];
    Vector mu = victim.mu();
    mu(0) += cfg.perturb;
    victim = GaussianPoint(victim.sigma(), mu);
  }

  double symmetry = 0.0;
  double det_drift = 0.0;
  for (double t : traj.ts) {
    const SpdMatrix g = lifted_geodesic(xi, t);
    symmetry = std::max(symmetry, check_special_symmetry(g));
    det_drift = std::max(det_drift, std::abs(g.det() - 1.0));
  }
  const FirstIntegrals fi = first_integrals(traj, h);
  const auto lax = integrate(LaxForm::v1, xi, t_end, h);

  json checks = {
      {"geodesic_residual", detail::check(geodesic_residual(traj, h), thresholds::geodesic_residual)},
      {"first_integral_a", detail::check(fi.max_drift_a, thresholds::first_integral_drift)},
      {"first_integral_A", detail::check(fi.max_drift_A, thresholds::first_integral_drift)},
      {"special_symmetry", detail::check(symmetry, thresholds::special_symmetry)},
      {"unit_determinant", detail::check(det_drift, thresholds::unit_determinant)},
  };
  checks.update(lax_checks(lax, h));
  json results = {{"n", xi.dim()}, {"t_end", t_end}, {"h", h}, {"samples", traj.ts.size()}};
  const int code = detail::all_pass(checks) ? kOk : kCheckFailed;
  return {code, detail::report(cfg, input, std::move(results), std::move(checks)), {}};
}

/// Quadrature Fisher information against the analytic metric over all basis pairs.
inline CommandResult cmd_fisher_check(const RunConfig & cfg, const json & input)
{
  GaussianPoint p = input.contains("point") ? io::point_from_json(input.at("point"))
                    : input.contains("n")   ? GaussianPoint::standard(io::detail::dimension(input))
                                            : GaussianPoint::standard(1);
  const auto basis = tangent_basis(p.dim());
  double worst = 0.0;
  json entries = json::array();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = i; j < basis.size(); ++j) {
      const double numeric = fisher_numeric(p, basis[i], basis[j], cfg.nodes);
      const double analytic = metric_at(p, basis[i], basis[j], MetricConvention::fisher);
      worst = std::max(worst, std::abs(numeric - analytic));
      entries.push_back({{"i", i}, {"j", j}, {"numeric", numeric}, {"analytic", analytic}});
    }
  }
  json results = {{"n", p.dim()}, {"nodes", cfg.nodes}, {"entries", std::move(entries)}};
  json checks = {{"fisher_agreement", detail::check(worst, thresholds::fisher_agreement)}};
  const int code = detail::all_pass(checks) ? kOk : kCheckFailed;
  return {code, detail::report(cfg, input, std::move(results), std::move(checks)), {}};
}

/// Dispatches on cfg.command and maps exceptions onto exit codes 2 and 3.
inline CommandResult run_command(const RunConfig & cfg, const json & input)
{
  try {
    detail::validate(cfg);
    if (cfg.command == "shoot") return cmd_shoot(cfg, input);
    if (cfg.command == "log") return cmd_log(cfg, input);
    if (cfg.command == "dist") return cmd_dist(cfg, input);
    if (cfg.command == "midpoint") return cmd_midpoint(cfg, input);
    if (cfg.command == "interp") return cmd_interp(cfg, input);
    if (cfg.command == "lax") return cmd_lax(cfg, input);
    if (cfg.command == "verify") return cmd_verify(cfg, input);
    if (cfg.command == "fisher-check") return cmd_fisher_check(cfg, input);
    throw InputError("unknown command: " + cfg.command);
  } catch (const InputError & e) {
    return {kInputError, {}, std::string("input error: ") + e.what()};
  } catch (const json::exception & e) {
    return {kInputError, {}, std::string("input error: ") + e.what()};
  } catch (const NumericalError & e) {
    return {kNumericalFailure, {}, std::string("numerical failure: ") + e.what()};
  }
}

/// Parses the text first; malformed JSON is an input error.
inline CommandResult run_command_text(const RunConfig & cfg, const std::string & text)
{
  json input;
  try {
    input = json::parse(text);
  } catch (const json::parse_error & e) {
    return {kInputError, {}, std::string("input error: malformed JSON: ") + e.what()};
  }
  return run_command(cfg, input);
}

}  // namespace gaussgeo::cli

#endif  // GAUSSGEO_COMMANDS_HPP
