#include "ocmc/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "ocmc/cmc_solver.hpp"
#include "ocmc/counterexample.hpp"
#include "ocmc/errors.hpp"
#include "ocmc/reduced_functional.hpp"
#include "ocmc/report.hpp"
#include "ocmc/tensor_spec.hpp"
#include "ocmc/verification.hpp"

namespace ocmc {

namespace {

using json = nlohmann::json;

struct RunConfig {
  std::string metric = "zero";
  int k = 200;
  double s0 = 2.0;
  double amplitude = 64.0;
  std::string xi0 = "0,0,2";
  double lambda = 1000.0;
  int degree = 8;
  std::optional<int> n_polar;
  std::optional<double> tol;
  std::uint64_t seed = 20240601;
  std::string out;
  std::string format = "json";
  double r_min = 1.2;
  double r_max = 50.0;
  int samples = 200;
  std::string input;
};

[[noreturn]] void usage(const std::string& what) {
  throw Error(ErrorKind::kInvalidArgument, what);
}

Vec3 parse_point(const std::string& text) {
  std::stringstream ss(text);
  std::string item;
  std::vector<double> v;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) usage("bad coordinate \"" + item + "\"");
    } catch (const std::logic_error&) {
      usage("bad coordinate \"" + item + "\"");
    }
  }
  if (v.size() != 3) usage("--xi0 needs three comma-separated numbers");
  return Vec3(v[0], v[1], v[2]);
}

template <typename T>
T config_value(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    usage("config key \"" + key + "\" has the wrong type");
  }
}

// Config file values apply to every setting whose flag was not given.
void apply_config(const std::string& path, RunConfig& c, const CLI::App& app,
                  const std::string& command) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const json doc = parse_json_text(buf.str(), path);
  if (!doc.is_object()) usage(path + ": config must be a JSON object");
  auto given = [&](const std::string& flag) { return app.count("--" + flag) > 0; };
  for (const auto& [key, value] : doc.items()) {
    if (key == "command") {
      if (config_value<std::string>(value, key) != command) {
        usage(path + ": config is for command \"" + value.get<std::string>() + "\"");
      }
    } else if (key == "metric") {
      if (!given("metric")) c.metric = config_value<std::string>(value, key);
    } else if (key == "k") {
      if (!given("k")) c.k = config_value<int>(value, key);
    } else if (key == "s0") {
      if (!given("s0")) c.s0 = config_value<double>(value, key);
    } else if (key == "amplitude") {
      if (!given("amplitude")) c.amplitude = config_value<double>(value, key);
    } else if (key == "xi0") {
      if (given("xi0")) continue;
      if (value.is_array()) {
        const auto v = config_value<std::vector<double>>(value, key);
        if (v.size() != 3) usage(path + ": xi0 needs three numbers");
        std::ostringstream s;
        s << format_number(v[0]) << "," << format_number(v[1]) << "," << format_number(v[2]);
        c.xi0 = s.str();
      } else {
        c.xi0 = config_value<std::string>(value, key);
      }
    } else if (key == "lambda") {
      if (!given("lambda")) c.lambda = config_value<double>(value, key);
    } else if (key == "degree") {
      if (!given("degree")) c.degree = config_value<int>(value, key);
    } else if (key == "n_polar") {
      if (!given("n-polar")) c.n_polar = config_value<int>(value, key);
    } else if (key == "tol") {
      if (!given("tol")) c.tol = config_value<double>(value, key);
    } else if (key == "seed") {
      if (!given("seed")) c.seed = config_value<std::uint64_t>(value, key);
    } else if (key == "out") {
      if (!given("out")) c.out = config_value<std::string>(value, key);
    } else if (key == "format") {
      if (!given("format")) c.format = config_value<std::string>(value, key);
    } else if (key == "r_min") {
      if (!given("r-min")) c.r_min = config_value<double>(value, key);
    } else if (key == "r_max") {
      if (!given("r-max")) c.r_max = config_value<double>(value, key);
    } else if (key == "samples") {
      if (!given("samples")) c.samples = config_value<int>(value, key);
    } else if (key == "input") {
      if (!given("input")) c.input = config_value<std::string>(value, key);
    } else {
      usage(path + ": unknown config key \"" + key + "\"");
    }
  }
}

void validate(const RunConfig& c) {
  if (c.tol && !(*c.tol > 0.0)) usage("--tol must be positive");
  if (c.n_polar && *c.n_polar < 2) usage("--n-polar must be at least 2");
  if (c.samples < 0) usage("--samples must be nonnegative");
  if (!(c.r_min > 1.0) || !(c.r_max >= c.r_min)) usage("need 1 < r-min <= r-max");
  if (!(c.lambda > 0.0)) usage("--lambda must be positive");
  if (!(c.amplitude > 0.0)) usage("--amplitude must be positive");
  parse_format(c.format);
}

int thread_count() {
  if (const char* env = std::getenv("OUTLYING_CMC_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) {
      usage("OUTLYING_CMC_THREADS must be a positive integer");
    }
    return static_cast<int>(n);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

TensorPtr load_tensor(const std::string& metric) {
  if (metric == "zero") return std::make_shared<ZeroTensor>();
  return load_tensor_spec(metric);
}

MetricSpec load_metric(const std::string& metric) {
  if (metric == "zero") return schwarzschild_metric();
  return perturbed_metric(load_tensor_spec(metric));
}

CmcOptions cmc_options(const RunConfig& c) {
  CmcOptions o;
  if (c.tol) o.tolerance = *c.tol;
  if (c.n_polar) o.polar_nodes_per_panel = *c.n_polar;
  return o;
}

json critical_json(const CriticalPointReport& r) {
  return {{"xi", {r.xi.x(), r.xi.y(), r.xi.z()}},
          {"value", r.value},
          {"gradient_norm", r.gradient_norm},
          {"hessian_eigenvalues",
           {r.hessian_eigenvalues[0], r.hessian_eigenvalues[1], r.hessian_eigenvalues[2]}},
          {"classification", to_string(r.classification)},
          {"iterations", r.iterations},
          {"converged", r.converged}};
}

json scan_json(const std::vector<ScanRow>& rows) {
  json out = json::array();
  for (const ScanRow& r : rows) {
    out.push_back({{"xi1", r.xi.x()},
                   {"xi2", r.xi.y()},
                   {"xi3", r.xi.z()},
                   {"norm_xi", r.radius},
                   {"F", r.f},
                   {"dF_radial", r.df_radial},
                   {"phi_lower_bound", r.phi_lower_bound},
                   {"G1", r.g1},
                   {"K1", r.k1},
                   {"flux_residual", r.flux_residual}});
  }
  return {{"rows", out}};
}

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}

  // Reports are assembled in memory and written in one piece.
  void write(const std::string& text) {
    if (path_.empty()) {
      fallback_ << text;
      return;
    }
    std::ofstream file(path_, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorKind::kIo, "cannot open " + path_ + " for writing");
    file << text;
    file.flush();
    if (!file) throw Error(ErrorKind::kIo, "failed writing " + path_);
  }

 private:
  std::string path_;
  std::ostream& fallback_;
};

std::string render(const json& doc, ReportFormat format) {
  std::ostringstream s;
  emit_report(s, doc, format);
  return s.str();
}

int run_verify(const std::string& suite, const RunConfig& c, Sink& sink, std::ostream& err) {
  SuiteOptions options;
  options.seed = c.seed;
  if (c.tol) options.tolerance_override = *c.tol;
  options.threads = thread_count();
  SuiteReport report;
  if (suite == "identities") {
    report = verify_identities(options);
  } else if (suite == "flux") {
    report = verify_flux(options);
  } else if (suite == "positivity") {
    report = verify_positivity(options);
  } else {
    report = verify_cmc_scaling(options);
  }
  sink.write(render(suite_json(report), parse_format(c.format)));
  for (const Check& ch : report.checks) {
    if (!ch.passed) {
      err << "FAIL " << ch.name << ": " << format_number(ch.value) << " "
          << to_string(ch.relation) << " " << format_number(ch.bound) << " violated\n";
    }
  }
  err << report.suite << ": " << (report.checks_passed() ? "pass" : "FAIL") << "\n";
  return report.checks_passed() ? kExitOk : kExitVerificationFailed;
}

int run_scan(const RunConfig& c, Sink& sink) {
  FunctionalContext ctx = make_context(load_tensor(c.metric),
                                       c.n_polar.value_or(kDefaultPolarNodes));
  const Vec3 direction = parse_point(c.xi0);
  if (direction.norm() == 0.0) usage("--xi0 must be nonzero for scan-f");
  std::vector<Vec3> points;
  for (int i = 0; i < c.samples; ++i) {
    const double f = c.samples == 1 ? 0.0 : static_cast<double>(i) / (c.samples - 1);
    const double r = i == c.samples - 1 ? c.r_max : c.r_min * std::pow(c.r_max / c.r_min, f);
    points.push_back(r * direction.normalized());
  }
  const std::vector<ScanRow> rows = scan_F(ctx, points, thread_count());
  if (parse_format(c.format) == ReportFormat::kCsv) {
    std::ostringstream s;
    write_scan_csv(s, rows);
    sink.write(s.str());
  } else {
    sink.write(render(scan_json(rows), ReportFormat::kJson));
  }
  return kExitOk;
}

int run_counterexample(const RunConfig& c, Sink& sink, std::ostream& err) {
  BuildOptions options;
  options.initial_amplitude = c.amplitude;
  const MetricConstruction m = build_metric(make_bump_params(c.k, c.s0), options);
  err << "counterexample: k=" << m.params.k << " amplitude=" << format_number(m.params.amplitude)
      << " a_k=" << format_number(m.params.a_k) << " F minimum at |xi|="
      << format_number(m.f_minimum.xi.norm()) << "\n";
  const json doc = export_profile(m.params);
  sink.write(render(doc, parse_format(c.format)));
  return kExitOk;
}

int run_cmc(const std::string& mode, const RunConfig& c, Sink& sink, std::ostream& err) {
  const MetricSpec metric = load_metric(c.metric);
  const Vec3 xi0 = parse_point(c.xi0);
  const ReportFormat format = parse_format(c.format);
  if (mode == "solve") {
    const CmcSolution s = lyapunov_schmidt_solve(metric, xi0, c.lambda, c.degree, cmc_options(c));
    sink.write(render(solve_report_json(s.report), format));
    return kExitOk;
  }
  FindCmcOptions options;
  options.solve = cmc_options(c);
  const CmcFindResult r = find_cmc(metric, xi0, c.lambda, c.degree, options);
  json doc = {{"start", solve_report_json(r.start.report)},
              {"solution", solve_report_json(r.solution.report)},
              {"critical", critical_json(r.critical)},
              {"calibration_constant", r.calibration_constant},
              {"multiplier_bound", r.multiplier_bound},
              {"first_harmonic_norm_start", r.start.report.first_harmonic_norm()},
              {"first_harmonic_norm", r.solution.report.first_harmonic_norm()}};
  sink.write(render(doc, format));
  err << "cmc find: interior minimum at |xi|=" << format_number(r.solution.report.xi.norm())
      << " outlying_a=" << format_number(r.solution.report.outlying_a) << "\n";
  return kExitOk;
}

int run_report(const RunConfig& c, Sink& sink) {
  if (c.input.empty()) usage("report needs --input");
  std::ifstream in(c.input);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + c.input);
  std::stringstream buf;
  buf << in.rdbuf();
  sink.write(render(parse_json_text(buf.str(), c.input), parse_format(c.format)));
  return kExitOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kDomain:
      return kExitUsage;
    default:
      return kExitSolverFailure;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Outlying CMC spheres: verification suites, scans and solves"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig c;
  std::string config_path;
  int n_polar = 0;
  double tol = 0.0;
  app.add_option("--config", config_path, "JSON config; flags override its values");
  app.add_option("--metric", c.metric, "zero or a tensor spec / profile export path");
  app.add_option("--k", c.k, "bump sharpness");
  app.add_option("--s0", c.s0, "target radius of the F minimum");
  app.add_option("--amplitude", c.amplitude, "starting amplitude of the doubling search");
  app.add_option("--xi0", c.xi0, "center x,y,z (direction for scan-f)");
  app.add_option("--lambda", c.lambda, "sphere radius scale");
  app.add_option("--degree", c.degree, "harmonic degree L");
  app.add_option("--n-polar", n_polar, "polar resolution");
  app.add_option("--tol", tol, "tolerance override");
  app.add_option("--seed", c.seed, "seed for randomized checks");
  app.add_option("--out", c.out, "output path (stdout if absent)");
  app.add_option("--format", c.format, "csv or json");
  app.add_option("--r-min", c.r_min, "smallest scan radius");
  app.add_option("--r-max", c.r_max, "largest scan radius");
  app.add_option("--samples", c.samples, "number of scan points");
  app.add_option("--input", c.input, "JSON report to convert");

  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  verify->require_subcommand(1);
  for (const char* suite : {"identities", "flux", "positivity", "cmc-scaling"}) {
    verify->add_subcommand(suite)->fallthrough();
  }
  verify->fallthrough();
  app.add_subcommand("scan-f", "tabulate F along a ray")->fallthrough();
  app.add_subcommand("counterexample", "build the counterexample profile")->fallthrough();
  CLI::App* cmc = app.add_subcommand("cmc", "graph solves");
  cmc->require_subcommand(1);
  cmc->add_subcommand("solve")->fallthrough();
  cmc->add_subcommand("find")->fallthrough();
  cmc->fallthrough();
  app.add_subcommand("report", "convert a JSON report")->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::string command;
  std::string mode;
  for (CLI::App* sub : app.get_subcommands()) {
    command = sub->get_name();
    for (CLI::App* leaf : sub->get_subcommands()) mode = leaf->get_name();
  }
  const std::string full = mode.empty() ? command : command + " " + mode;

  try {
    if (app.count("--n-polar")) c.n_polar = n_polar;
    if (app.count("--tol")) c.tol = tol;
    if (!config_path.empty()) apply_config(config_path, c, app, full);
    validate(c);
    Sink sink(c.out, out);
    if (command == "verify") return run_verify(mode, c, sink, err);
    if (command == "scan-f") return run_scan(c, sink);
    if (command == "counterexample") return run_counterexample(c, sink, err);
    if (command == "cmc") return run_cmc(mode, c, sink, err);
    return run_report(c, sink);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

}  // namespace ocmc
