// modwind: winding statistics of low-lying closed geodesics on the modular
// surface.  Machine-readable JSON goes to stdout, progress to stderr.
//
// Exit codes: 0 success, 1 verification failure, 2 usage, 3 I/O, 4 resource.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "modwind/modwind.hpp"

namespace {

using namespace modwind;

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2, kIo = 3, kResource = 4 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

unsigned default_threads() {
  if (const char* env = std::getenv("MODWIND_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct RunConfig {
  int A = 5;
  int N = 12;
  std::string norm = "period";
  int bins = 8192;
  unsigned threads = default_threads();
  double tol = 1e-3;
  std::string out_dir = ".";
  bool svg = false;
  std::optional<std::uint64_t> sample;
  std::uint64_t seed = 1;
  bool closed_form = false;
  std::vector<double> t_values{0.0, 0.5, 1.0, 2.0};
};

void validate(const RunConfig& cfg) {
  if (cfg.A <= 1) throw DomainError("--A must be > 1");
  if (cfg.N < 2 || cfg.N % 2 != 0) throw DomainError("--N must be even and >= 2");
  if (cfg.bins < 2) throw DomainError("--bins must be >= 2");
  if (cfg.threads < 1) throw DomainError("--threads must be >= 1");
}

struct Constants {
  ChatEstimate estimate;
  bool within_budget = true;
};

Constants geometric_constants(int A, double tol) {
  try {
    return {chat_estimate(A, tol), true};
  } catch (const ResourceError&) {
    const int depth = max_ck_depth(A);
    std::cerr << "warning: tolerance " << tol << " needs more than the c_k budget; using depth " << depth << "\n";
    return {chat_estimate_at_depth(A, depth), false};
  }
}

double target_variance(const RunConfig& cfg, Normalization norm) {
  switch (norm) {
    case Normalization::period:
    case Normalization::maxN: return sigma_p2(cfg.A).get_d();
    case Normalization::word: return sigma_w2(cfg.A).get_d();
    case Normalization::geom: return geometric_constants(cfg.A, cfg.tol).estimate.sigma_g2;
  }
  return 0.0;
}

RunResult collect(const RunConfig& cfg, HistogramConfig hist) {
  RunOptions opts;
  opts.A = cfg.A;
  opts.N = cfg.N;
  opts.threads = cfg.threads;
  opts.hist = hist;
  if (cfg.sample) {
    std::cerr << "sampling " << *cfg.sample << " necklaces (seed " << cfg.seed << ")\n";
    return run_sampled(opts, *cfg.sample, cfg.seed);
  }
  if (enumeration_work(cfg.A, cfg.N) > kExhaustiveWorkCap) {
    throw ResourceError("exhaustive enumeration of A = " + std::to_string(cfg.A) + ", N = " + std::to_string(cfg.N) +
                        " exceeds the work cap; use --sample");
  }
  opts.progress = [](std::size_t done, std::size_t total) {
    std::cerr << "\rshards " << done << "/" << total << std::flush;
    if (done == total) std::cerr << "\n";
  };
  return run_exhaustive(opts);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  auto out = open_output(path);
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

int cmd_count(const RunConfig& cfg) {
  validate(cfg);
  mpz_class exact;
  if (cfg.closed_form) {
    exact = pi_exact(cfg.A, cfg.N);
  } else {
    if (enumeration_work(cfg.A, cfg.N) > kExhaustiveWorkCap) {
      throw ResourceError("enumeration exceeds the work cap; use --closed-form");
    }
    exact = count_by_enumeration(cfg.A, cfg.N, cfg.threads);
  }
  JsonObject json = count_json(pi_asymptotic(cfg.A, cfg.N, exact));
  json.string("method", cfg.closed_form ? "closed-form" : "enumeration");
  std::cout << json.str() << "\n";
  return kOk;
}

int cmd_dist(const RunConfig& cfg) {
  validate(cfg);
  const Normalization norm = parse_normalization(cfg.norm);
  const double sigma2 = target_variance(cfg, norm);
  const std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());

  const RunResult run = collect(cfg, default_histogram(cfg.A, cfg.bins));
  const DistributionReport report = ks_distance(run.counts, norm, sigma2);
  const std::string name(to_string(norm));

  {
    auto out = open_output(dir / "joint_table.csv");
    write_table_csv(out, run.counts);
    if (!out) throw IoError("write failed: joint_table.csv");
  }
  {
    auto out = open_output(dir / ("cdf_" + name + ".csv"));
    write_cdf_csv(out, report);
    if (!out) throw IoError("write failed: cdf csv");
  }
  const std::string json = report_json(report).str();
  write_file(dir / ("report_" + name + ".json"), json + "\n");

  const RatioReport ratios = ratio_report(run.counts);
  JsonObject extra;
  extra.number("mean_g", ratios.mean_g)
      .number("var_g", ratios.var_g)
      .number("mean_w", ratios.mean_w)
      .number("var_w", ratios.var_w)
      .integer("cross_checked", static_cast<long long>(run.checks.checked()))
      .number("max_relative_error", run.checks.max_relative_error());
  write_file(dir / "ratios.json", extra.str() + "\n");

  if (cfg.svg) {
    auto out = open_output(dir / (name + ".svg"));
    write_svg(out, run.counts, norm, sigma2);
    if (!out) throw IoError("write failed: svg");
  }
  if (run.checks.max_relative_error() >= 1e-9) {
    std::cerr << "error: geometric length routes disagree (relative error " << run.checks.max_relative_error()
              << ")\n";
    std::cout << json << "\n";
    return kVerifyFailed;
  }
  std::cout << json << "\n";
  return kOk;
}

int cmd_constants(const RunConfig& cfg) {
  if (cfg.A <= 1) throw DomainError("--A must be > 1");
  if (!(cfg.tol > 0.0)) throw DomainError("--tol must be > 0");
  const Constants c = geometric_constants(cfg.A, cfg.tol);
  const ChatEstimate& e = c.estimate;
  JsonObject json;
  json.integer("A", cfg.A)
      .number("sigma_p2", sigma_p2(cfg.A).get_d())
      .string("sigma_p2_exact", rational_string(sigma_p2(cfg.A)))
      .number("sigma_w2", sigma_w2(cfg.A).get_d())
      .string("sigma_w2_exact", rational_string(sigma_w2(cfg.A)))
      .integer("k", e.k)
      .number("c_k", e.c_k)
      .number("error_bound", e.error_bound)
      .number("c_hat_low", e.c_k - e.error_bound)
      .number("c_hat_high", e.c_k + e.error_bound)
      .number("sigma_g2", e.sigma_g2)
      .number("sigma_g2_low", e.sigma_g2_low)
      .number("sigma_g2_high", e.sigma_g2_high)
      .number("tol", cfg.tol)
      .boolean("within_budget", c.within_budget);
  std::cout << json.str() << "\n";
  return c.within_budget ? kOk : kResource;
}

int cmd_charfn(const RunConfig& cfg) {
  validate(cfg);
  const Normalization norm = parse_normalization(cfg.norm);
  if (norm != Normalization::period && norm != Normalization::maxN) {
    throw DomainError("charfn supports --norm period or maxn only");
  }
  const double sp2 = sigma_p2(cfg.A).get_d();
  const RunResult run = collect(cfg, {16, 8.0});
  const double admissible = std::sqrt(2.0 * std::log(double(cfg.A)) * cfg.N) / std::sqrt(sp2);
  std::vector<std::string> rows;
  for (double t : cfg.t_values) {
    const auto [re, im] = empirical_char_fn(run.counts, norm, t);
    const double target = std::exp(-0.5 * sp2 * t * t);
    const bool in_range = norm != Normalization::maxN || std::abs(t) < admissible;
    if (!in_range) std::cerr << "warning: |t| = " << std::abs(t) << " is outside the admissible range " << admissible << "\n";
    JsonObject row;
    row.number("t", t).number("real", re).number("imag", im).number("target", target).number("gap", std::abs(re - target));
    if (norm == Normalization::maxN) row.boolean("admissible", in_range);
    rows.push_back(row.str());
  }
  JsonObject json;
  json.integer("A", cfg.A)
      .integer("N", cfg.N)
      .string("normalization", to_string(norm))
      .number("sigma2", sp2)
      .integer("count", static_cast<long long>(run.counts.total()))
      .raw("values", json_array(rows));
  std::cout << json.str() << "\n";
  return kOk;
}

int cmd_verify(const RunConfig& cfg) {
  validate(cfg);
  const VerifyReport report = run_verification(cfg.A, cfg.N, {}, cfg.threads);
  std::vector<std::string> checks, f_values;
  for (const auto& c : report.checks) {
    JsonObject row;
    row.string("name", c.name).boolean("passed", c.passed).string("detail", c.detail);
    checks.push_back(row.str());
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
  }
  JsonObject f;
  for (const auto& [n, value] : report.min_period_counts) f.integer("f(" + std::to_string(n) + ")", value);
  JsonObject json;
  json.integer("A", cfg.A)
      .integer("N", cfg.N)
      .boolean("passed", report.passed())
      .raw("min_period_counts", f.str())
      .raw("checks", json_array(checks));
  std::cout << json.str() << "\n";
  return report.passed() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Winding statistics of low-lying closed geodesics on the modular surface"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub, bool needs_n) {
    sub->add_option("--A", cfg.A, "bound on the partial quotients (A > 1)")->required();
    if (needs_n) sub->add_option("--N", cfg.N, "maximal (even) period length")->required();
    sub->add_option("--threads", cfg.threads, "worker threads (default: MODWIND_THREADS or all cores)");
  };
  auto add_run = [&](CLI::App* sub) {
    sub->add_option("--norm", cfg.norm, "period | maxn | word | geom")
        ->check(CLI::IsMember({"period", "maxn", "maxN", "word", "geom"}));
    sub->add_option("--sample", cfg.sample, "Monte Carlo: number of necklaces to draw");
    sub->add_option("--seed", cfg.seed, "seed for --sample");
  };

  auto* count = app.add_subcommand("count", "exact and asymptotic number of necklaces");
  add_common(count, true);
  auto* exact_flag = count->add_flag("--exact", "enumerate (default)");
  count->add_flag("--closed-form", cfg.closed_form, "Mobius-sum closed form")->excludes(exact_flag);

  auto* dist = app.add_subcommand("dist", "distribution of the normalized winding number");
  add_common(dist, true);
  add_run(dist);
  dist->add_option("--bins", cfg.bins, "histogram bins for the geometric normalization");
  dist->add_option("--tol", cfg.tol, "tolerance on c_hat for the geometric variance");
  dist->add_option("--out-dir", cfg.out_dir, "directory for CSV/JSON/SVG outputs");
  dist->add_flag("--svg", cfg.svg, "also write an SVG figure");

  auto* constants = app.add_subcommand("constants", "variance constants and the c_k estimate of c_hat");
  constants->add_option("--A", cfg.A, "bound on the partial quotients (A > 1)")->required();
  constants->add_option("--tol", cfg.tol, "target Fibonacci bound 2/F_k^2");

  auto* charfn = app.add_subcommand("charfn", "empirical characteristic function");
  add_common(charfn, true);
  add_run(charfn);
  charfn->add_option("--t", cfg.t_values, "arguments t");

  auto* verify = app.add_subcommand("verify", "run the oracle suite");
  add_common(verify, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*count) return cmd_count(cfg);
    if (*dist) return cmd_dist(cfg);
    if (*constants) return cmd_constants(cfg);
    if (*charfn) return cmd_charfn(cfg);
    if (*verify) return cmd_verify(cfg);
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kResource;
  }
  return kUsage;
}
