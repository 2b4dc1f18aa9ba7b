// lrex: simulate, oracle, gap, stable, report.
// Exit status is 0 iff every enabled check passes; 2 on bad input.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "lrex/harness.hpp"
#include "lrex/spectral.hpp"
#include "lrex/stablewalk.hpp"

namespace fs = std::filesystem;
using namespace lrex;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* sub, Common& c, bool need_config = true) {
  auto* opt = sub->add_option("--config", c.config, "experiment config (JSON)");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "base seed; overrides the config");
  sub->add_option("--out", c.out, "output directory; overrides the config");
  sub->add_option("--threads", c.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
}

ExperimentConfig load(const Common& c) {
  auto cfg = load_config(c.config);
  if (c.seed) cfg.base_seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

void print(const std::vector<StatReport>& reports) {
  for (const auto& r : reports)
    std::printf("%-20s %s  statistic=%.6g threshold=%.6g se=%.3g\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                r.statistic, r.threshold, r.standard_error);
}

int finish(const std::vector<StatReport>& reports) {
  print(reports);
  return all_pass(reports) ? 0 : 1;
}

int cmd_simulate(const Common& c) {
  const auto cfg = load(c);
  const auto start = std::chrono::steady_clock::now();
  const auto res = run_experiment(cfg, cfg.output_dir, c.threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%zu replicates, N=%lld, n=%lld, %.2f s -> %s (config %s)\n", cfg.replicates,
              static_cast<long long>(cfg.ring_size()), static_cast<long long>(cfg.n), secs, cfg.output_dir.c_str(),
              config_hash(cfg).c_str());
  return finish(res.reports);
}

// Fourier route against the grid route for chi <P_t f, g>, plus the
// discrete and continuous Dirichlet forms.
int cmd_oracle(const Common& c) {
  const auto cfg = load(c);
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  const json o = cfg.extra.value("oracle_checks", json::object());
  const auto times = o.value("times", std::vector<double>{0.25, 0.5, 1.0});
  const TestFunction f = detail::function_from_json(o.value("f", json()));
  const TestFunction g = detail::function_from_json(o.value("g", o.value("f", json())));
  const double tol = o.value("tolerance", 1e-6);
  const double chi = cfg.rho * (1.0 - cfg.rho);
  const StableSymbol sym(RhoCoefficients::from(cfg.kernel, cfg.rho).levy());
  const SpatialGrid grid{cfg.oracle_L, cfg.oracle_M};

  std::vector<StatReport> reports;
  std::ostringstream csv;
  csv << std::setprecision(15) << "t,cov,cov_grid_image_corrected\n";
  StatReport routes;
  routes.name = "covariance_routes";
  routes.threshold = tol;
  for (double t : times) {
    const double a = ou_covariance(sym, chi, t, f, g);
    const double b = ou_covariance_grid(sym, chi, t, f, g, grid) - periodic_image_correction(sym, chi, t, f, g, grid);
    csv << t << ',' << a << ',' << b << '\n';
    routes.statistic = std::max(routes.statistic, std::fabs(a - b) / std::max(std::fabs(a), 1e-300));
  }
  routes.pass = routes.statistic < tol;
  reports.push_back(routes);
  write_text(out / "covariance.csv", csv.str());

  const JumpKernel kernel(cfg.kernel);
  const auto lc = LevyCoefficients::from(cfg.kernel);
  const double cont = dirichlet_form_continuous(lc, f);
  const double fourier = dirichlet_form_fourier(StableSymbol(lc), f);
  const double disc = dirichlet_form_discrete(kernel, f, cfg.n);
  write_text(out / "dirichlet.csv", [&] {
    std::ostringstream s;
    s << std::setprecision(15) << "n,discrete,continuous,fourier\n" << cfg.n << ',' << disc << ',' << cont << ','
      << fourier << '\n';
    return s.str();
  }());
  StatReport forms;
  forms.name = "dirichlet_routes";
  forms.statistic = std::fabs(cont - fourier) / cont;
  forms.threshold = o.value("form_tolerance", 1e-6);
  forms.pass = forms.statistic < forms.threshold;
  forms.extras = {{"discrete", disc}, {"continuous", cont}, {"fourier", fourier}};
  reports.push_back(forms);
  write_reports(out, reports);
  return finish(reports);
}

int cmd_gap(const Common& c) {
  const auto cfg = load(c);
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  const json gj = cfg.extra.value("gap", json::object());
  const auto ells = gj.value("ells", std::vector<int>{16, 32, 64, 128, 256});
  const JumpKernel kernel(cfg.kernel);
  const auto rep = gap_scaling_report(kernel, ells);
  std::ostringstream csv;
  csv << std::setprecision(15) << "ell,lambda,lambda_times_ell_alpha\n";
  for (const auto& r : rep.rows) csv << r.ell << ',' << r.lambda << ',' << r.scaled << '\n';
  write_text(out / "gap.csv", csv.str());
  StatReport slope;
  slope.name = "gap_slope";
  slope.statistic = rep.slope + cfg.kernel.alpha;
  slope.threshold = gj.value("slope_tolerance", 0.1);
  slope.pass = std::fabs(slope.statistic) <= slope.threshold;
  slope.extras = {{"slope", rep.slope}, {"alpha", cfg.kernel.alpha}};
  StatReport band;
  band.name = "gap_band";
  band.statistic = rep.band;
  band.threshold = gj.value("band", 4.0);
  band.pass = rep.band <= band.threshold;
  const std::vector<StatReport> reports{slope, band};
  write_reports(out, reports);
  return finish(reports);
}

int cmd_stable(const Common& c) {
  const auto cfg = load(c);
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  const json sj = cfg.extra.value("stable", json::object());
  const std::int64_t n = sj.value("n", cfg.n);
  const double t = sj.value("t", 1.0);
  const auto count = sj.value("samples", std::size_t{10000});
  KernelParams kp = cfg.kernel;
  kp.scale_n = n;
  const JumpKernel kernel(kp);
  const auto xs = simulate_walks(kernel, n, t, count, cfg.base_seed);
  std::ostringstream csv;
  csv << std::setprecision(17) << "replicate,value\n";
  for (std::size_t i = 0; i < xs.size(); ++i) csv << i << ',' << xs[i] << '\n';
  write_text(out / "samples.csv", csv.str());
  const StableCdf cdf(StableSymbol(LevyCoefficients::from(kp)), t, sj.value("half_width", 30.0), sj.value("step", 0.02));
  auto rep = ks_test(xs, [&](double x) { return cdf(x); }, 0.5 / static_cast<double>(n), sj.value("level", 0.01));
  const std::vector<StatReport> reports{rep};
  write_reports(out, reports);
  return finish(reports);
}

int cmd_report(const Common& c) {
  const fs::path dir = c.out.empty() ? fs::path(load(c).output_dir) : fs::path(c.out);
  const auto reports = recompute_reports(dir);
  write_reports(dir, reports);
  return finish(reports);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"long-range exclusion experiments"};
  app.require_subcommand(1);
  Common common;
  auto* sim = app.add_subcommand("simulate", "run replicates, persist series and check them");
  auto* ora = app.add_subcommand("oracle", "continuous oracles: OU covariance and Dirichlet forms");
  auto* gap = app.add_subcommand("gap", "interval random-walk spectral gap scaling");
  auto* stb = app.add_subcommand("stable", "scaled walk against the stable law");
  auto* rep = app.add_subcommand("report", "recompute checks from a finished run (--out DIR)");
  for (auto* s : {sim, ora, gap, stb}) add_common(s, common);
  add_common(rep, common, false);
  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(common);
    if (ora->parsed()) return cmd_oracle(common);
    if (gap->parsed()) return cmd_gap(common);
    if (stb->parsed()) return cmd_stable(common);
    if (rep->parsed()) {
      if (common.out.empty() && common.config.empty()) throw InvalidArgument("report needs --out DIR or --config");
      return cmd_report(common);
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
