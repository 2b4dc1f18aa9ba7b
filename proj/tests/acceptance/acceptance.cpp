// Acceptance runs. One PASS/FAIL line per criterion; exit 0 iff all requested pass.
//   lrex_acceptance [--criterion N]... [--out DIR] [--threads T]

#include <CLI11.hpp>

#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "lrex/harness.hpp"
#include "lrex/spectral.hpp"
#include "lrex/stablewalk.hpp"

using namespace lrex;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

KernelParams params(double alpha, double cp, double cm, std::int64_t n = 1) {
  KernelParams p;
  p.alpha = alpha;
  p.c_plus = cp;
  p.c_minus = cm;
  p.scale_n = n;
  return p;
}

fs::path g_out = "acceptance_out";
int g_threads = 0;

// Simulation criteria go through the harness so their series land on disk.
ExperimentResult experiment(const std::string& name, json cfg) {
  const auto c = config_from_json(cfg);
  return run_experiment(c, g_out / name, g_threads);
}

json base(double alpha, double cp, double cm, std::int64_t n, double rho, double t_end, double dt, std::size_t R,
          std::uint64_t seed) {
  return {{"kernel", {{"alpha", alpha}, {"c_plus", cp}, {"c_minus", cm}}},
          {"n", n},
          {"ring_factor", 32},
          {"rho", rho},
          {"t_end", t_end},
          {"dt", dt},
          {"replicates", R},
          {"base_seed", seed}};
}

// psi against the exhaustive conditional expectation of (eta(0) - rho)(eta(1) - rho)
// given the block count, for every l <= 12 and every count.
Outcome psi_identity() {
  double worst = 0.0;
  for (double rho : {0.3, 0.5, 0.7}) {
    for (Site ell = 2; ell <= 12; ++ell) {
      std::vector<double> sum(static_cast<std::size_t>(ell + 1), 0.0), cnt(sum.size(), 0.0);
      for (unsigned mask = 0; mask < (1u << ell); ++mask) {
        const auto k = static_cast<std::size_t>(std::popcount(mask));
        sum[k] += ((mask & 1u) - rho) * (((mask >> 1) & 1u) - rho);
        cnt[k] += 1.0;
      }
      for (Site k = 0; k <= ell; ++k)
        worst = std::max(worst, std::fabs(psi_from_count(k, ell, rho) - sum[static_cast<std::size_t>(k)] /
                                                                             cnt[static_cast<std::size_t>(k)]));
    }
  }
  return {worst < 1e-12, fmt("max |psi - E[.|count]| = %.3g over l <= 12, rho in {0.3,0.5,0.7}", worst)};
}

// Scaled moments stay under 4 chi^2 for every l.
Outcome psi_moments() {
  double ratio = 0.0;
  for (double rho : {0.3, 0.5, 0.7}) {
    const double chi2 = rho * rho * (1 - rho) * (1 - rho);
    for (Site ell = 2; ell <= 12; ++ell) {
      const double l = static_cast<double>(ell);
      ratio = std::max(ratio, l * l * psi_second_moment(ell, rho) / chi2);
      ratio = std::max(ratio, l * l * l * psi_remainder_moment(ell, rho) / chi2);
    }
  }
  return {ratio <= 4.0 * (1 + 1e-12), fmt("max over l, rho of scaled moment / chi^2 = %.4f (bound 4)", ratio)};
}

// sup over u in [-3, 3] of |L_n f - L f| must fall along n and shrink 4x.
Outcome generator_convergence() {
  const auto f = TestFunction::gaussian();
  const std::vector<std::int64_t> ns{16, 32, 64, 128, 256, 512, 1024};
  bool ok = true;
  std::string detail;
  for (double alpha : {0.8, 1.2, 1.5}) {
    for (bool skew : {false, true}) {
      const auto p = skew ? params(alpha, 2.0, 0.5) : params(alpha, 1.0, 1.0);
      const JumpKernel k(p);
      const auto lc = LevyCoefficients::from(p);
      std::vector<double> grid, exact;
      for (int i = -30; i <= 30; ++i) {
        grid.push_back(0.1 * i);
        exact.push_back(continuous_generator_at(lc, f, 0.1 * i));
      }
      std::vector<double> err;
      for (auto n : ns) {
        const DiscreteGenerator gen(k, n);
        double e = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) e = std::max(e, std::fabs(gen(f, grid[i]) - exact[i]));
        err.push_back(e);
      }
      bool mono = true;
      for (std::size_t i = 1; i < err.size(); ++i) mono = mono && err[i] < err[i - 1];
      const double drop = err.front() / err.back();
      const bool pass = mono && drop >= 4.0;
      ok = ok && pass;
      detail += fmt(" [a=%.1f %s drop %.2f%s%s]", alpha, skew ? "skew" : "sym", drop, mono ? "" : " non-monotone",
                    pass ? "" : " FAIL");
    }
  }
  return {ok, "sup error 16 -> 1024:" + detail};
}

Outcome dirichlet_convergence() {
  const auto f = TestFunction::gaussian();
  bool ok = true;
  std::string detail;
  for (double alpha : {0.8, 1.2, 1.5}) {
    const auto p = params(alpha, 2.0, 1.0);
    const double exact = dirichlet_form_continuous(LevyCoefficients::from(p), f);
    const double rel = std::fabs(dirichlet_form_discrete(JumpKernel(p), f, 512) - exact) / exact;
    ok = ok && rel < 0.05;
    detail += fmt(" a=%.1f: %.4f", alpha, rel);
  }
  return {ok, "relative Dirichlet form error at n=512:" + detail};
}

Outcome gap_scaling() {
  const std::vector<int> ells{16, 32, 64, 128, 256, 512, 1024};
  bool ok = true;
  std::string detail;
  for (double alpha : {0.8, 1.5}) {
    const auto rep = gap_scaling_report(JumpKernel(params(alpha, 1.0, 1.0)), ells);
    const bool pass = std::fabs(rep.slope + alpha) <= 0.1 && rep.band <= 4.0;
    ok = ok && pass;
    detail += fmt(" a=%.1f: slope %.4f band %.3f", alpha, rep.slope, rep.band);
  }
  return {ok, detail.substr(1)};
}

Outcome stable_limit() {
  const std::int64_t n = 512;
  const auto p = params(1.5, 2.0, 1.0, n);
  const auto xs = simulate_walks(JumpKernel(p), n, 1.0, 10000, 20240501);
  const StableCdf cdf(StableSymbol(LevyCoefficients::from(p)), 1.0, 30.0, 0.02);
  const auto r = ks_test(xs, [&](double x) { return cdf(x); }, 0.5 / n, 0.01);
  return {r.pass, fmt("KS D = %.5f, allowance %.5f, p = %.3f", r.statistic, 0.5 / n, r.extra("p_value"))};
}

Outcome static_white_noise() {
  json cfg = base(1.5, 1.0, 1.0, 128, 0.5, 0.0, 1.0, 10000, 7);
  cfg["observers"] = json::array({{{"field", "Y"}, {"id", "Y"}}});
  cfg["checks"] = json::array({{{"kind", "gaussian"}, {"observer", "Y"}, {"t", 0.0}}});
  const auto res = experiment("criterion_7", cfg);
  const auto& r = res.reports.at(0);
  return {r.pass, fmt("var %.5f vs %.5f (z %.2f), KS p %.3f", r.extra("variance"), r.extra("target_variance"),
                      r.extra("z_variance"), r.extra("ks_p_value"))};
}

Outcome qv_limit() {
  json cfg = base(1.5, 2.0, 1.0, 128, 0.5, 1.0, 0.25, 500, 8);
  cfg["observers"] = json::array({{{"field", "QV"}, {"id", "QV"}, {"cutoff_K", "full"}}});
  cfg["checks"] = json::array({{{"kind", "qv_mean"}, {"observer", "QV"}, {"t", 1.0}, {"factor", 4.0}, {"tolerance", 0.1}},
                               {{"kind", "qv_monotone"}, {"observer", "QV"}}});
  const auto res = experiment("criterion_8", cfg);
  const auto& r = res.reports.at(0);
  return {all_pass(res.reports), fmt("mean QV_1 = %.4f +- %.4f vs 4 chi E_n = %.4f (rel %.4f)", r.extra("mean"),
                                     r.extra("mean_se"), r.extra("target"), r.statistic)};
}

Outcome drift_vanishing() {
  std::vector<double> second;
  std::string detail;
  for (std::int64_t n : {32, 64, 128}) {
    json cfg = base(1.2, 1.0, 0.0, n, 0.5, 1.0, 1.0, 200, 9);
    cfg["observers"] =
        json::array({{{"field", "A"}, {"id", "A"}, {"event_exact", true}, {"cutoff_K", n}}});
    const auto res = experiment("criterion_9/n" + std::to_string(n), cfg);
    std::vector<double> sq;
    for (const auto& traj : res.data.replicates) sq.push_back(std::pow(traj.get("A").values.back(), 2));
    const auto m = moments(sq);
    second.push_back(m.mean);
    detail += fmt(" n=%lld: %.5f +- %.5f", static_cast<long long>(n), m.mean, m.mean_se);
  }
  const bool ok = second[1] < second[0] && second[2] < second[1];
  return {ok, "E[A_1^2]" + detail};
}

Outcome ou_covariance_match() {
  bool ok = true;
  std::string detail;
  struct Case {
    const char* name;
    double alpha, cp, cm, rho;
  };
  for (const Case c : {Case{"skew_a1.2", 1.2, 1.0, 0.0, 0.3}, Case{"sym_a1.5", 1.5, 1.0, 1.0, 0.5}}) {
    json cfg = base(c.alpha, c.cp, c.cm, 128, c.rho, 1.0, 0.25, 2000, 10);
    cfg["observers"] = json::array({{{"field", "Y"}, {"id", "Yf"}}});
    cfg["checks"] = json::array({{{"kind", "covariance"}, {"observer_t", "Yf"}, {"times", {0.25, 0.5, 1.0}}}});
    const auto res = experiment(std::string("criterion_10/") + c.name, cfg);
    const auto& r = res.reports.at(0);
    ok = ok && r.pass;
    detail += fmt(" %s: max |z| %.2f", c.name, r.statistic);
  }
  return {ok, detail.substr(1)};
}

double occupation_exponent(const std::string& name, double cp, double cm, std::uint64_t seed) {
  json cfg = base(1.5, cp, cm, 128, 0.5, 8.0, 0.5, 500, seed);
  cfg["observers"] = json::array({{{"field", "occupation"}, {"id", "Z"}}});
  cfg["checks"] = json::array(
      {{{"kind", "occupation_scaling"}, {"observer", "Z"}, {"times", {0.5, 1.0, 2.0, 4.0, 8.0}}}});
  return experiment(name, cfg).reports.at(0).statistic;
}

Outcome occupation_time() {
  const double skew = occupation_exponent("criterion_11/asymmetric", 2.0, 1.0, 11);
  const double sym = occupation_exponent("criterion_11/symmetric", 1.5, 1.5, 12);
  const bool in_band = skew >= 1.18 && skew <= 1.48;
  const bool contrast = sym <= skew - 0.1;
  return {in_band && contrast, fmt("exponent %.3f (band [1.18, 1.48] %s), symmetric %.3f (contrast %s)", skew,
                                   in_band ? "ok" : "missed", sym, contrast ? "ok" : "missed")};
}

Outcome afield_diagnostic() {
  const auto f = TestFunction::gaussian();
  const std::vector<double> ns{64, 128, 256, 512};
  std::string detail;
  bool ok = true;
  for (double alpha : {0.8, 1.0}) {
    const JumpKernel k(params(alpha, 2.0, 1.0));
    std::vector<double> v;
    for (double n : ns) v.push_back(afield_static_variance(k, f, static_cast<std::int64_t>(n)));
    const double slope = scaling_fit(ns, v).slope;
    const bool pass = alpha < 1.0 ? slope < 0.0 : std::fabs(slope) <= 0.3;
    ok = ok && pass;
    detail += fmt(" a=%.1f: %.4f", alpha, slope);
  }
  return {ok, "n-exponent" + detail};
}

const std::vector<std::function<Outcome()>> criteria{
    psi_identity,     psi_moments,     generator_convergence, dirichlet_convergence,
    gap_scaling,      stable_limit,    static_white_noise,    qv_limit,
    drift_vanishing,  ou_covariance_match, occupation_time,   afield_diagnostic};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> which;
  std::string out = g_out.string();
  app.add_option("--criterion", which, "criterion number (repeatable; default all)")->check(CLI::Range(1, 12));
  app.add_option("--out", out, "directory for persisted runs");
  app.add_option("--threads", g_threads, "worker threads (0: all cores)");
  CLI11_PARSE(app, argc, argv);
  g_out = out;
  if (which.empty())
    for (int i = 1; i <= 12; ++i) which.push_back(i);

  bool all = true;
  for (int id : which) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(id - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s  %s  (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
