#pragma once

// Experiment orchestration: configs, replicate scheduling, persistence and checks.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fields.hpp"
#include "generator.hpp"
#include "levy.hpp"
#include "simulator.hpp"
#include "stats.hpp"
#include "symbol.hpp"

namespace lrex {

using json = nlohmann::json;

struct ObserverSpec {
  std::string id;
  std::string field;  // Y, L, A, QV, PQV, psi, energy, occupation
  TestFunction f;
  Site cutoff = 0;    // 0: one macroscopic unit (n sites); negative: the whole ring
  double dt = 0.1;
  double eps = 0.5;
  Site ell = 8;
  Site site = 0;
  bool event_exact = false;
};

struct CheckSpec {
  std::string kind;  // gaussian, stationarity, qv_mean, covariance, occupation_scaling, qv_monotone, drift_zero
  json params;
};

struct ExperimentConfig {
  KernelParams kernel;
  std::int64_t n = 16;
  std::int64_t ring_factor = 32;
  double rho = 0.5;
  double t_end = 1.0;
  double dt = 0.1;
  std::vector<ObserverSpec> observers;
  std::vector<CheckSpec> checks;
  std::size_t replicates = 8;
  std::uint64_t base_seed = 1;
  double oracle_L = 64.0;
  std::size_t oracle_M = std::size_t{1} << 16;
  std::string output_dir = "out";
  json extra = json::object();  // subcommand blocks (gap, stable, oracle)

  Site ring_size() const { return static_cast<Site>(n * ring_factor); }
};

namespace detail {

inline TestFunction function_from_json(const json& j) {
  if (j.is_null()) return TestFunction::gaussian();
  const std::string family = j.value("family", "gaussian");
  const double center = j.value("center", 0.0);
  const double width = j.value("width", 1.0);
  if (family == "gaussian") return TestFunction::gaussian(center, width);
  if (family == "hermite") return TestFunction::hermite(j.value("degree", 1), center, width);
  throw InvalidArgument("config: unknown test function family '" + family + "'");
}

inline json function_to_json(const TestFunction& f) {
  json j{{"center", f.center()}, {"width", f.width()}};
  if (f.family() == FunctionFamily::gaussian) {
    j["family"] = "gaussian";
  } else {
    j["family"] = "hermite";
    j["degree"] = f.degree();
  }
  return j;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  const json k = j.value("kernel", json::object());
  c.kernel.alpha = k.value("alpha", 1.5);
  c.kernel.c_plus = k.value("c_plus", 1.0);
  c.kernel.c_minus = k.value("c_minus", 1.0);
  c.kernel.weak_lambda = k.value("weak_lambda", 0.0);
  c.n = j.value("n", std::int64_t{16});
  c.kernel.scale_n = c.n;
  c.kernel.validate();
  c.ring_factor = j.value("ring_factor", std::int64_t{32});
  c.rho = j.value("rho", 0.5);
  c.t_end = j.value("t_end", 1.0);
  c.dt = j.value("dt", 0.1);
  c.replicates = j.value("replicates", std::size_t{8});
  c.base_seed = j.value("base_seed", std::uint64_t{1});
  if (j.contains("oracle")) {
    c.oracle_L = j["oracle"].value("L", c.oracle_L);
    c.oracle_M = j["oracle"].value("M", c.oracle_M);
  }
  c.output_dir = j.value("output_dir", std::string("out"));
  for (const auto& o : j.value("observers", json::array())) {
    ObserverSpec s;
    s.field = o.at("field").get<std::string>();
    s.id = o.value("id", s.field);
    s.f = detail::function_from_json(o.value("f", json()));
    if (o.contains("cutoff_K")) {
      const auto& kk = o["cutoff_K"];
      s.cutoff = kk.is_string() ? (kk.get<std::string>() == "full" ? -1 : 0) : kk.get<Site>();
    }
    s.dt = o.value("dt", c.dt);
    s.eps = o.value("eps", 0.5);
    s.ell = o.value("ell", Site{8});
    s.site = o.value("site", Site{0});
    s.event_exact = o.value("event_exact", false);
    c.observers.push_back(s);
  }
  for (const auto& ch : j.value("checks", json::array())) c.checks.push_back({ch.at("kind").get<std::string>(), ch});
  for (const char* key : {"gap", "stable", "oracle_checks"})
    if (j.contains(key)) c.extra[key] = j[key];

  detail::require(c.n >= 1, "config: n must be at least 1");
  detail::require(c.ring_factor >= 2 && c.ring_size() % 2 == 0, "config: N = ring_factor n must be even and >= 2n");
  detail::require(c.rho > 0.0 && c.rho < 1.0, "config: rho must lie in (0, 1)");
  detail::require(c.t_end >= 0.0 && c.dt > 0.0, "config: need t_end >= 0 and dt > 0");
  std::map<std::string, int> seen;
  for (const auto& o : c.observers)
    if (++seen[o.id] > 1) throw InvalidArgument("config: duplicate observer id '" + o.id + "'");
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  j["kernel"] = {{"alpha", c.kernel.alpha},
                 {"c_plus", c.kernel.c_plus},
                 {"c_minus", c.kernel.c_minus},
                 {"weak_lambda", c.kernel.weak_lambda}};
  j["n"] = c.n;
  j["ring_factor"] = c.ring_factor;
  j["rho"] = c.rho;
  j["t_end"] = c.t_end;
  j["dt"] = c.dt;
  j["replicates"] = c.replicates;
  j["base_seed"] = c.base_seed;
  j["oracle"] = {{"L", c.oracle_L}, {"M", c.oracle_M}};
  j["output_dir"] = c.output_dir;
  j["observers"] = json::array();
  for (const auto& o : c.observers) {
    json oj{{"id", o.id}, {"field", o.field}, {"f", detail::function_to_json(o.f)}, {"dt", o.dt}};
    if (o.cutoff < 0)
      oj["cutoff_K"] = "full";
    else
      oj["cutoff_K"] = o.cutoff;
    if (o.field == "energy") oj["eps"] = o.eps;
    if (o.field == "psi") oj["ell"] = o.ell;
    if (o.field == "occupation") oj["site"] = o.site;
    if (o.field == "A") oj["event_exact"] = o.event_exact;
    j["observers"].push_back(oj);
  }
  j["checks"] = json::array();
  for (const auto& ch : c.checks) j["checks"].push_back(ch.params);
  for (const auto& [key, value] : c.extra.items()) j[key] = value;
  return j;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

/// FNV-1a of the canonical (sorted-key) JSON dump, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << detail::fnv1a(config_to_json(c).dump());
  return s.str();
}

// ---------------------------------------------------------------------------
// Replicates.

struct ExperimentData {
  ExperimentConfig config;
  std::vector<FieldTrajectory> replicates;
};

inline std::unique_ptr<MeshObserver> make_observer(const ObserverSpec& o, const FieldContext& ctx) {
  const Site K = o.cutoff < 0 ? ctx.ring_size() / 2 : (o.cutoff == 0 ? static_cast<Site>(ctx.n) : o.cutoff);
  using Kind = IntegratingObserver::Kind;
  if (o.field == "Y") return std::make_unique<FluctuationObserver>(o.id, o.dt, ctx, o.f);
  if (o.field == "L") return std::make_unique<GeneratorFieldObserver>(o.id, o.dt, ctx, o.f);
  if (o.field == "A") {
    if (o.event_exact) return std::make_unique<DriftEventObserver>(o.id, o.dt, ctx, o.f, K);
    return std::make_unique<IntegratingObserver>(o.id, o.dt, ctx, o.f, K, Kind::drift);
  }
  if (o.field == "QV") return std::make_unique<IntegratingObserver>(o.id, o.dt, ctx, o.f, K, Kind::qv);
  if (o.field == "PQV") return std::make_unique<IntegratingObserver>(o.id, o.dt, ctx, o.f, K, Kind::predictable_qv);
  if (o.field == "energy") return std::make_unique<IntegratingObserver>(o.id, o.dt, ctx, o.f, K, Kind::energy, o.eps);
  if (o.field == "psi") return std::make_unique<PsiObserver>(o.id, o.dt, ctx, o.ell);
  if (o.field == "occupation")
    return std::make_unique<OccupationObserver>(o.id, o.dt, ctx.n, ctx.kernel.alpha(), ctx.rho, o.site);
  throw InvalidArgument("config: unknown observer field '" + o.field + "'");
}

/// One replicate from a stationary start with stream seed base ^ r.
inline FieldTrajectory run_replicate(const ExperimentConfig& c, const FieldContext& ctx, std::size_t r) {
  Rng rng(replicate_seed(c.base_seed, r));
  auto state = init_state(c.ring_size(), c.rho, rng, c.n);
  std::vector<std::unique_ptr<MeshObserver>> owned;
  std::vector<Observer*> obs;
  for (const auto& o : c.observers) {
    owned.push_back(make_observer(o, ctx));
    obs.push_back(owned.back().get());
  }
  run(state, *ctx.ring, c.kernel.alpha, c.t_end, obs, rng);
  FieldTrajectory traj;
  for (auto& o : owned) {
    Series s = o->series();
    s.observer_id = o->id();
    traj.series.push_back(std::move(s));
  }
  return traj;
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs `count` tasks on a pool; results land in index order.
template <class Task>
void parallel_for(std::size_t count, int threads, Task&& task) {
  const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(count))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline FieldContext make_context(const ExperimentConfig& c) {
  const JumpKernel kernel(c.kernel);
  return FieldContext(kernel, std::make_shared<RingKernel>(kernel, c.ring_size()), c.n, c.rho);
}

inline ExperimentData simulate(const ExperimentConfig& c, int threads = 0) {
  const FieldContext ctx = make_context(c);
  ExperimentData data{c, std::vector<FieldTrajectory>(c.replicates)};
  parallel_for(c.replicates, resolve_threads(threads),
               [&](std::size_t r) { data.replicates[r] = run_replicate(c, ctx, r); });
  return data;
}

// ---------------------------------------------------------------------------
// Checks: pure functions of the persisted series.

namespace detail {

inline const Series& series_of(const FieldTrajectory& t, const std::string& id) { return t.get(id); }

inline std::size_t time_index(const Series& s, double t) {
  for (std::size_t k = 0; k < s.times.size(); ++k)
    if (std::fabs(s.times[k] - t) <= 1e-9 * std::max(1.0, std::fabs(t))) return k;
  throw MeshMismatch("series '" + s.observer_id + "' has no mesh point at t = " + std::to_string(t));
}

/// Values of one observer at time t across replicates.
inline std::vector<double> across(const ExperimentData& d, const std::string& id, double t) {
  std::vector<double> out;
  out.reserve(d.replicates.size());
  for (const auto& traj : d.replicates) {
    const auto& s = series_of(traj, id);
    out.push_back(s.values[time_index(s, t)]);
  }
  return out;
}

inline const ObserverSpec& observer_spec(const ExperimentConfig& c, const std::string& id) {
  for (const auto& o : c.observers)
    if (o.id == id) return o;
  throw InvalidArgument("check refers to unknown observer '" + id + "'");
}

/// rho (1 - rho) n^{-1} sum_x f(x/n)^2 over the sampled window.
inline double static_variance(const ExperimentConfig& c, const TestFunction& f) {
  const FieldContext ctx = make_context(c);
  const Window w = sample_window(ctx, f, 0.0);
  double acc = 0.0;
  for (double v : w.values) acc += v * v;
  return c.rho * (1.0 - c.rho) * acc / static_cast<double>(c.n);
}

}  // namespace detail

inline StatReport check_gaussian(const ExperimentData& d, const json& p) {
  const std::string id = p.value("observer", "Y");
  const double t = p.value("t", 0.0);
  const auto xs = detail::across(d, id, t);
  const double target = detail::static_variance(d.config, detail::observer_spec(d.config, id).f);
  auto r = gaussian_test(xs, target, p.value("z_band", 3.0), p.value("level", 0.01));
  r.name = "gaussian";
  return r;
}

inline StatReport check_stationarity(const ExperimentData& d, const json& p) {
  const std::string id = p.value("observer", "Y");
  const auto a = detail::across(d, id, 0.0);
  const auto b = detail::across(d, id, p.value("t", d.config.t_end));
  auto r = ks_two_sample(a, b, p.value("level", 0.01));
  r.name = "stationarity";
  return r;
}

/// Replicate mean of <M>_t / t against factor * rho (1 - rho) E_n(f).
inline StatReport check_qv_mean(const ExperimentData& d, const json& p) {
  const std::string id = p.value("observer", "QV");
  const double t = p.value("t", d.config.t_end);
  const double factor = p.value("factor", 4.0);
  const double tol = p.value("tolerance", 0.1);
  auto xs = detail::across(d, id, t);
  for (auto& v : xs) v /= t;
  const auto m = moments(xs);
  const JumpKernel kernel(d.config.kernel);
  const double energy = dirichlet_form_discrete(kernel, detail::observer_spec(d.config, id).f, d.config.n);
  const double target = factor * d.config.rho * (1.0 - d.config.rho) * energy;
  StatReport r;
  r.name = "qv_mean";
  r.statistic = m.mean / target - 1.0;
  r.threshold = tol;
  r.standard_error = m.mean_se / target;
  r.pass = std::fabs(r.statistic) < tol;
  r.extras = {{"mean", m.mean}, {"mean_se", m.mean_se}, {"target", target}, {"energy", energy}, {"t", t}};
  return r;
}

/// E[Y_t(f) Y_0(g)] against chi <P_t f, g> with the skewed coefficients.
inline StatReport check_covariance(const ExperimentData& d, const json& p) {
  const std::string id_t = p.value("observer_t", "Yf");
  const std::string id_0 = p.value("observer_0", id_t);
  const auto times = p.at("times").get<std::vector<double>>();
  const auto& c = d.config;
  const StableSymbol sym(RhoCoefficients::from(c.kernel, c.rho).levy());
  const double chi = c.rho * (1.0 - c.rho);
  const auto& f = detail::observer_spec(c, id_t).f;
  const auto& g = detail::observer_spec(c, id_0).f;
  const auto y0 = detail::across(d, id_0, 0.0);
  std::vector<std::vector<double>> yt;
  std::vector<double> oracle;
  for (double t : times) {
    yt.push_back(detail::across(d, id_t, t));
    oracle.push_back(ou_covariance(sym, chi, t, f, g));
  }
  auto r = covariance_compare(yt, y0, oracle, p.value("z_band", 3.0));
  r.name = "covariance";
  for (std::size_t k = 0; k < times.size(); ++k) r.extras.emplace_back("t_" + std::to_string(k), times[k]);
  return r;
}

/// Fitted exponent of Var Z_t over the listed times.
inline StatReport check_occupation_scaling(const ExperimentData& d, const json& p) {
  const std::string id = p.value("observer", "Z");
  const auto times = p.at("times").get<std::vector<double>>();
  const double lo = p.value("low", 1.18), hi = p.value("high", 1.48);
  std::vector<double> vars;
  StatReport r;
  r.name = "occupation_scaling";
  for (double t : times) {
    const auto xs = detail::across(d, id, t);
    const auto m = moments(xs);
    vars.push_back(m.variance);
    std::ostringstream tag;
    tag << t;
    r.extras.emplace_back("var_t" + tag.str(), m.variance);
    r.extras.emplace_back("var_se_t" + tag.str(), m.variance_se);
  }
  const auto fit = scaling_fit(times, vars, d.config.base_seed);
  r.statistic = fit.slope;
  r.standard_error = fit.slope_se;
  r.threshold = hi;
  r.pass = fit.slope >= lo && fit.slope <= hi;
  r.extras.emplace_back("ci_low", fit.ci_low);
  r.extras.emplace_back("ci_high", fit.ci_high);
  r.extras.emplace_back("low", lo);
  r.extras.emplace_back("high", hi);
  return r;
}

inline StatReport check_qv_monotone(const ExperimentData& d, const json& p) {
  const std::string id = p.value("observer", "QV");
  StatReport r;
  r.name = "qv_monotone";
  double worst = 0.0;
  for (const auto& traj : d.replicates) {
    const auto& v = detail::series_of(traj, id).values;
    for (std::size_t k = 1; k < v.size(); ++k) worst = std::min(worst, v[k] - v[k - 1]);
  }
  r.statistic = worst;
  r.pass = worst >= 0.0;
  return r;
}

inline StatReport check_drift_zero(const ExperimentData& d, const json& p) {
  const std::string id = p.value("observer", "A");
  StatReport r;
  r.name = "drift_zero";
  double worst = 0.0;
  for (const auto& traj : d.replicates)
    for (double v : detail::series_of(traj, id).values) worst = std::max(worst, std::fabs(v));
  r.statistic = worst;
  r.threshold = p.value("tolerance", 0.0);
  r.pass = worst <= r.threshold;
  return r;
}

/// Every configured check; none when there are no replicates.
inline std::vector<StatReport> evaluate_checks(const ExperimentData& d) {
  std::vector<StatReport> out;
  if (d.replicates.empty()) return out;
  for (const auto& ch : d.config.checks) {
    const auto& k = ch.kind;
    if (k == "gaussian") out.push_back(check_gaussian(d, ch.params));
    else if (k == "stationarity") out.push_back(check_stationarity(d, ch.params));
    else if (k == "qv_mean") out.push_back(check_qv_mean(d, ch.params));
    else if (k == "covariance") out.push_back(check_covariance(d, ch.params));
    else if (k == "occupation_scaling") out.push_back(check_occupation_scaling(d, ch.params));
    else if (k == "qv_monotone") out.push_back(check_qv_monotone(d, ch.params));
    else if (k == "drift_zero") out.push_back(check_drift_zero(d, ch.params));
    else throw InvalidArgument("config: unknown check kind '" + k + "'");
  }
  return out;
}

inline bool all_pass(const std::vector<StatReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Persistence.

inline json report_to_json(const StatReport& r) {
  json extras = json::object();
  for (const auto& [k, v] : r.extras) extras[k] = v;
  return {{"name", r.name},   {"statistic", r.statistic},           {"threshold", r.threshold},
          {"pass", r.pass},   {"standard_error", r.standard_error}, {"extras", extras}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// series.jsonl: one {replicate, observer_id, t, value} object per line.
inline void write_series(const std::filesystem::path& path, const ExperimentData& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t r = 0; r < d.replicates.size(); ++r)
    for (const auto& s : d.replicates[r].series)
      for (std::size_t k = 0; k < s.times.size(); ++k)
        out << json{{"replicate", r}, {"observer_id", s.observer_id}, {"t", s.times[k]}, {"value", s.values[k]}}.dump()
            << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::vector<FieldTrajectory> read_series(const std::filesystem::path& path, std::size_t replicates) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<FieldTrajectory> out(replicates);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const auto r = j.at("replicate").get<std::size_t>();
    if (r >= replicates) throw InvalidArgument("series: replicate index out of range");
    const auto id = j.at("observer_id").get<std::string>();
    auto& traj = out[r];
    auto it = std::find_if(traj.series.begin(), traj.series.end(), [&](const Series& s) { return s.observer_id == id; });
    if (it == traj.series.end()) {
      traj.series.push_back({id, {}, {}});
      it = traj.series.end() - 1;
    }
    it->times.push_back(j.at("t").get<double>());
    it->values.push_back(j.at("value").get<double>());
  }
  return out;
}

inline void write_reports(const std::filesystem::path& dir, const std::vector<StatReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  write_text(dir / "report.json", json{{"all_pass", all_pass(reports)}, {"checks", arr}}.dump(2) + "\n");
  std::ostringstream csv;
  csv << std::setprecision(17) << "check,statistic,threshold,standard_error,pass\n";
  for (const auto& r : reports)
    csv << r.name << ',' << r.statistic << ',' << r.threshold << ',' << r.standard_error << ',' << (r.pass ? 1 : 0)
        << '\n';
  write_text(dir / "summary.csv", csv.str());
  std::ostringstream ex;
  ex << std::setprecision(17) << "check,key,value\n";
  for (const auto& r : reports)
    for (const auto& [k, v] : r.extras) ex << r.name << ',' << k << ',' << v << '\n';
  write_text(dir / "report_extras.csv", ex.str());
}

/// Mean and variance of every observer at every mesh time: the plot data.
inline void write_series_stats(const std::filesystem::path& path, const ExperimentData& d) {
  std::ostringstream csv;
  csv << std::setprecision(17) << "observer_id,t,mean,variance,count\n";
  if (!d.replicates.empty()) {
    for (const auto& s : d.replicates.front().series) {
      for (std::size_t k = 0; k < s.times.size(); ++k) {
        std::vector<double> xs;
        for (const auto& traj : d.replicates) xs.push_back(traj.get(s.observer_id).values[k]);
        double mean = 0.0, var = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        for (double x : xs) var += (x - mean) * (x - mean);
        var = xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
        csv << s.observer_id << ',' << s.times[k] << ',' << mean << ',' << var << ',' << xs.size() << '\n';
      }
    }
  }
  write_text(path, csv.str());
}

inline json metadata(const ExperimentConfig& c, int threads) {
  const JumpKernel kernel(c.kernel);
  return {{"config_hash", config_hash(c)},
          {"base_seed", c.base_seed},
          {"replicates", c.replicates},
          {"n", c.n},
          {"N", c.ring_size()},
          {"rho", c.rho},
          {"velocity", (1.0 - 2.0 * c.rho) * centering_constant(kernel, c.n)},
          {"threads", threads},
          {"rng", "xoshiro256++, replicate stream base_seed ^ r"},
          {"config", config_to_json(c)}};
}

struct ExperimentResult {
  ExperimentData data;
  std::vector<StatReport> reports;
};

/// Simulates, checks and persists config.json, metadata.json, series.jsonl,
/// series_stats.csv, report.json, summary.csv and report_extras.csv.
inline ExperimentResult run_experiment(const ExperimentConfig& c, const std::filesystem::path& out, int threads = 0) {
  std::filesystem::create_directories(out);
  const int used = resolve_threads(threads);
  ExperimentResult res{simulate(c, used), {}};
  res.reports = evaluate_checks(res.data);
  write_text(out / "config.json", config_to_json(c).dump(2) + "\n");
  write_text(out / "metadata.json", metadata(c, used).dump(2) + "\n");
  write_series(out / "series.jsonl", res.data);
  write_series_stats(out / "series_stats.csv", res.data);
  write_reports(out, res.reports);
  return res;
}

/// Recomputes the reports of a finished run from its persisted files.
inline std::vector<StatReport> recompute_reports(const std::filesystem::path& dir) {
  std::ifstream in(dir / "metadata.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "metadata.json").string());
  json meta;
  in >> meta;
  const auto c = config_from_json(meta.at("config"));
  if (config_hash(c) != meta.at("config_hash").get<std::string>())
    throw InvalidArgument("metadata: config hash does not match the stored config");
  ExperimentData d{c, read_series(dir / "series.jsonl", c.replicates)};
  return evaluate_checks(d);
}

}  // namespace lrex
