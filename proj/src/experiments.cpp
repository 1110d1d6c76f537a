#include "wpcn/experiments.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "wpcn/simulator.hpp"
#include "wpcn/slot_oriented.hpp"

namespace wpcn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- config helpers -------------------------------------------------------

YAML::Node section(const Config& cfg, const std::string& name) {
  if (cfg.experiments && cfg.experiments.IsMap() && cfg.experiments[name])
    return cfg.experiments[name];
  return YAML::Node(YAML::NodeType::Map);
}

template <class T>
T get(const YAML::Node& node, const char* key, T fallback) {
  if (!node[key]) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return v;
}

std::vector<std::string> get_strings(const YAML::Node& node, const char* key,
                                     std::vector<std::string> fallback) {
  return get<std::vector<std::string>>(node, key, std::move(fallback));
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

// ---- output helpers -------------------------------------------------------

class CsvFile {
 public:
  CsvFile(const fs::path& dir, const std::string& name, ExperimentRun& run) {
    os_.open(dir / name, std::ios::out | std::ios::trunc);
    if (!os_) throw OutputError("cannot write " + (dir / name).string());
    os_ << std::setprecision(10);
    run.outputs.push_back(name);
  }
  std::ofstream& os() { return os_; }

 private:
  std::ofstream os_;
};

json pair_json(const ThroughputPair& t) { return {{"G1_bps", t.g1}, {"G2_bps", t.g2}}; }

json fair_json(const FairResult& f) {
  return {{"alpha_bar", f.alpha_bar},
          {"G1_bps", f.throughput.g1},
          {"G2_bps", f.throughput.g2},
          {"fair_throughput_bps", f.fair_throughput()},
          {"equalized", f.converged},
          {"mixed", f.mixed},
          {"lambda", f.lambda},
          {"bisection_steps", static_cast<int>(f.trace.size())}};
}

// ---- sweep machinery ------------------------------------------------------

struct SweepPoint {
  double x = 0.0;
  double g_mdp = NAN, g_slot = NAN, g_approx = NAN;
  bool converged = true;
};

struct SweepSpec {
  std::vector<double> xs;
  std::function<SystemParams(double)> params;
  std::function<GridSpec(double)> grid;
  bool approx = true;
};

std::vector<SweepPoint> run_sweep(const Config& cfg, const SweepSpec& spec) {
  std::vector<SweepPoint> pts(spec.xs.size());
  const auto n = static_cast<long>(pts.size());
  Config inner = cfg;
  if (n > 1) inner.vi.kernel = SweepKernel::kSerial;
#pragma omp parallel for schedule(dynamic) if (n > 1)
  for (long i = 0; i < n; ++i) {
    const double x = spec.xs[i];
    const SystemParams p = spec.params(x);
    const GridSpec g = spec.grid(x);
    SweepPoint pt;
    pt.x = x;
    const FairResult exact = solve_fair_exact(inner, p, g, cfg.fading);
    pt.g_mdp = exact.fair_throughput();
    pt.converged = exact.all_converged;
    pt.g_slot = long_term_slot_reward(make_pmf(cfg, p, g, cfg.fading), p);
    if (spec.approx) {
      const FairResult approx = solve_fair_approx(inner, p, g, cfg.fading);
      pt.g_approx = approx.fair_throughput();
    }
    pts[i] = pt;
  }
  return pts;
}

void write_sweep(const fs::path& dir, const std::string& name, const std::vector<SweepPoint>& pts,
                 ExperimentRun& run, const char* x_label) {
  CsvFile f(dir, name, run);
  f.os() << "x_value,G_mdp_bps,G_slot_bps,G_approx_bps\n";
  for (const auto& pt : pts) {
    f.os() << pt.x << ',' << pt.g_mdp << ',' << pt.g_slot << ',';
    if (std::isnan(pt.g_approx))
      f.os() << "nan";
    else
      f.os() << pt.g_approx;
    f.os() << '\n';
    run.all_converged = run.all_converged && pt.converged;
  }
  json curve = json::array();
  for (const auto& pt : pts)
    curve.push_back({{x_label, pt.x},
                     {"G_mdp_bps", pt.g_mdp},
                     {"G_slot_bps", pt.g_slot},
                     {"G_approx_bps", std::isnan(pt.g_approx) ? json(nullptr) : json(pt.g_approx)}});
  run.results["curves"][name] = curve;
}

// ---- experiments ----------------------------------------------------------

void fair_point(const Config& cfg, const fs::path& out, ExperimentRun& run) {
  const auto sec = section(cfg, "fair-point");
  SystemParams p = with_geometry(cfg.system, get(sec, "d1", cfg.system.dev[0].distance),
                                 get(sec, "d2", cfg.system.dev[1].distance));
  if (sec["b_max_mJ"]) p = with_battery(p, sec["b_max_mJ"].as<double>());
  const GridSpec& g = cfg.grid();
  const FairResult f = solve_fair_exact(cfg, p, g, cfg.fading);
  run.all_converged = f.all_converged;
  {
    CsvFile csv(out, "fair_point.csv", run);
    csv.os() << "quantity,value\n";
    csv.os() << "alpha_bar," << f.alpha_bar << '\n';
    csv.os() << "G1_bps," << f.throughput.g1 << '\n';
    csv.os() << "G2_bps," << f.throughput.g2 << '\n';
    csv.os() << "fair_throughput_bps," << f.fair_throughput() << '\n';
    csv.os() << "mixed," << (f.mixed ? 1 : 0) << '\n';
    csv.os() << "lambda," << f.lambda << '\n';
  }
  {
    CsvFile csv(out, "fair_trace.csv", run);
    write_fair_trace(csv.os(), f.trace);
  }
  {
    CsvFile csv(out, "value_function.csv", run);
    write_value_function_csv(csv.os(), f.lo.K);
  }
  {
    CsvFile csv(out, "policy.csv", run);
    write_policy_csv(csv.os(), f.policy);
  }
  run.results = fair_json(f);
  run.results["G_slot_bps"] = long_term_slot_reward(make_pmf(cfg, p, g, cfg.fading), p);
}

void slot_division(const Config& cfg, const fs::path& out, ExperimentRun& run) {
  const auto sec = section(cfg, "slot-division");
  const double d1 = get(sec, "d1", cfg.system.dev[0].distance);
  const auto d2s = get<std::vector<double>>(sec, "d2", {3.0, 5.0});
  const GridSpec& g = cfg.grid();
  for (double d2 : d2s) {
    const SystemParams p = with_geometry(cfg.system, d1, d2);
    const ChannelPmf pmf = make_pmf(cfg, p, g, cfg.fading);
    const FairResult fair = solve_fair_exact(cfg, p, g, cfg.fading);
    run.all_converged = run.all_converged && fair.all_converged;
    const AlphaSolution half = make_exact_solver(pmf, p, g, cfg.vi)(0.5, nullptr);
    run.all_converged = run.all_converged && half.converged;

    struct Case {
      std::string label;
      double alpha;
      const Policy* policy;
      const PolicyEvaluation* ev;
    };
    const PolicyEvaluation fair_ev = evaluate_policy(fair.policy, pmf, p);
    const Case cases[2] = {{"0.5", 0.5, &half.policy, &half.evaluation},
                           {"fair", fair.alpha_bar, &fair.policy, &fair_ev}};
    for (const auto& c : cases) {
      const SlotDivision sd = slot_division(*c.policy, pmf, p, c.ev->occupancy);
      const std::string name = "slotdiv_d2_" + fmt(d2) + "_alpha_" + c.label + ".csv";
      CsvFile csv(out, name, run);
      csv.os() << "quantity,device,value\n";
      csv.os() << "alpha,all," << c.alpha << '\n';
      for (int i = 0; i < 2; ++i) {
        const int dev = i + 1;
        csv.os() << "rho_W," << dev << ',' << sd.rho[i] << '\n';
        csv.os() << "Q_over_Qmax," << dev << ',' << sd.q_fraction[i] << '\n';
        csv.os() << "tau_s," << dev << ',' << sd.tau[i] << '\n';
        csv.os() << "transmit_probability," << dev << ',' << sd.transmit_probability[i] << '\n';
      }
      csv.os() << "tau_s,AP," << sd.tau_ap << '\n';
      csv.os() << "throughput_bps,1," << c.ev->throughput.g1 << '\n';
      csv.os() << "throughput_bps,2," << c.ev->throughput.g2 << '\n';
      run.results["cases"][name] = {{"d2", d2},
                                    {"alpha", c.alpha},
                                    {"G1_bps", c.ev->throughput.g1},
                                    {"G2_bps", c.ev->throughput.g2},
                                    {"Q1_over_Qmax", sd.q_fraction[0]},
                                    {"Q2_over_Qmax", sd.q_fraction[1]}};
    }
  }
}

void throughput_region_exp(const Config& cfg, const fs::path& out, ExperimentRun& run) {
  const auto sec = section(cfg, "throughput-region");
  const auto alphas = get<std::vector<double>>(sec, "alphas", linspace(0.0, 1.0, 21));
  if (alphas.empty()) throw ConfigError("throughput-region needs a nonempty alpha list");
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha values must lie in [0, 1]");
  const auto fadings = get_strings(sec, "fadings", {"rayleigh", "nakagami:5"});
  SystemParams p = with_geometry(cfg.system, get(sec, "d1", cfg.system.dev[0].distance),
                                 get(sec, "d2", cfg.system.dev[1].distance));
  p = with_battery(p, get(sec, "b_max_mJ", 0.15));
  const GridSpec& g = cfg.grid();
  for (const auto& name : fadings) {
    FadingModel fading;
    try {
      fading = parse_fading(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const ChannelPmf pmf = make_pmf(cfg, p, g, fading);
    const auto region = throughput_region(make_exact_solver(pmf, p, g, cfg.vi), alphas);
    std::string tag = name;
    for (auto& ch : tag)
      if (ch == ':') ch = '_';
    CsvFile csv(out, "region_" + tag + ".csv", run);
    csv.os() << "alpha,G1_bps,G2_bps\n";
    for (const auto& r : region) {
      csv.os() << r.alpha << ',' << r.throughput.g1 << ',' << r.throughput.g2 << '\n';
      run.all_converged = run.all_converged && r.converged;
    }
    const FairResult fair = solve_fair_exact(cfg, p, g, fading);
    run.all_converged = run.all_converged && fair.all_converged;
    run.results["fair"][tag] = fair_json(fair);
  }
}

void battery_sweep(const Config& cfg, const fs::path& out, ExperimentRun& run) {
  const auto sec = section(cfg, "battery-sweep");
  const auto b_list = get<std::vector<double>>(sec, "b_max_mJ", linspace(0.1, 0.3, 9));
  const auto d1s = get<std::vector<double>>(sec, "d1", {1.0, 2.0, 3.0});
  const double d2 = get(sec, "d2", cfg.system.dev[1].distance);
  // Fixed energy quantum, so larger batteries get more levels.
  const GridSpec base = cfg.grid();
  const double quantum_mj =
      get(sec, "quantum_mJ", cfg.system.dev[0].b_max * 1e3 / base.b_max[0]);
  const bool approx = get(sec, "approx", true);
  for (double d1 : d1s) {
    SweepSpec spec;
    spec.xs = b_list;
    spec.approx = approx;
    spec.params = [&](double b) { return with_battery(with_geometry(cfg.system, d1, d2), b); };
    spec.grid = [&](double b) {
      GridSpec g = base;
      const int levels = std::max(1, static_cast<int>(std::lround(b / quantum_mj)));
      g.b_max = {levels, levels};
      return g;
    };
    write_sweep(out, "sweep_battery_d1_" + fmt(d1) + ".csv", run_sweep(cfg, spec), run,
                "b_max_mJ");
  }
}

void distance_sweep(const Config& cfg, const fs::path& out, ExperimentRun& run) {
  const auto sec = section(cfg, "distance-sweep");
  const auto regimes = get_strings(sec, "power", {"high", "low"});
  const auto d1s = get<std::vector<double>>(sec, "d1", linspace(1.0, 5.0, 9));
  const auto d2_high = get<std::vector<double>>(sec, "d2_high", {1.0, 3.0, 5.0});
  const auto d2_low = get<std::vector<double>>(sec, "d2_low", {3.0});
  const double b = get(sec, "b_max_mJ", cfg.system.dev[0].b_max * 1e3);
  const bool approx = get(sec, "approx", false);
  const GridSpec g = cfg.grid();
  for (const auto& regime : regimes) {
    const auto& d2s = regime == "low" ? d2_low : d2_high;
    for (double d2 : d2s) {
      SweepSpec spec;
      spec.xs = d1s;
      spec.approx = approx;
      spec.params = [&](double d1) {
        return with_power(with_battery(with_geometry(cfg.system, d1, d2), b), regime);
      };
      spec.grid = [&](double) { return g; };
      write_sweep(out, "sweep_distance_" + regime + "_d2_" + fmt(d2) + ".csv",
                  run_sweep(cfg, spec), run, "d1_m");
    }
  }
}

void approx_vs_exact(const Config& cfg, const fs::path& out, ExperimentRun& run) {
  const auto sec = section(cfg, "approx-vs-exact");
  const auto b_list = get<std::vector<double>>(sec, "b_max_mJ", {0.1, 0.15});
  const auto d1s = get<std::vector<double>>(sec, "d1", linspace(1.0, 5.0, 5));
  const double d2 = get(sec, "d2", cfg.system.dev[1].distance);
  const GridSpec g = cfg.grid();
  for (double b : b_list) {
    SweepSpec spec;
    spec.xs = d1s;
    spec.approx = true;
    spec.params = [&](double d1) { return with_battery(with_geometry(cfg.system, d1, d2), b); };
    spec.grid = [&](double) { return g; };
    write_sweep(out, "sweep_approx_bmax_" + fmt(b) + ".csv", run_sweep(cfg, spec), run, "d1_m");
  }
}

void slot_baseline(const Config& cfg, const fs::path& out, ExperimentRun& run) {
  const auto sec = section(cfg, "slot-baseline");
  const SystemParams p = with_geometry(cfg.system, get(sec, "d1", cfg.system.dev[0].distance),
                                       get(sec, "d2", cfg.system.dev[1].distance));
  const GridSpec& g = cfg.grid();
  const ChannelPmf pmf = make_pmf(cfg, p, g, cfg.fading);
  CsvFile csv(out, "slot_solutions.csv", run);
  csv.os() << "outcome,prob,g1,g2,h1,h2," << SlotSolution::csv_header() << '\n';
  double worst = 0.0;
  for (std::size_t c = 0; c < pmf.size(); ++c) {
    const auto& ch = pmf[c];
    const SlotSolution s = solve_slot(ch, p);
    worst = std::max(worst, slot_invariant_violation(s, ch, p));
    csv.os() << c << ',' << ch.prob << ',' << ch.g[0] << ',' << ch.g[1] << ',' << ch.h[0] << ','
             << ch.h[1] << ',';
    s.write_csv_row(csv.os());
  }
  run.results["G_slot_bps"] = long_term_slot_reward(pmf, p);
  run.results["max_invariant_violation"] = worst;
}

void simulate_exp(const Config& cfg, const fs::path& out, ExperimentRun& run) {
  const auto sec = section(cfg, "simulate");
  const SystemParams p = with_geometry(cfg.system, get(sec, "d1", cfg.system.dev[0].distance),
                                       get(sec, "d2", cfg.system.dev[1].distance));
  const GridSpec& g = cfg.grid();
  const ChannelPmf pmf = make_pmf(cfg, p, g, cfg.fading);
  const double alpha = get(sec, "alpha", 0.5);
  const AlphaSolution sol = make_exact_solver(pmf, p, g, cfg.vi)(alpha, nullptr);
  run.all_converged = sol.converged;
  SimulationOptions so;
  so.n_slots = get<std::uint64_t>(sec, "n_slots", 1000000);
  so.seed = cfg.seed;
  std::ofstream traj;
  if (get(sec, "trajectory", false)) {
    traj.open(out / "trajectory.csv");
    if (!traj) throw OutputError("cannot write trajectory.csv");
    so.trajectory = &traj;
    run.outputs.push_back("trajectory.csv");
  }
  const SimulationResult sim = simulate(as_rule(sol.policy), pmf, p, g, so);
  CsvFile csv(out, "simulate.csv", run);
  csv.os() << "quantity,device,value\n";
  csv.os() << "analytic_bps,1," << sol.throughput.g1 << '\n';
  csv.os() << "analytic_bps,2," << sol.throughput.g2 << '\n';
  csv.os() << "monte_carlo_bps,1," << sim.throughput.g1 << '\n';
  csv.os() << "monte_carlo_bps,2," << sim.throughput.g2 << '\n';
  csv.os() << "std_error_bps,1," << sim.std_error.g1 << '\n';
  csv.os() << "std_error_bps,2," << sim.std_error.g2 << '\n';
  run.results = {{"alpha", alpha},
                 {"analytic", pair_json(sol.throughput)},
                 {"monte_carlo", pair_json(sim.throughput)},
                 {"std_error", pair_json(sim.std_error)},
                 {"n_slots", so.n_slots}};
}

}  // namespace

SystemParams with_geometry(SystemParams p, double d1, double d2) {
  p.dev[0].distance = d1;
  p.dev[1].distance = d2;
  return p;
}

SystemParams with_battery(SystemParams p, double b_max_mj) {
  p.dev[0].b_max = p.dev[1].b_max = b_max_mj * 1e-3;
  return p;
}

SystemParams with_power(SystemParams p, const std::string& regime) {
  double lo = 0.0, hi = 0.0;
  if (regime == "high") {
    lo = 1e-3;
    hi = 10e-3;
  } else if (regime == "low") {
    lo = 0.01e-3;
    hi = 0.5e-3;
  } else {
    throw ConfigError("power regime must be high or low");
  }
  for (auto& d : p.dev) {
    d.p_min = lo;
    d.p_max = hi;
  }
  return p;
}

ChannelPmf make_pmf(const Config& cfg, const SystemParams& p, const GridSpec& g,
                    const FadingModel& fading) {
  return build_channel_pmf(p, g, fading, cfg.reciprocity);
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "slot-division", "approx-vs-exact", "throughput-region", "battery-sweep",
      "distance-sweep", "fair-point",     "slot-baseline",     "simulate"};
  return names;
}

FairResult solve_fair_exact(const Config& cfg, const SystemParams& p, const GridSpec& g,
                            const FadingModel& fading) {
  const ChannelPmf pmf = make_pmf(cfg, p, g, fading);
  return find_fair_alpha(make_exact_solver(pmf, p, g, cfg.vi), cfg.fair);
}

FairResult solve_fair_approx(const Config& cfg, const SystemParams& p, const GridSpec& g,
                             const FadingModel& fading) {
  const ChannelPmf pmf = make_pmf(cfg, p, g, fading);
  AvOptions av;
  av.tol = cfg.vi.tol;
  av.max_iters = cfg.vi.max_iters;
  av.audit_fraction = cfg.approx.audit_fraction;
  av.kernel = cfg.vi.kernel;
  return find_fair_alpha(make_approx_solver(pmf, p, g, cfg.approx.make_schedule(), av), cfg.fair);
}

ExperimentRun run_experiment(const std::string& name, const Config& cfg, const fs::path& out) {
  ExperimentRun run;
  if (name == "fair-point")
    fair_point(cfg, out, run);
  else if (name == "slot-division")
    slot_division(cfg, out, run);
  else if (name == "throughput-region")
    throughput_region_exp(cfg, out, run);
  else if (name == "battery-sweep")
    battery_sweep(cfg, out, run);
  else if (name == "distance-sweep")
    distance_sweep(cfg, out, run);
  else if (name == "approx-vs-exact")
    approx_vs_exact(cfg, out, run);
  else if (name == "slot-baseline")
    slot_baseline(cfg, out, run);
  else if (name == "simulate")
    simulate_exp(cfg, out, run);
  else
    throw UnknownExperiment("unknown experiment '" + name + "'");
  return run;
}

json config_to_json(const Config& cfg) {
  json devs = json::array();
  for (const auto& d : cfg.system.dev)
    devs.push_back({{"distance_m", d.distance},
                    {"h0", d.h0},
                    {"g0", d.g0},
                    {"gamma", d.gamma},
                    {"delta", d.delta},
                    {"p_min_W", d.p_min},
                    {"p_max_W", d.p_max},
                    {"b_max_J", d.b_max}});
  const GridSpec& g = cfg.grid();
  return {{"system",
           {{"slot_s", cfg.system.slot},
            {"q_max_W", cfg.system.q_max},
            {"eta", cfg.system.eta},
            {"bandwidth_Hz", cfg.system.bandwidth},
            {"noise_dBm_per_Hz", cfg.noise_dbm_per_hz},
            {"noise_W", cfg.system.noise},
            {"rate_log_base", kRateLogBase}}},
          {"devices", devs},
          {"grid_preset", cfg.preset},
          {"grid",
           {{"b_max", {g.b_max[0], g.b_max[1]}},
            {"n_fading_bins", g.n_fading_bins},
            {"n_tauap_grid", g.n_tauap_grid},
            {"n_q1_grid", g.n_q1_grid},
            {"rounding", g.rounding == Rounding::kFloor ? "floor" : "ceil"}}},
          {"channel", {{"fading", cfg.fading.name()}, {"reciprocity", cfg.reciprocity}}},
          {"solver",
           {{"tol", cfg.vi.tol > 0 ? cfg.vi.tol : default_tolerance(cfg.system)},
            {"max_iters", cfg.vi.max_iters},
            {"evaluation_sweeps", cfg.vi.evaluation_sweeps},
            {"relaxation", cfg.vi.relaxation},
            {"epsilon_fair", cfg.fair.epsilon_fair},
            {"max_bisect", cfg.fair.max_bisect},
            {"energy_tight_candidates", cfg.vi.optimizer.energy_tight_candidates}}},
          {"approx",
           {{"schedule", cfg.approx.schedule},
            {"stride", cfg.approx.stride},
            {"fraction", cfg.approx.fraction},
            {"audit_fraction", cfg.approx.audit_fraction},
            {"seed", cfg.approx.seed}}},
          {"seed", cfg.seed},
          {"experiments", YAML::Dump(cfg.experiments)}};
}

}  // namespace wpcn
