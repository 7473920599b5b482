#include "epdiff/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "epdiff/errors.hpp"

namespace epdiff {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

json coefficients_json(const FourierField& u) {
  json c = json::array();
  for (const auto& z : u.nonnegative()) c.push_back({z.real(), z.imag()});
  return c;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

class FileSink : public TrajectorySink {
 public:
  explicit FileSink(const fs::path& dir) : dir_(dir), csv_(dir / "diagnostics.csv") {
    if (!csv_) throw ConfigError("cannot write " + (dir / "diagnostics.csv").string());
    ensure_directory(dir / "snapshots");
    csv_ << "t,energy,h12,h32,h2,sup_u,sup_ux,dt,tail_fraction\n";
  }

  void on_record(const DiagnosticsRecord& r) override {
    csv_ << sci(r.t) << ',' << sci(r.energy) << ',' << sci(r.h12) << ',' << sci(r.h32) << ','
         << sci(r.h2) << ',' << sci(r.sup_u) << ',' << sci(r.sup_ux) << ',' << sci(r.dt) << ','
         << sci(r.tail_fraction) << '\n';
  }

  void on_snapshot(const Snapshot& s) override {
    char name[40];
    std::snprintf(name, sizeof name, "snapshot_%08ld.json", s.step);
    write_json(dir_ / "snapshots" / name,
               json{{"t", s.t}, {"step", s.step}, {"bandwidth", s.u.bandwidth()},
                    {"coefficients", coefficients_json(s.u)}});
  }

 private:
  fs::path dir_;
  std::ofstream csv_;
};

json summary_json(const Trajectory& tr, const ExperimentConfig& config, const std::string& op_name) {
  double max_ux = 0.0, max_u = 0.0, max_tail = 0.0, drift = 0.0;
  const double e0 = tr.records.empty() ? 0.0 : tr.records.front().energy;
  for (const auto& r : tr.records) {
    max_ux = std::max(max_ux, r.sup_ux);
    max_u = std::max(max_u, r.sup_u);
    max_tail = std::max(max_tail, r.tail_fraction);
    if (e0 > 0.0) drift = std::max(drift, std::abs(r.energy - e0) / e0);
  }
  return json{
      {"operator", op_name},
      {"N", config.N},
      {"T", config.T},
      {"u0", config.u0},
      {"termination", std::string(to_string(tr.termination))},
      {"verdict", std::string(to_string(tr.verdict))},
      {"t_event", optional_json(tr.t_event)},
      {"message", tr.message},
      {"steps", tr.steps},
      {"final_t", tr.records.empty() ? 0.0 : tr.records.back().t},
      {"energy_initial", e0},
      {"energy_final", tr.records.empty() ? 0.0 : tr.records.back().energy},
      {"max_relative_energy_drift", drift},
      {"sup_ux_initial", tr.records.empty() ? 0.0 : tr.records.front().sup_ux},
      {"max_sup_ux", max_ux},
      {"max_sup_u", max_u},
      {"max_tail_fraction", max_tail},
  };
}

json report_json(const EstimateReport& r) {
  return json{{"name", r.name},     {"lhs", r.lhs},           {"rhs_bound", r.rhs_bound},
              {"ratio", r.ratio},   {"witness", r.witness},   {"tolerance", r.tolerance},
              {"passed", r.passed}, {"details", r.details}};
}

bool parse_double(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return !s.empty() && end == s.c_str() + s.size();
}

}  // namespace

Symbol resolve_symbol(const ExperimentConfig& config) {
  if (config.op == "sobolev") return make_sobolev(config.s.value_or(3.0));
  if (parse_builtin(config.op)) {
    if (config.s) throw ConfigError("--s only applies to the sobolev family");
    return make_builtin(*parse_builtin(config.op));
  }
  if (fs::exists(config.op)) return load_symbol_csv(config.op);
  return symbol_by_name(config.op, config.s);
}

InertiaOperator resolve_operator(const ExperimentConfig& config) {
  InertiaOptions opts;
  opts.allow_degenerate = config.allow_degenerate;
  return InertiaOperator::create(resolve_symbol(config), opts);
}

FourierField parse_initial_condition(const std::string& spec, int bandwidth) {
  FourierField u(bandwidth);
  if (spec == "sin") {
    u.set(1, Complex{0.0, -0.5});
  } else if (spec == "minus_sin") {
    u.set(1, Complex{0.0, 0.5});
  } else if (spec == "cos") {
    u.set(1, Complex{0.5, 0.0});
  } else if (spec == "zero") {
  } else if (spec.rfind("const:", 0) == 0) {
    double c = 0.0;
    if (!parse_double(spec.substr(6), c)) throw ConfigError("bad constant in u0 spec '" + spec + "'");
    u = FourierField::constant(c, bandwidth);
  } else if (spec.rfind("random:", 0) == 0) {
    const auto rest = spec.substr(7);
    const auto colon = rest.find(':');
    double p = 0.0, seed = 0.0;
    if (colon == std::string::npos || !parse_double(rest.substr(0, colon), p) ||
        !parse_double(rest.substr(colon + 1), seed) || seed < 0.0 || seed != std::floor(seed)) {
      throw ConfigError("u0 spec must be random:p:seed, got '" + spec + "'");
    }
    u = random_field(bandwidth, p, static_cast<std::uint64_t>(seed));
  } else if (fs::exists(spec)) {
    std::ifstream f(spec);
    json j;
    try {
      f >> j;
      std::vector<Complex> c;
      for (const auto& z : j.at("coefficients")) c.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
      if (c.empty()) throw ConfigError("no coefficients in " + spec);
      u = FourierField::from_nonnegative(std::move(c)).resized(bandwidth);
    } catch (const json::exception& e) {
      throw ConfigError("cannot read coefficients from " + spec + ": " + e.what());
    }
  } else {
    throw ConfigError("unknown u0 spec '" + spec + "'");
  }
  return u;
}

SolverConfig solver_config(const ExperimentConfig& config) {
  SolverConfig c;
  c.u0 = parse_initial_condition(config.u0, std::max(config.N, 1));
  c.bandwidth = config.N;
  c.cfl = config.cfl;
  c.dt_max = config.dt_max;
  c.horizon = config.T;
  c.snapshot_every = config.cadence;
  if (config.cadence < 0) throw ConfigError("cadence must be >= 0");
  return c;
}

int cmd_simulate(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const auto op = resolve_operator(config);
    const auto sc = solver_config(config);
    op.inverse();
    ensure_directory(config.output);
    Trajectory tr;
    {
      FileSink sink(config.output);
      tr = run(sc, op, &sink);
    }
    write_json(config.output / "summary.json", summary_json(tr, config, op.name()));
    out << "operator " << op.name() << ", N = " << config.N << ", " << tr.steps << " steps\n"
        << "termination: " << to_string(tr.termination) << ", verdict: " << to_string(tr.verdict);
    if (tr.t_event) out << " at t = " << *tr.t_event;
    out << "\n" << tr.message << "\n";
    const bool clean = tr.termination == Termination::horizon && tr.verdict == BlowupVerdict::none;
    return clean ? 0 : 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_verify(const std::string& suite, const ExperimentConfig& config, std::ostream& out,
               std::ostream& err) {
  static const std::vector<std::string> kSuites{"lemma_a", "lemma_b", "lemma_c", "lemma_d",
                                                "q_decomposition", "gronwall"};
  if (suite != "all" && std::find(kSuites.begin(), kSuites.end(), suite) == kSuites.end()) {
    err << "error: unknown suite '" << suite << "'\n";
    return 1;
  }
  std::optional<InertiaOperator> op;
  try {
    op = resolve_operator(config);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  SuiteOptions opts;
  opts.bandwidth = config.N;
  opts.corpus = config.corpus;
  opts.seed = config.seed;
  opts.adversaries = config.adversaries;
  opts.lemma_c_order = config.order;

  json reports = json::array();
  bool all_passed = true;
  out << std::left << std::setw(18) << "suite" << std::setw(8) << "checks" << std::setw(16)
      << "max ratio" << "status\n";
  auto table_row = [&](const std::string& name, std::size_t checks, double ratio, bool passed) {
    out << std::left << std::setw(18) << name << std::setw(8) << checks << std::setw(16) << ratio
        << (passed ? "PASS" : "FAIL") << "\n";
  };

  for (const auto& name : kSuites) {
    if (suite != "all" && suite != name) continue;
    try {
      if (name == "gronwall") {
        const auto tr = run(solver_config(config), *op);
        const auto g = gronwall_certificate(tr, *op);
        reports.push_back(json{{"suite", name},
                               {"passed", g.passed},
                               {"reason", g.reason},
                               {"alpha", g.alpha},
                               {"beta", g.beta},
                               {"integral_margin", g.integral_margin},
                               {"quadrature_tolerance", g.quadrature_tolerance},
                               {"energy_equivalence", g.energy_equivalence},
                               {"max_h32_squared", g.max_h32_squared},
                               {"energy_upper", g.energy_upper},
                               {"energy_lower", g.energy_lower},
                               {"snapshots", g.snapshots},
                               {"termination", std::string(to_string(tr.termination))}});
        table_row(name, g.snapshots, g.alpha + g.beta, g.passed);
        if (!g.passed) err << "gronwall: " << g.reason << "\n";
        all_passed = all_passed && g.passed;
        continue;
      }
      for (const auto& res : run_suite(name, *op, opts)) {
        json j{{"suite", res.name}, {"passed", res.passed}, {"constants", res.constants},
               {"witnesses", res.witnesses}};
        json list = json::array();
        double max_ratio = 0.0;
        for (const auto& r : res.reports) {
          list.push_back(report_json(r));
          if (r.name.rfind("kappa_", 0) != 0) max_ratio = std::max(max_ratio, r.ratio);
          if (!r.passed) err << res.name << ": " << r.name << " failed on witness " << r.witness << "\n";
        }
        j["reports"] = std::move(list);
        reports.push_back(std::move(j));
        table_row(res.name, res.reports.size(), max_ratio, res.passed);
        all_passed = all_passed && res.passed;
      }
    } catch (const Error& e) {
      reports.push_back(json{{"suite", name}, {"passed", false}, {"error", e.what()}});
      table_row(name, 0, 0.0, false);
      err << name << ": " << e.what() << "\n";
      all_passed = false;
    }
  }
  try {
    ensure_directory(config.output);
    write_json(config.output / "reports.json", reports);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return all_passed ? 0 : 1;
}

int sweep_threads(const ExperimentConfig& config) {
  if (config.threads > 0) return config.threads;
  if (const char* env = std::getenv("EPDIFF_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  if (config.steps < 1 || !(config.s_min <= config.s_max)) {
    err << "error: empty sweep range\n";
    return 1;
  }
  if (config.s_min < 0.0 || config.s_max > 4.0) {
    err << "error: sweep range must lie within [0, 4]\n";
    return 1;
  }
  try {
    solver_config(config);
    ensure_directory(config.output);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  struct Row {
    double s = 0.0;
    std::string verdict;
    std::optional<double> t_event;
    double max_sup_ux = 0.0;
    json summary;
  };
  const int n = config.steps;
  std::vector<Row> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rows[i].s = n == 1 ? config.s_min : config.s_min + (config.s_max - config.s_min) * i / (n - 1);
  }

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      Row& row = rows[i];
      ExperimentConfig c = config;
      c.op = "sobolev";
      c.s = 2.0 * row.s;
      try {
        const auto op = resolve_operator(c);
        const auto tr = run(solver_config(c), op);
        row.verdict = std::string(to_string(tr.verdict));
        row.t_event = tr.t_event;
        for (const auto& r : tr.records) row.max_sup_ux = std::max(row.max_sup_ux, r.sup_ux);
        row.summary = summary_json(tr, c, op.name());
      } catch (const Error& e) {
        row.verdict = "error";
        row.summary = json{{"error", e.what()}};
      }
      row.summary["s"] = row.s;
    }
  };
  const int threads = std::min(sweep_threads(config), n);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  try {
    std::ofstream csv(config.output / "phase.csv");
    if (!csv) throw ConfigError("cannot write phase.csv");
    csv << "s,verdict,t_event,max_sup_ux\n";
    for (int i = 0; i < n; ++i) {
      const Row& row = rows[i];
      char dir[32];
      std::snprintf(dir, sizeof dir, "row_%03d", i);
      ensure_directory(config.output / "rows" / dir);
      write_json(config.output / "rows" / dir / "summary.json", row.summary);
      csv << sci(row.s) << ',' << row.verdict << ',' << (row.t_event ? sci(*row.t_event) : "") << ','
          << sci(row.max_sup_ux) << '\n';
      out << "s = " << row.s << ": " << row.verdict;
      if (row.t_event) out << " (t = " << *row.t_event << ")";
      out << ", max sup|u_x| = " << row.max_sup_ux << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_decompose(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig c = config;
    c.allow_degenerate = true;
    const auto op = resolve_operator(c);
    const ClassReport& r = op.report();
    auto flag = [](bool ok) { return ok ? "PASS" : "FAIL"; };
    out << "operator " << op.name() << " (certified up to |k| = " << r.bandwidth << ")\n"
        << "  realness      " << flag(r.real) << "  max |Im a| = " << r.max_imag << "\n"
        << "  positivity    " << flag(r.positive) << "  min a = " << r.min_value << " at k = " << r.argmin;
    if (!r.kernel_modes.empty()) {
      out << ", kernel modes {";
      for (std::size_t i = 0; i < r.kernel_modes.size(); ++i) out << (i ? "," : "") << r.kernel_modes[i];
      out << "}";
    }
    out << "\n"
        << "  ellipticity   " << flag(r.elliptic) << "  c = " << r.ellipticity_constant << "\n"
        << "  growth        " << flag(r.bounded_growth) << "  C = " << r.growth_constant << "\n"
        << "  derivatives   " << flag(r.derivative_decay) << "  " << r.derivative_constants[0] << ", "
        << r.derivative_constants[1] << "\n"
        << "  expansion     " << flag(r.expansion.has_value()) << "\n";

    json j{{"operator", op.name()},
           {"bandwidth", r.bandwidth},
           {"real", r.real},
           {"max_imag", r.max_imag},
           {"positive", r.positive},
           {"min_value", r.min_value},
           {"argmin", r.argmin},
           {"kernel_modes", r.kernel_modes},
           {"elliptic", r.elliptic},
           {"ellipticity_constant", r.ellipticity_constant},
           {"bounded_growth", r.bounded_growth},
           {"growth_constant", r.growth_constant},
           {"derivative_decay", r.derivative_decay},
           {"derivative_constants", {r.derivative_constants[0], r.derivative_constants[1]}},
           {"in_class", r.passes()}};
    int code = 0;
    if (r.expansion) {
      const auto& e = *r.expansion;
      out << "  coefficients (a3, a2, a1, a0, a-1) =";
      for (double v : e.coefficients) out << ' ' << std::setprecision(12) << v;
      out << "\n  residual " << e.residual << ", window drift " << e.window_drift << ", fit window ["
          << e.fit_low << ", " << e.fit_high << "]\n";
      j["coefficients"] = e.coefficients;
      j["residual"] = e.residual;
      j["window_drift"] = e.window_drift;
      j["fit_window"] = {e.fit_low, e.fit_high};
    } else {
      err << "expansion failed: " << r.expansion_error << "\n";
      j["expansion_error"] = r.expansion_error;
      code = 1;
    }
    ensure_directory(config.output);
    write_json(config.output / "decomposition.json", j);
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace epdiff
