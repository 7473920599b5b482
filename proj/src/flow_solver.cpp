#include "epdiff/flow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "epdiff/errors.hpp"

namespace epdiff {

namespace {

bool all_finite(const FourierField& u) {
  for (const auto& c : u.nonnegative()) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

int product_grid(int bandwidth) { return fft_size_at_least(3 * bandwidth + 1); }

// u(x) and u_x(x) in one pass.
std::pair<double, double> value_and_slope(std::span<const Complex> c, double x) {
  double value = c[0].real();
  double slope = 0.0;
  Complex z{1.0, 0.0};
  const Complex step = std::polar(1.0, x);
  const int n = static_cast<int>(c.size()) - 1;
  for (int k = 1; k <= n; ++k) {
    z = (k % 64 == 0) ? std::polar(1.0, k * x) : z * step;
    const Complex term = c[k] * z;
    value += 2.0 * term.real();
    slope -= 2.0 * k * term.imag();
  }
  return {value, slope};
}

int interpolation_band(int points) { return (points - 1) / 2; }

}  // namespace

std::string_view to_string(BlowupVerdict v) {
  switch (v) {
    case BlowupVerdict::none: return "none";
    case BlowupVerdict::suspected: return "suspected";
    case BlowupVerdict::certain: return "certain";
  }
  return "";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::horizon: return "horizon";
    case Termination::blowup: return "blowup";
    case Termination::resolution_exhausted: return "resolution_exhausted";
    case Termination::overflow: return "overflow";
  }
  return "";
}

double tail_fraction(const FourierField& u) {
  const int n = u.bandwidth();
  double total = 0.0;
  double tail = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double w = static_cast<double>(k) * k * std::norm(u[k]);
    total += w;
    if (2 * k > n) tail += w;
  }
  return total > 0.0 ? tail / total : 0.0;
}

DiagnosticsRecord diagnose(const FourierField& u, const InertiaOperator& op, double t, double dt) {
  DiagnosticsRecord r;
  r.t = t;
  r.dt = dt;
  r.energy = energy(u, op);
  r.h12 = sobolev_norm(u, 0.5);
  r.h32 = sobolev_norm(u, 1.5);
  r.h2 = sobolev_norm(u, 2.0);
  r.h3 = sobolev_norm(u, 3.0);
  r.sup_u = sup_norm(u);
  r.sup_ux = sup_norm(derivative(u, 1));
  r.tail_fraction = tail_fraction(u);
  return r;
}

FourierField rhs(const FourierField& u, const InertiaOperator& op) {
  const Symbol& inverse = op.inverse();
  const int n = u.bandwidth();
  const FourierField m = apply(op.symbol(), u);
  const int points = product_grid(n);
  const auto gu = synthesize(u, points).values;
  const auto gux = synthesize(derivative(u, 1), points).values;
  const auto gm = synthesize(m, points).values;
  const auto gmx = synthesize(derivative(m, 1), points).values;
  GridField g{std::vector<double>(static_cast<std::size_t>(points))};
  for (int j = 0; j < points; ++j) g.values[j] = gu[j] * gmx[j] + 2.0 * gux[j] * gm[j];
  return -apply(inverse, analyze(g, n));
}

FourierField rhs_gradient_form(const FourierField& u, const InertiaOperator& op) {
  const Symbol& inverse = op.inverse();
  const FourierField m = apply(op.symbol(), u);
  const FourierField inner =
      derivative(multiply(u, m), 2) + derivative(multiply(derivative(u, 1), m), 1);
  return -apply(inverse, inner);
}

SolverState step(const SolverState& state, const InertiaOperator& op) {
  const double dt = state.dt;
  const FourierField& u = state.u;
  const FourierField k1 = rhs(u, op);
  const FourierField k2 = rhs(u + (0.5 * dt) * k1, op);
  const FourierField k3 = rhs(u + (0.5 * dt) * k2, op);
  const FourierField k4 = rhs(u + dt * k3, op);
  SolverState next{state.t + dt, u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), dt};
  if (!all_finite(next.u)) {
    std::ostringstream msg;
    msg << "non-finite coefficients at t = " << next.t;
    throw NumericalOverflowError(msg.str());
  }
  return next;
}

double cfl_time_step(const FourierField& u, double cfl, double dt_max) {
  const double dx = kTwoPi / product_grid(u.bandwidth());
  return std::min(dt_max, cfl * dx / std::max(1.0, sup_norm(u)));
}

BlowupAssessment detect_blowup(std::span<const DiagnosticsRecord> history,
                               const BlowupThresholds& thresholds,
                               const std::vector<RefinementProbe>& probes) {
  BlowupAssessment out;
  if (history.size() < 10) {
    out.reason = "fewer than 10 records";
    return out;
  }
  for (const auto& r : history) {
    if (!std::isfinite(r.sup_ux) || !std::isfinite(r.energy)) {
      out.verdict = BlowupVerdict::certain;
      out.t_event = r.t;
      out.reason = "arithmetic overflow";
      return out;
    }
  }
  const double initial = history.front().sup_ux;
  if (initial <= 0.0) {
    out.reason = "initial sup|u_x| is zero";
    return out;
  }
  const double limit = thresholds.growth * initial;
  auto hit = std::find_if(history.begin(), history.end(), [&](const DiagnosticsRecord& r) {
    return r.sup_ux > limit && r.tail_fraction > thresholds.tail;
  });
  if (hit == history.end()) {
    out.reason = "sup|u_x| and spectral tail within thresholds";
    return out;
  }
  out.verdict = BlowupVerdict::suspected;
  out.t_event = hit->t;
  std::ostringstream reason;
  reason << "sup|u_x| = " << hit->sup_ux << " exceeds " << thresholds.growth
         << "x initial with tail fraction " << hit->tail_fraction;
  if (probes.empty()) {
    out.reason = reason.str();
    return out;
  }
  for (const auto& probe : probes) {
    const auto refined = probe(hit->t);
    if (refined && *refined < 0.5 * limit) {
      reason << "; refinement tamed the growth (refined sup|u_x| = " << *refined << ")";
      out.reason = reason.str();
      return out;
    }
    if (refined) {
      reason << "; refined sup|u_x| = " << *refined;
    } else {
      reason << "; refined run overflowed";
    }
  }
  out.verdict = BlowupVerdict::certain;
  out.reason = reason.str();
  return out;
}

namespace {

void validate(const SolverConfig& c) {
  if (c.bandwidth < 16) throw ConfigError("bandwidth N must be at least 16");
  if (!(c.horizon > 0.0)) throw ConfigError("horizon T must be positive");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
  if (!(c.dt_max > 0.0)) throw ConfigError("dt_max must be positive");
  if (c.fixed_dt && !(*c.fixed_dt > 0.0)) throw ConfigError("fixed dt must be positive");
}

double max_sup_ux(const Trajectory& t) {
  double m = 0.0;
  for (const auto& r : t.records) m = std::max(m, r.sup_ux);
  return m;
}

std::vector<RefinementProbe> refinement_probes(const SolverConfig& config, const InertiaOperator& op) {
  auto probe_with = [&op](SolverConfig refined) -> RefinementProbe {
    refined.integrate_only = true;
    refined.refine_on_suspect = false;
    return [refined, &op](double t) mutable -> std::optional<double> {
      refined.horizon = t;
      try {
        return max_sup_ux(run(refined, op));
      } catch (const NumericalOverflowError&) {
        return std::nullopt;
      }
    };
  };
  SolverConfig half_dt = config;
  half_dt.cfl *= 0.5;
  half_dt.dt_max *= 0.5;
  if (half_dt.fixed_dt) *half_dt.fixed_dt *= 0.5;
  SolverConfig double_n = config;
  double_n.bandwidth *= 2;
  if (double_n.fixed_dt) *double_n.fixed_dt *= 0.5;
  return {probe_with(half_dt), probe_with(double_n)};
}

}  // namespace

Trajectory run(const SolverConfig& config, const InertiaOperator& op, TrajectorySink* sink) {
  validate(config);
  op.inverse();  // degenerate operators fail here

  Trajectory traj;
  SolverState state{0.0, config.u0.resized(config.bandwidth), 0.0};
  auto next_dt = [&](const FourierField& u) {
    return config.fixed_dt ? *config.fixed_dt : cfl_time_step(u, config.cfl, config.dt_max);
  };
  state.dt = next_dt(state.u);
  const long every = config.snapshot_every > 0
                         ? config.snapshot_every
                         : std::max(1L, static_cast<long>(std::floor(config.horizon / (200.0 * state.dt))));

  auto push_record = [&](const DiagnosticsRecord& r) {
    traj.records.push_back(r);
    if (sink) sink->on_record(r);
  };
  auto push_snapshot = [&](long n) {
    traj.snapshots.push_back(Snapshot{state.t, n, state.u});
    if (sink) sink->on_snapshot(traj.snapshots.back());
  };

  push_record(diagnose(state.u, op, state.t, state.dt));
  push_snapshot(0);

  const auto probes = config.refine_on_suspect ? refinement_probes(config, op)
                                               : std::vector<RefinementProbe>{};
  double last_probe_sup = 0.0;
  const double end = config.horizon;
  long n = 0;
  while (state.t < end * (1.0 - 1e-14)) {
    state.dt = std::min(next_dt(state.u), end - state.t);
    try {
      state = step(state, op);
    } catch (const NumericalOverflowError& e) {
      if (config.integrate_only) throw;
      traj.termination = Termination::overflow;
      traj.verdict = BlowupVerdict::certain;
      traj.t_event = state.t;
      traj.message = e.what();
      break;
    }
    ++n;
    const DiagnosticsRecord rec = diagnose(state.u, op, state.t, state.dt);
    push_record(rec);
    const bool final_step = state.t >= end * (1.0 - 1e-14);
    if (n % every == 0 || final_step) push_snapshot(n);
    if (config.integrate_only) continue;

    const double initial = traj.records.front().sup_ux;
    const bool over = initial > 0.0 && rec.sup_ux > config.blowup.growth * initial &&
                      rec.tail_fraction > config.blowup.tail;
    if (over && traj.records.size() >= 10 && rec.sup_ux >= 2.0 * last_probe_sup) {
      last_probe_sup = rec.sup_ux;
      const auto assessment = detect_blowup(traj.records, config.blowup, probes);
      if (assessment.verdict == BlowupVerdict::certain) {
        traj.verdict = BlowupVerdict::certain;
        traj.t_event = assessment.t_event;
        traj.termination = Termination::blowup;
        traj.message = assessment.reason;
        if (traj.snapshots.back().step != n) push_snapshot(n);
        break;
      }
      if (assessment.verdict == BlowupVerdict::suspected && traj.verdict == BlowupVerdict::none) {
        traj.verdict = BlowupVerdict::suspected;
        traj.t_event = assessment.t_event;
        traj.message = assessment.reason;
      }
    }
    if (rec.tail_fraction > config.exhaustion_tail) {
      traj.termination = Termination::resolution_exhausted;
      std::ostringstream msg;
      msg << "tail fraction " << rec.tail_fraction << " exceeds " << config.exhaustion_tail
          << " at t = " << rec.t;
      if (!traj.message.empty()) msg << "; " << traj.message;
      traj.message = msg.str();
      if (traj.snapshots.back().step != n) push_snapshot(n);
      break;
    }
  }
  traj.steps = n;
  if (traj.message.empty()) traj.message = "reached horizon";
  return traj;
}

FlowMap FlowMap::identity(int points) {
  FlowMap phi;
  phi.displacement.values.assign(static_cast<std::size_t>(points), 0.0);
  phi.jacobian.values.assign(static_cast<std::size_t>(points), 1.0);
  return phi;
}

FlowMap FlowMap::from_displacement(const FourierField& d, int points) {
  FlowMap phi;
  phi.displacement = synthesize(d, points);
  phi.jacobian = synthesize(derivative(d, 1), points);
  for (auto& v : phi.jacobian.values) v += 1.0;
  return phi;
}

std::vector<FlowMap> evolve_flow_map(const Trajectory& trajectory, const InertiaOperator& op,
                                     int points) {
  const auto& snaps = trajectory.snapshots;
  if (snaps.empty()) throw CadenceError("trajectory has no snapshots");
  for (std::size_t i = 1; i < snaps.size(); ++i) {
    if (snaps[i].step != snaps[i - 1].step + 1) {
      throw CadenceError("flow map needs a snapshot at every step (gap after step " +
                         std::to_string(snaps[i - 1].step) + ")");
    }
  }
  const int n = snaps.front().u.bandwidth();
  if (points <= 0) points = 4 * n;

  const auto x = GridField::nodes(points);
  std::vector<double> phi(x);
  std::vector<double> jac(static_cast<std::size_t>(points), 1.0);

  std::vector<FlowMap> out;
  auto emit = [&](double t) {
    FlowMap f;
    f.t = t;
    f.displacement.values.resize(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j) f.displacement.values[j] = phi[j] - x[j];
    f.jacobian.values = jac;
    out.push_back(std::move(f));
  };
  emit(snaps.front().t);

  FourierField f_prev = rhs(snaps.front().u, op);
  for (std::size_t s = 0; s + 1 < snaps.size(); ++s) {
    const FourierField& u0 = snaps[s].u;
    const FourierField& u1 = snaps[s + 1].u;
    const FourierField f_next = rhs(u1, op);
    const double h = snaps[s + 1].t - snaps[s].t;
    // cubic Hermite in time at θ = 1/2
    const FourierField mid = 0.5 * (u0 + u1) + (h / 8.0) * (f_prev - f_next);

    auto field_at = [&](int stage) -> const FourierField& {
      return stage == 0 ? u0 : (stage == 2 ? u1 : mid);
    };
    std::vector<double> kp[4], kj[4];
    std::vector<double> yp(phi), yj(jac);
    const int stage_time[4] = {0, 1, 1, 2};
    const double weight[4] = {0.0, 0.5, 0.5, 1.0};
    for (int st = 0; st < 4; ++st) {
      kp[st].resize(static_cast<std::size_t>(points));
      kj[st].resize(static_cast<std::size_t>(points));
      const auto c = field_at(stage_time[st]).nonnegative();
      for (int j = 0; j < points; ++j) {
        double p = phi[j];
        double q = jac[j];
        if (st > 0) {
          p += weight[st] * h * kp[st - 1][j];
          q += weight[st] * h * kj[st - 1][j];
        }
        const auto [val, slope] = value_and_slope(c, p);
        kp[st][j] = val;
        kj[st][j] = slope * q;
      }
    }
    for (int j = 0; j < points; ++j) {
      phi[j] += h / 6.0 * (kp[0][j] + 2.0 * kp[1][j] + 2.0 * kp[2][j] + kp[3][j]);
      jac[j] += h / 6.0 * (kj[0][j] + 2.0 * kj[1][j] + 2.0 * kj[2][j] + kj[3][j]);
      if (!(jac[j] > 0.0)) {
        std::ostringstream msg;
        msg << "flow map lost monotonicity at t = " << snaps[s + 1].t << " (phi_x = " << jac[j] << ")";
        throw DiffeomorphismLossError(msg.str());
      }
    }
    emit(snaps[s + 1].t);
    f_prev = f_next;
  }
  return out;
}

FlowMap compose(const FlowMap& outer, const FlowMap& inner) {
  const int band = interpolation_band(outer.points());
  const FourierField d_outer = analyze(outer.displacement, band);
  // log φ_x is as smooth as u_x∘φ and keeps the composed Jacobian positive
  GridField log_jacobian{outer.jacobian.values};
  for (auto& v : log_jacobian.values) {
    if (!(v > 0.0)) throw DiffeomorphismLossError("cannot compose: outer map has phi_x <= 0");
    v = std::log(v);
  }
  const FourierField j_outer = analyze(log_jacobian, band);
  const auto x = GridField::nodes(inner.points());
  FlowMap out;
  out.t = outer.t;
  out.displacement.values.resize(x.size());
  out.jacobian.values.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double y = x[j] + inner.displacement.values[j];
    out.displacement.values[j] = inner.displacement.values[j] + evaluate(d_outer, y);
    out.jacobian.values[j] = std::exp(evaluate(j_outer, y)) * inner.jacobian.values[j];
  }
  return out;
}

GridField compose(const GridField& h, const FlowMap& inner) {
  const FourierField hc = analyze(h, interpolation_band(h.points()));
  const auto x = GridField::nodes(inner.points());
  GridField out{std::vector<double>(x.size())};
  for (std::size_t j = 0; j < x.size(); ++j) out.values[j] = evaluate(hc, x[j] + inner.displacement.values[j]);
  return out;
}

GridField compose(const FourierField& u, const FlowMap& phi, int derivative_order) {
  const auto x = GridField::nodes(phi.points());
  GridField out{std::vector<double>(x.size())};
  for (std::size_t j = 0; j < x.size(); ++j) {
    out.values[j] = evaluate(u, x[j] + phi.displacement.values[j], derivative_order);
  }
  return out;
}

std::vector<double> inverse_points(const FlowMap& phi) {
  for (double v : phi.jacobian.values) {
    if (!(v > 0.0)) throw DiffeomorphismLossError("flow map is not invertible (phi_x <= 0)");
  }
  const FourierField d = analyze(phi.displacement, interpolation_band(phi.points()));
  const FourierField dd = derivative(d, 1);
  const auto [dmin, dmax] = std::minmax_element(phi.displacement.values.begin(), phi.displacement.values.end());
  const auto x = GridField::nodes(phi.points());
  std::vector<double> y(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    auto residual = [&](double s) { return s + evaluate(d, s) - x[j]; };
    double lo = x[j] - *dmax - 0.5;
    double hi = x[j] - *dmin + 0.5;
    while (residual(lo) > 0.0) lo -= 1.0;
    while (residual(hi) < 0.0) hi += 1.0;
    double s = x[j] - evaluate(d, x[j]);
    for (int it = 0; it < 100; ++it) {
      const double r = residual(s);
      if (r > 0.0) hi = s; else lo = s;
      if (std::abs(r) < 1e-15 * (1.0 + std::abs(x[j]))) break;
      const double slope = 1.0 + evaluate(dd, s);
      double next = slope > 0.0 ? s - r / slope : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - s) < 1e-16) break;
      s = next;
    }
    y[j] = s;
  }
  return y;
}

double metric_eval(const FlowMap& phi, const GridField& h, const GridField& k, const Symbol& a) {
  const auto y = inverse_points(phi);
  const FourierField hc = analyze(h, interpolation_band(h.points()));
  const FourierField kc = analyze(k, interpolation_band(k.points()));
  GridField hp{evaluate(hc, y)};
  GridField kp{evaluate(kc, y)};
  const int band = interpolation_band(phi.points());
  return pairing(analyze(hp, band), analyze(kp, band), a);
}

}  // namespace epdiff
