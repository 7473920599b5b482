#pragma once

// Time integration of m_t + u m_x + 2 m u_x = 0, m = Au, on the circle.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epdiff/operator_algebra.hpp"
#include "epdiff/spectral_core.hpp"

namespace epdiff {

struct SolverState {
  double t = 0.0;
  FourierField u;
  double dt = 0.0;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;  // ‖u‖_A² = ∫ u Au dx
  double h12 = 0.0;
  double h32 = 0.0;
  double h2 = 0.0;
  double h3 = 0.0;
  double sup_u = 0.0;
  double sup_ux = 0.0;
  double dt = 0.0;
  // Share of Σ k²|u_k|² carried by the top octave N/2 < |k| <= N.
  double tail_fraction = 0.0;
};

DiagnosticsRecord diagnose(const FourierField& u, const InertiaOperator& op, double t, double dt);
double tail_fraction(const FourierField& u);

// u_t = -A⁻¹(u (Au)_x + 2 u_x Au), dealiased products.
FourierField rhs(const FourierField& u, const InertiaOperator& op);
// u_tx = -A⁻¹(D²(u Au) + D(u_x Au)); equals derivative(rhs(u)).
FourierField rhs_gradient_form(const FourierField& u, const InertiaOperator& op);

// One classical RK4 step of size state.dt. Throws NumericalOverflowError
// on NaN/Inf.
SolverState step(const SolverState& state, const InertiaOperator& op);

// dt = min(dt_max, cfl·Δx / max(1, sup|u|)), Δx the dealiased grid spacing.
double cfl_time_step(const FourierField& u, double cfl, double dt_max);

enum class BlowupVerdict { none, suspected, certain };
enum class Termination { horizon, blowup, resolution_exhausted, overflow };

std::string_view to_string(BlowupVerdict v);
std::string_view to_string(Termination t);

struct BlowupThresholds {
  // suspected when sup|u_x| > growth·sup|u_x(0)| and tail_fraction > tail
  double growth = 50.0;
  double tail = 0.1;
};

// Re-integrates under refinement up to time t and returns the largest
// sup|u_x| seen, or nullopt if the refined run overflowed.
using RefinementProbe = std::function<std::optional<double>(double t)>;

struct BlowupAssessment {
  BlowupVerdict verdict = BlowupVerdict::none;
  std::optional<double> t_event;
  std::string reason;
};

// Needs at least 10 records (verdict none otherwise). Without a probe the
// strongest verdict short of overflow is "suspected".
BlowupAssessment detect_blowup(std::span<const DiagnosticsRecord> history,
                               const BlowupThresholds& thresholds,
                               const std::vector<RefinementProbe>& probes = {});

struct Snapshot {
  double t = 0.0;
  long step = 0;
  FourierField u;
};

struct SolverConfig {
  FourierField u0;
  int bandwidth = 256;
  double cfl = 0.3;
  double dt_max = 1e-2;
  // Overrides the CFL policy when set.
  std::optional<double> fixed_dt;
  double horizon = 1.0;
  // Snapshot every this many steps; 0 selects max(1, ⌊T/(200·dt₀)⌋).
  long snapshot_every = 0;
  BlowupThresholds blowup{};
  double exhaustion_tail = 0.25;
  // Confirm suspected blow-up by dt- and N-refined reruns.
  bool refine_on_suspect = true;
  // Disable termination triggers (used by refinement probes).
  bool integrate_only = false;
};

struct Trajectory {
  std::vector<DiagnosticsRecord> records;
  std::vector<Snapshot> snapshots;
  Termination termination = Termination::horizon;
  BlowupVerdict verdict = BlowupVerdict::none;
  std::optional<double> t_event;
  std::string message;
  long steps = 0;
};

class TrajectorySink {
 public:
  virtual ~TrajectorySink() = default;
  virtual void on_record(const DiagnosticsRecord&) {}
  virtual void on_snapshot(const Snapshot&) {}
};

// Throws ConfigError on invalid configuration and DegeneracyError for a
// non-invertible operator.
Trajectory run(const SolverConfig& config, const InertiaOperator& op, TrajectorySink* sink = nullptr);

// Orientation-preserving circle diffeomorphism sampled at x_j = 2πj/M:
// φ(x_j) = x_j + displacement[j], jacobian[j] = φ_x(x_j).
struct FlowMap {
  double t = 0.0;
  GridField displacement;
  GridField jacobian;

  int points() const { return displacement.points(); }
  static FlowMap identity(int points);
  // φ(x) = x + Σ displacement modes, evaluated by trigonometric interpolation.
  static FlowMap from_displacement(const FourierField& d, int points);
};

// Integrates φ_t = u(t, φ), (φ_x)_t = u_x(t, φ) φ_x with RK4 between
// consecutive snapshots, u interpolated in time by cubic Hermite (using
// rhs at both ends) and in space by trigonometric interpolation. Snapshots
// must be taken every step (CadenceError otherwise). Throws
// DiffeomorphismLossError when φ_x <= 0.
std::vector<FlowMap> evolve_flow_map(const Trajectory& trajectory, const InertiaOperator& op,
                                     int points = 0);

// φ∘ψ and h∘ψ on ψ's grid, via trigonometric interpolation.
FlowMap compose(const FlowMap& outer, const FlowMap& inner);
GridField compose(const GridField& h, const FlowMap& inner);
// Samples of (u∘φ)(x_j).
GridField compose(const FourierField& u, const FlowMap& phi, int derivative_order = 0);

// φ⁻¹(x_j) by safeguarded Newton iteration.
std::vector<double> inverse_points(const FlowMap& phi);

// G_φ(h, k) = ⟨h∘φ⁻¹, k∘φ⁻¹⟩_A.
double metric_eval(const FlowMap& phi, const GridField& h, const GridField& k, const Symbol& a);

}  // namespace epdiff
