#pragma once

#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "diamond/msform.hpp"
#include "diamond/spectral.hpp"
#include "diamond/tableau.hpp"

namespace diamond {

/// Raised when a local diamond solve fails (Newton divergence, singular Jacobian).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int diamond = -1, double t = 0.0)
      : std::runtime_error(what), diamond_(diamond), time_(t) {}
  int diamond() const { return diamond_; }
  double time() const { return time_; }

 private:
  int diamond_;
  double time_;
};

/// Observer requested for a form without a registered energy density.
class UnsupportedObserver : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MeshParams {
  double a = 0.0, b = 1.0;
  int N = 0;
  double dt = 0.0;
  double T = 0.0;

  double dx() const { return (b - a) / N; }
  long Nt() const;
  double x(int i) const { return a + i * dx(); }
  void check() const;
};

/// Zig-zag line. Cell i stores two blocks of `block` values: for the simple
/// scheme z at (x_i, t) then z at (x_i + dx/2, t + dt/2); for the collocation
/// scheme the up-edge stack (from x_i upward to the half point) then the
/// down-edge stack (from x_{i+1} upward to the same half point), each r points.
struct MeshState {
  int N = 0;
  int d = 0;
  int block = 0;
  long step = 0;  // integer points sit at t = step * dt
  Vec values;

  double* cell(int i, int half) { return values.data() + (2 * static_cast<long>(i) + half) * block; }
  const double* cell(int i, int half) const { return values.data() + (2 * static_cast<long>(i) + half) * block; }
};

/// Newton settings for nonlinear diamonds.
struct NewtonOptions {
  int max_iter = 50;
  double step_tol = 1e-13;
  int max_halvings = 10;
};

Vec solve_diamond_simple(const Form& form, const Vec& zb, const Vec& zl, const Vec& zr, double dt, double dx,
                         const NewtonOptions& opt = {});

struct RkEdges {
  Vec zt, zr;  // r*d each, point j at offset j*d
};
RkEdges solve_diamond_rk(const Form& form, const RKTableau& tab, const Vec& zb, const Vec& zl, double dt, double dx,
                         const NewtonOptions& opt = {});

// Initial conditions ------------------------------------------------------------

struct InitialCondition {
  std::string name;
  std::function<Vec(double x)> z0;
  std::function<Vec(double x, double t)> exact;  // empty when no closed form is known
};

std::vector<std::string> initial_condition_names();
/// Built-in initial data: "zero", "kg_plane", "mixed_kg_cos", "dirac_breather",
/// "nls_2soliton", "nls_2soliton_phase". `params` may set "Lambda" (breather).
InitialCondition make_initial_condition(const std::string& name, const Form& form, const MeshParams& mesh,
                                        const Params& params = {});

enum class HalfInit { automatic, exact, box };
HalfInit parse_half_init(const std::string& text);

/// Simple-scheme zig-zag state at t = 0.
MeshState init_half_step(const Form& form, const InitialCondition& ic, const MeshParams& mesh,
                         HalfInit method = HalfInit::automatic);
/// Collocation-scheme zig-zag state at t = 0; box initialization interpolates
/// linearly along each edge between nodal values.
MeshState init_rk_state(const Form& form, const RKTableau& tab, const InitialCondition& ic, const MeshParams& mesh,
                        HalfInit method = HalfInit::automatic);

// Time stepping -------------------------------------------------------------------

/// Advances a zig-zag state by full steps. Linear forms use precomputed block
/// maps; nonlinear forms solve all diamonds of a half-step in lockstep Newton.
class Stepper {
 public:
  Stepper(const Form& form, const SchemeSpec& scheme, const MeshParams& mesh, const NewtonOptions& opt = {});
  ~Stepper();
  Stepper(const Stepper&) = delete;
  Stepper& operator=(const Stepper&) = delete;

  void step(MeshState& state);
  /// Nodal values at integer points (N x d).
  Mat nodal(const MeshState& state) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

double total_energy(const Form& form, const Mat& nodal, double dx);
/// Energy of a simple-scheme state.
double total_energy(const Form& form, const MeshState& state, double dx);

enum class RunStatus { completed, diverged };
const char* to_string(RunStatus s);

struct Observers {
  bool energy = false;
  bool snapshots = false;
  long cadence = 0;  // steps between samples; 0 = max(100, ceil(Nt / 200))
  double blowup = 1e8;
  HalfInit init = HalfInit::automatic;
};

struct EnergySample {
  double t = 0.0;
  double value = 0.0;
};

struct Snapshot {
  double t = 0.0;
  Mat z;  // N x d nodal values
};

struct RunResult {
  RunStatus status = RunStatus::completed;
  long steps = 0;
  double t_end = 0.0;
  double max_abs = 0.0;
  std::vector<EnergySample> energy;
  std::vector<Snapshot> snapshots;
  MeshState final_state;
  Mat final_nodal;
};

RunResult integrate(const Form& form, const SchemeSpec& scheme, const InitialCondition& ic, const MeshParams& mesh,
                    const Observers& obs = {});

// Discrete conservation ---------------------------------------------------------

/// Perturbations at the four diamond corners.
struct CornerTangent {
  Vec b, l, r, t;
};
struct TangentPair {
  CornerTangent xi, eta;
};

/// Two tangents built by pushing random (b, l, r) through the linear update.
TangentPair random_tangent_pair(const LinearizedForm& lf, double dt, double dx, std::mt19937_64& rng);

/// Discrete symplectic flux through one diamond; zero for the exact update.
double verify_discrete_conservation(const LinearizedForm& lf, double dt, double dx, const TangentPair& pair);

}  // namespace diamond
