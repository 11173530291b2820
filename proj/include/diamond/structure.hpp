#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diamond/msform.hpp"
#include "diamond/tableau.hpp"

namespace diamond {

enum class EdgeSource { K, S };

/// Equation-unknown graph of one diamond: equation i is row i, unknown j is z_j^t.
struct BipartiteSystem {
  int n_eq = 0;
  int n_un = 0;
  std::vector<std::pair<int, int>> edges;  // (equation, unknown), sorted, unique
  std::vector<EdgeSource> provenance;      // K wins when both K and S produce the edge

  std::vector<std::vector<int>> eq_adjacency() const;
  std::vector<std::vector<int>> un_adjacency() const;
  bool has_edge(int eq, int un) const;
};

BipartiteSystem build_equation_unknown_graph(const Form& form);
/// Same construction on the nonzero pattern of K and Peff.
BipartiteSystem build_equation_unknown_graph(const LinearizedForm& lf);

struct Matching {
  std::vector<int> eq_to_un;  // -1 when unmatched
  std::vector<int> un_to_eq;
  int size = 0;
};

/// Hopcroft-Karp maximum-cardinality matching.
Matching max_matching(const BipartiteSystem& bip);
/// Maximum-cardinality matching using as many K-induced edges as possible
/// (exhaustive search; intended for d <= 8).
Matching max_matching_prefer_k(const BipartiteSystem& bip);

enum class BlockKind { overdetermined, well_determined, underdetermined };
const char* to_string(BlockKind k);

struct DMBlock {
  BlockKind kind = BlockKind::well_determined;
  std::vector<int> eqs;
  std::vector<int> uns;
};

struct DMReport {
  Matching matching;
  /// Overdetermined block first (if any), then well-determined blocks in
  /// computation order, then the underdetermined block (if any).
  std::vector<DMBlock> blocks;
  /// Partial order among well-determined blocks: (a, b) means block a must be
  /// solved before block b (indices into `blocks`).
  std::vector<std::pair<int, int>> precedes;
  bool consistent = false;
  /// Consistent only: (equation, solved variable) pairs in a topological order.
  std::vector<std::pair<int, int>> order;

  std::vector<int> over_eqs() const;
  std::vector<int> over_uns() const;
  std::vector<int> under_eqs() const;
  std::vector<int> under_uns() const;
};

DMReport dm_decompose(const BipartiteSystem& bip);
/// DM decomposition from a caller-supplied maximum matching.
DMReport dm_decompose(const BipartiteSystem& bip, const Matching& matching);
/// Step 1 on the full nonlinear structure of the form.
DMReport classify_consistency(const Form& form);

constexpr double kSingularTol = 1e-10;

struct SingularityReport {
  bool singular = false;
  double min_singular_value = 0.0;
  double max_singular_value = 0.0;
  /// Kernel witness residual |Qz|/|z| (RK check on inconsistent forms only).
  std::optional<double> witness_residual;
  Eigen::VectorXcd witness;
};

/// Relative smallest singular value below kSingularTol after row/column
/// equilibration.
bool is_numerically_singular(const Eigen::MatrixXd& A);

/// SVD of K/dt - Peff/4; singular below 1e-10 relative (equilibrated).
SingularityReport check_singularity_simple(const LinearizedForm& lf, double dt);

/// Assembles Q = I_{r^2} (x) Peff - I_r (x) F (x) Kt - F (x) I_r (x) Lt with
/// Kt = K/dt - L/dx, Lt = K/dt + L/dx, and reports its conditioning; for
/// structurally inconsistent forms also builds z = x (x) x (x) v from an
/// eigenpair (lambda, x) of F and v in ker(Peff - (2 lambda/dt) K).
SingularityReport check_singularity_rk(const LinearizedForm& lf, const RKTableau& tab, double dt, double dx);

/// Q, D_b, D_l of the higher-order diamond's stage system Q z = D_b zb + D_l zl.
struct StageSystem {
  Eigen::MatrixXd Q, Db, Dl;
};
StageSystem assemble_stage_system(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L, const Eigen::MatrixXd& P,
                                  const RKTableau& tab, double dt, double dx);

}  // namespace diamond
