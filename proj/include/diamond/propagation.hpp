#pragma once

#include <boost/rational.hpp>
#include <optional>
#include <string>
#include <vector>

#include "diamond/msform.hpp"
#include "diamond/structure.hpp"

namespace diamond {

using Rational = boost::rational<long long>;

/// Amplification index a*s + b under dt ~ dx^s.
struct AffineIndex {
  long long a = 0;
  long long b = 0;

  Rational at(const Rational& s) const { return Rational(a) * s + Rational(b); }
  AffineIndex operator+(const AffineIndex& o) const { return {a + o.a, b + o.b}; }
  bool operator==(const AffineIndex&) const = default;
  std::string str() const;  // "2s-2", "-1", "s", ...
};

enum class Via { K, L, P };

struct PropEdge {
  int src = 0;
  int dst = 0;
  AffineIndex weight;
  int equation = 0;  // row that produced the edge
  Via via = Via::K;
};

struct PropagationGraph {
  std::vector<std::string> nodes;
  std::vector<PropEdge> edges;
};

struct Cycle {
  std::vector<int> nodes;  // starting at the smallest node, without repetition
  std::vector<int> edges;  // edge indices, edges[k] goes nodes[k] -> nodes[k+1]
  AffineIndex weight;
};

struct Step2Verdict {
  bool unconditionally_unstable = false;
  std::optional<Cycle> witness;  // negative for every s > 0, when one exists
  Rational s_lo{0};
  std::optional<Rational> s_hi;  // nullopt = unbounded
  std::vector<Cycle> binding;
};

/// Reduced error-propagation graph: each equation solved for its DM target
/// emits edges from every source variable with weights from the pivot table.
PropagationGraph build_propagation_graph(const LinearizedForm& lf, const DMReport& dm);
/// Convenience: DM of the linearized pattern with K-preferred matching.
PropagationGraph build_propagation_graph(const LinearizedForm& lf);

/// All simple directed cycles (Johnson), expanded over parallel edges.
std::vector<Cycle> enumerate_cycles(const PropagationGraph& g);

Step2Verdict stability_threshold(const std::vector<Cycle>& cycles);

std::string format_rational(const Rational& r);

}  // namespace diamond
