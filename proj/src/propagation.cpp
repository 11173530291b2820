#include "diamond/propagation.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace diamond {

std::string AffineIndex::str() const {
  std::string out;
  if (a != 0) {
    if (a == -1) out = "-";
    else if (a != 1) out = std::to_string(a);
    out += "s";
  }
  if (b != 0 || a == 0) {
    if (a != 0 && b > 0) out += "+";
    out += std::to_string(b);
  }
  return out;
}

std::string format_rational(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

PropagationGraph build_propagation_graph(const LinearizedForm& lf, const DMReport& dm) {
  if (!dm.consistent) throw std::invalid_argument("build_propagation_graph: Step 1 verdict is not consistent");
  PropagationGraph g;
  g.nodes = lf.names;
  for (auto [row, target] : dm.order) {
    const bool k_pivot = lf.K(row, target) != 0.0;
    if (!k_pivot && lf.Peff(row, target) == 0.0)
      throw std::logic_error("build_propagation_graph: row " + std::to_string(row) + " has no pivot on " +
                             lf.names[target]);
    // Source coefficient over pivot magnitude with dt ~ dx^s:
    //   K-pivot (1/dt): K -> 0, L (1/dx) -> s-1, P -> s
    //   P-pivot (1):    K -> -s, L -> -1, P -> 0
    const AffineIndex wK = k_pivot ? AffineIndex{0, 0} : AffineIndex{-1, 0};
    const AffineIndex wL = k_pivot ? AffineIndex{1, -1} : AffineIndex{0, -1};
    const AffineIndex wP = k_pivot ? AffineIndex{1, 0} : AffineIndex{0, 0};
    for (int m = 0; m < lf.d(); ++m) {
      if (lf.K(row, m) != 0.0) g.edges.push_back({m, target, wK, row, Via::K});
      if (lf.L(row, m) != 0.0) g.edges.push_back({m, target, wL, row, Via::L});
      if (lf.Peff(row, m) != 0.0) g.edges.push_back({m, target, wP, row, Via::P});
    }
  }
  return g;
}

PropagationGraph build_propagation_graph(const LinearizedForm& lf) {
  const auto bip = build_equation_unknown_graph(lf);
  return build_propagation_graph(lf, dm_decompose(bip, max_matching_prefer_k(bip)));
}

std::vector<Cycle> enumerate_cycles(const PropagationGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::set<int>> succ(n);
  for (const auto& e : g.edges) succ[e.src].insert(e.dst);

  // Johnson's algorithm on the simple node graph.
  std::vector<std::vector<int>> node_cycles;
  std::vector<char> blocked(n, 0);
  std::vector<std::set<int>> B(n);
  std::vector<int> stack;
  std::vector<std::vector<int>> Ak(n);
  int s = 0;

  std::function<void(int)> unblock = [&](int u) {
    blocked[u] = 0;
    auto members = B[u];
    B[u].clear();
    for (int w : members)
      if (blocked[w]) unblock(w);
  };
  std::function<bool(int)> circuit = [&](int v) {
    bool found = false;
    stack.push_back(v);
    blocked[v] = 1;
    for (int w : Ak[v]) {
      if (w == s) {
        node_cycles.push_back(stack);
        found = true;
      } else if (!blocked[w] && circuit(w)) {
        found = true;
      }
    }
    if (found) {
      unblock(v);
    } else {
      for (int w : Ak[v]) B[w].insert(v);
    }
    stack.pop_back();
    return found;
  };

  // SCC of the subgraph induced by {lo..n-1} containing its least vertex that lies on a cycle.
  auto least_component = [&](int lo) -> std::vector<int> {
    std::vector<int> idx(n, -1), low(n, 0), comp(n, -1), st;
    std::vector<char> on(n, 0);
    int counter = 0, ncomp = 0;
    std::function<void(int)> strong = [&](int v) {
      idx[v] = low[v] = counter++;
      st.push_back(v);
      on[v] = 1;
      for (int w : succ[v]) {
        if (w < lo) continue;
        if (idx[w] < 0) {
          strong(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on[w]) {
          low[v] = std::min(low[v], idx[w]);
        }
      }
      if (low[v] == idx[v]) {
        int w;
        do {
          w = st.back();
          st.pop_back();
          on[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
    };
    for (int v = lo; v < n; ++v)
      if (idx[v] < 0) strong(v);
    for (int v = lo; v < n; ++v) {
      std::vector<int> members;
      for (int w = lo; w < n; ++w)
        if (comp[w] == comp[v]) members.push_back(w);
      if (members.size() > 1 || succ[v].count(v)) return members;
    }
    return {};
  };

  while (s < n) {
    auto comp = least_component(s);
    if (comp.empty()) break;
    s = comp.front();
    for (int v = 0; v < n; ++v) {
      Ak[v].clear();
      blocked[v] = 0;
      B[v].clear();
    }
    for (int v : comp)
      for (int w : succ[v])
        if (std::binary_search(comp.begin(), comp.end(), w)) Ak[v].push_back(w);
    circuit(s);
    ++s;
  }

  // Expand each node cycle over all parallel edges.
  std::vector<Cycle> out;
  for (const auto& nc : node_cycles) {
    const size_t len = nc.size();
    std::vector<std::vector<int>> choices(len);
    for (size_t k = 0; k < len; ++k) {
      const int a = nc[k], b = nc[(k + 1) % len];
      for (size_t e = 0; e < g.edges.size(); ++e)
        if (g.edges[e].src == a && g.edges[e].dst == b) choices[k].push_back(static_cast<int>(e));
    }
    std::vector<int> pick(len, 0);
    while (true) {
      Cycle c;
      c.nodes = nc;
      for (size_t k = 0; k < len; ++k) {
        c.edges.push_back(choices[k][pick[k]]);
        c.weight = c.weight + g.edges[choices[k][pick[k]]].weight;
      }
      out.push_back(std::move(c));
      size_t k = 0;
      while (k < len && ++pick[k] == static_cast<int>(choices[k].size())) pick[k++] = 0;
      if (k == len) break;
    }
  }
  return out;
}

Step2Verdict stability_threshold(const std::vector<Cycle>& cycles) {
  Step2Verdict v;
  Rational lo(0);
  std::optional<Rational> hi;
  for (const auto& c : cycles) {
    const auto& w = c.weight;
    if (w.a > 0) {
      lo = std::max(lo, Rational(-w.b, w.a));
    } else if (w.a == 0) {
      if (w.b < 0 && !v.witness) v.witness = c;
    } else {
      Rational bound(w.b, -w.a);
      if (bound <= Rational(0)) {
        if (!v.witness) v.witness = c;
      } else if (!hi || bound < *hi) {
        hi = bound;
      }
    }
  }
  if (v.witness || (hi && lo > *hi)) {
    v.unconditionally_unstable = true;
    return v;
  }
  v.s_lo = lo;
  v.s_hi = hi;
  for (const auto& c : cycles) {
    if (c.weight.a == 0) continue;
    if (c.weight.at(lo) == Rational(0) || (hi && c.weight.at(*hi) == Rational(0))) v.binding.push_back(c);
  }
  return v;
}

}  // namespace diamond
