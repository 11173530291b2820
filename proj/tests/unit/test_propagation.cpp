#include <doctest.h>

#include <functional>
#include <random>

#include "diamond/propagation.hpp"

using namespace diamond;

TEST_CASE("affine index formatting") {
  CHECK(AffineIndex{2, -2}.str() == "2s-2");
  CHECK(AffineIndex{0, -1}.str() == "-1");
  CHECK(AffineIndex{1, 0}.str() == "s");
  CHECK(AffineIndex{-1, -1}.str() == "-s-1");
  CHECK(AffineIndex{0, 0}.str() == "0");
  CHECK(AffineIndex{3, 4}.str() == "3s+4");
  CHECK(format_rational(Rational(2, 3)) == "2/3");
  CHECK(format_rational(Rational(4, 2)) == "2");
}

TEST_CASE("johnson cycle count matches brute force") {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 6;
    PropagationGraph g;
    for (int i = 0; i < n; ++i) g.nodes.push_back("n" + std::to_string(i));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (coin(rng)) g.edges.push_back({i, j, {1, -1}, 0, Via::K});
    // Count simple cycles as edge sequences starting at their smallest node.
    long count = 0;
    std::vector<int> on(n, 0);
    std::function<void(int, int)> dfs = [&](int start, int v) {
      for (const auto& e : g.edges) {
        if (e.src != v || e.dst < start) continue;
        if (e.dst == start) {
          ++count;
        } else if (!on[e.dst]) {
          on[e.dst] = 1;
          dfs(start, e.dst);
          on[e.dst] = 0;
        }
      }
    };
    for (int s = 0; s < n; ++s) {
      on[s] = 1;
      dfs(s, s);
      on[s] = 0;
    }
    const auto cycles = enumerate_cycles(g);
    CHECK(static_cast<long>(cycles.size()) == count);
    for (const auto& c : cycles) {
      REQUIRE(c.nodes.size() == c.edges.size());
      AffineIndex w;
      for (size_t k = 0; k < c.edges.size(); ++k) {
        const auto& e = g.edges[c.edges[k]];
        CHECK(e.src == c.nodes[k]);
        CHECK(e.dst == c.nodes[(k + 1) % c.nodes.size()]);
        w = w + e.weight;
      }
      CHECK(w == c.weight);
    }
  }
}

TEST_CASE("threshold from cycle weights") {
  auto cyc = [](long long a, long long b) { return Cycle{{0}, {0}, {a, b}}; };
  auto v = stability_threshold({cyc(2, -2)});
  CHECK_FALSE(v.unconditionally_unstable);
  CHECK(v.s_lo == Rational(1));
  CHECK_FALSE(v.s_hi);
  v = stability_threshold({cyc(2, -2), cyc(-1, 3), cyc(3, -2)});
  CHECK(v.s_lo == Rational(1));
  REQUIRE(v.s_hi);
  CHECK(*v.s_hi == Rational(3));
  CHECK(v.binding.size() == 2);
  CHECK(stability_threshold({cyc(0, -1)}).unconditionally_unstable);
  CHECK(stability_threshold({cyc(-1, -1)}).unconditionally_unstable);
  CHECK(stability_threshold({cyc(1, -3), cyc(-1, 2)}).unconditionally_unstable);
  CHECK(stability_threshold({}).s_lo == Rational(0));
}

TEST_CASE("propagation graphs of registered forms") {
  const auto wave = build_propagation_graph(linearize(registry_get("wave")));
  bool found = false;
  for (const auto& c : enumerate_cycles(wave)) found |= c.weight == AffineIndex{2, -2};
  CHECK(found);
  const auto v = stability_threshold(enumerate_cycles(build_propagation_graph(linearize(registry_get("nls")))));
  CHECK(v.s_lo == Rational(2));
  const auto mk = stability_threshold(enumerate_cycles(build_propagation_graph(linearize(registry_get("mixed_kg")))));
  CHECK(mk.unconditionally_unstable);
  REQUIRE(mk.witness);
  CHECK(mk.witness->weight.str() == "-s-1");
  CHECK_THROWS_AS(build_propagation_graph(linearize(registry_get("kdv"))), std::invalid_argument);
}
