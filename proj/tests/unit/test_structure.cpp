#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "diamond/structure.hpp"

using namespace diamond;

namespace {

BipartiteSystem random_bipartite(int ne, int nu, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p), src(0.5);
  BipartiteSystem b;
  b.n_eq = ne;
  b.n_un = nu;
  for (int e = 0; e < ne; ++e)
    for (int u = 0; u < nu; ++u)
      if (coin(rng)) {
        b.edges.push_back({e, u});
        b.provenance.push_back(src(rng) ? EdgeSource::K : EdgeSource::S);
      }
  return b;
}

// Maximum matching size and the best K-edge count among maximum matchings.
std::pair<int, int> brute_matching(const BipartiteSystem& b) {
  int best = 0, best_k = 0;
  std::vector<int> used(b.n_un, 0);
  std::function<void(int, int, int)> go = [&](int e, int size, int kcount) {
    if (e == b.n_eq) {
      if (size > best || (size == best && kcount > best_k)) best = size, best_k = kcount;
      return;
    }
    go(e + 1, size, kcount);
    for (size_t k = 0; k < b.edges.size(); ++k) {
      const auto [ee, u] = b.edges[k];
      if (ee != e || used[u]) continue;
      used[u] = 1;
      go(e + 1, size + 1, kcount + (b.provenance[k] == EdgeSource::K));
      used[u] = 0;
    }
  };
  go(0, 0, 0);
  return {best, best_k};
}

int k_edges(const BipartiteSystem& b, const Matching& m) {
  int n = 0;
  for (size_t k = 0; k < b.edges.size(); ++k)
    if (m.eq_to_un[b.edges[k].first] == b.edges[k].second && b.provenance[k] == EdgeSource::K) ++n;
  return n;
}

}  // namespace

TEST_CASE("hopcroft-karp matches brute force on random graphs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int ne = 1 + trial % 6, nu = 1 + (trial / 6) % 6;
    const auto b = random_bipartite(ne, nu, 0.35, rng);
    const auto [size, kbest] = brute_matching(b);
    const Matching m = max_matching(b);
    CHECK(m.size == size);
    for (int e = 0; e < ne; ++e)
      if (m.eq_to_un[e] >= 0) CHECK(b.has_edge(e, m.eq_to_un[e]));
    const Matching mk = max_matching_prefer_k(b);
    CHECK(mk.size == size);
    CHECK(k_edges(b, mk) == kbest);
  }
}

TEST_CASE("DM blocks partition the graph") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int ne = 1 + trial % 7, nu = 1 + (trial / 7) % 7;
    const auto b = random_bipartite(ne, nu, 0.3, rng);
    const DMReport dm = dm_decompose(b);
    std::multiset<int> eqs, uns;
    bool irregular = false;
    for (const auto& blk : dm.blocks) {
      eqs.insert(blk.eqs.begin(), blk.eqs.end());
      uns.insert(blk.uns.begin(), blk.uns.end());
      if (blk.kind == BlockKind::well_determined) CHECK(blk.eqs.size() == blk.uns.size());
      if (blk.kind == BlockKind::overdetermined) CHECK(blk.eqs.size() > blk.uns.size());
      if (blk.kind == BlockKind::underdetermined) CHECK(blk.eqs.size() < blk.uns.size());
      irregular |= blk.kind != BlockKind::well_determined;
    }
    CHECK(eqs.size() == static_cast<size_t>(ne));
    CHECK(uns.size() == static_cast<size_t>(nu));
    CHECK(std::set<int>(eqs.begin(), eqs.end()).size() == eqs.size());
    CHECK(std::set<int>(uns.begin(), uns.end()).size() == uns.size());
    CHECK(dm.consistent == !irregular);
    CHECK(dm.consistent == (ne == nu && dm.matching.size == ne));
  }
}

TEST_CASE("step 1 verdicts on registered forms") {
  for (const std::string n : {"advection", "kdv", "camassa_holm", "bbm", "hunter_saxton_1", "hunter_saxton_2"})
    CHECK_MESSAGE(!classify_consistency(registry_get(n)).consistent, n);
  for (const std::string n : {"wave", "linear_kg", "dirac", "good_boussinesq", "nls", "mixed_kg"}) {
    const DMReport dm = classify_consistency(registry_get(n));
    CHECK_MESSAGE(dm.consistent, n);
    CHECK(dm.order.size() == static_cast<size_t>(registry_get(n).d()));
  }
  const DMReport kdv = classify_consistency(registry_get("kdv"));
  CHECK((!kdv.over_eqs().empty() || !kdv.under_uns().empty()));
}

TEST_CASE("singularity checks") {
  CHECK(check_singularity_simple(linearize(registry_get("advection")), 0.01).singular);
  CHECK(check_singularity_simple(linearize(registry_get("kdv")), 0.01).singular);
  CHECK_FALSE(check_singularity_simple(linearize(registry_get("wave")), 0.01).singular);
  // Badly scaled but invertible.
  CHECK_FALSE(check_singularity_simple(linearize(registry_get("mixed_kg")), 1e-4).singular);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 1e8;
  D(1, 1) = 1e-8;
  CHECK_FALSE(is_numerically_singular(D));
  CHECK(is_numerically_singular(Eigen::MatrixXd::Ones(3, 3)));
}

TEST_CASE("rk singularity witness on inconsistent forms") {
  const auto tab = gauss_tableau(2);
  const auto rep = check_singularity_rk(linearize(registry_get("kdv")), tab, 0.01, 0.1);
  CHECK(rep.singular);
  REQUIRE(rep.witness_residual);
  CHECK(*rep.witness_residual < 1e-8);
  const auto sys = assemble_stage_system(registry_get("wave").K, registry_get("wave").L, registry_get("wave").P, tab,
                                         0.01, 0.1);
  CHECK(sys.Q.rows() == 2 * 2 * 3);
  CHECK_FALSE(check_singularity_rk(linearize(registry_get("wave")), tab, 0.01, 0.1).singular);
}
