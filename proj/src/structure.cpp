#include "diamond/structure.hpp"

#include <algorithm>
#include <complex>
#include <functional>
#include <limits>
#include <queue>

namespace diamond {

std::vector<std::vector<int>> BipartiteSystem::eq_adjacency() const {
  std::vector<std::vector<int>> adj(n_eq);
  for (auto [e, u] : edges) adj[e].push_back(u);
  return adj;
}

std::vector<std::vector<int>> BipartiteSystem::un_adjacency() const {
  std::vector<std::vector<int>> adj(n_un);
  for (auto [e, u] : edges) adj[u].push_back(e);
  return adj;
}

bool BipartiteSystem::has_edge(int eq, int un) const {
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(eq, un));
}

namespace {

BipartiteSystem from_patterns(const Mat& K, const Mat& S) {
  BipartiteSystem bip;
  bip.n_eq = bip.n_un = static_cast<int>(K.rows());
  for (int i = 0; i < bip.n_eq; ++i)
    for (int j = 0; j < bip.n_un; ++j) {
      if (K(i, j) != 0.0) {
        bip.edges.emplace_back(i, j);
        bip.provenance.push_back(EdgeSource::K);
      } else if (S(i, j) != 0.0) {
        bip.edges.emplace_back(i, j);
        bip.provenance.push_back(EdgeSource::S);
      }
    }
  return bip;
}

}  // namespace

BipartiteSystem build_equation_unknown_graph(const Form& form) {
  Mat S = form.P.cwiseAbs();
  for (const auto& t : form.terms)
    for (size_t j = 0; j < t.exponents.size(); ++j)
      if (t.exponents[j] >= 1) S(t.row, j) = 1.0;  // generic nonzero
  return from_patterns(form.K, S);
}

BipartiteSystem build_equation_unknown_graph(const LinearizedForm& lf) { return from_patterns(lf.K, lf.Peff); }

Matching max_matching(const BipartiteSystem& bip) {
  const int NIL = -1;
  const int INF = std::numeric_limits<int>::max();
  const auto adj = bip.eq_adjacency();
  Matching m;
  m.eq_to_un.assign(bip.n_eq, NIL);
  m.un_to_eq.assign(bip.n_un, NIL);
  std::vector<int> dist(bip.n_eq);

  auto bfs = [&]() {
    std::queue<int> q;
    bool found = false;
    for (int e = 0; e < bip.n_eq; ++e) {
      if (m.eq_to_un[e] == NIL) {
        dist[e] = 0;
        q.push(e);
      } else {
        dist[e] = INF;
      }
    }
    while (!q.empty()) {
      int e = q.front();
      q.pop();
      for (int u : adj[e]) {
        int e2 = m.un_to_eq[u];
        if (e2 == NIL) {
          found = true;
        } else if (dist[e2] == INF) {
          dist[e2] = dist[e] + 1;
          q.push(e2);
        }
      }
    }
    return found;
  };

  std::function<bool(int)> dfs = [&](int e) {
    for (int u : adj[e]) {
      int e2 = m.un_to_eq[u];
      if (e2 == NIL || (dist[e2] == dist[e] + 1 && dfs(e2))) {
        m.eq_to_un[e] = u;
        m.un_to_eq[u] = e;
        return true;
      }
    }
    dist[e] = INF;
    return false;
  };

  while (bfs())
    for (int e = 0; e < bip.n_eq; ++e)
      if (m.eq_to_un[e] == NIL && dfs(e)) ++m.size;
  return m;
}

const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::overdetermined: return "overdetermined";
    case BlockKind::underdetermined: return "underdetermined";
    default: return "well-determined";
  }
}

namespace {

std::vector<int> collect(const std::vector<DMBlock>& blocks, BlockKind kind, bool eqs) {
  for (const auto& b : blocks)
    if (b.kind == kind) return eqs ? b.eqs : b.uns;
  return {};
}

}  // namespace

std::vector<int> DMReport::over_eqs() const { return collect(blocks, BlockKind::overdetermined, true); }
std::vector<int> DMReport::over_uns() const { return collect(blocks, BlockKind::overdetermined, false); }
std::vector<int> DMReport::under_eqs() const { return collect(blocks, BlockKind::underdetermined, true); }
std::vector<int> DMReport::under_uns() const { return collect(blocks, BlockKind::underdetermined, false); }

Matching max_matching_prefer_k(const BipartiteSystem& bip) {
  const auto adj = bip.eq_adjacency();
  std::vector<std::vector<char>> is_k(bip.n_eq, std::vector<char>(bip.n_un, 0));
  for (size_t k = 0; k < bip.edges.size(); ++k)
    if (bip.provenance[k] == EdgeSource::K) is_k[bip.edges[k].first][bip.edges[k].second] = 1;
  std::vector<int> cur(bip.n_eq, -1), best(bip.n_eq, -1);
  std::vector<char> used(bip.n_un, 0);
  std::pair<int, int> best_score{-1, -1};
  std::function<void(int, int, int)> rec = [&](int e, int size, int kcount) {
    if (size + (bip.n_eq - e) < best_score.first) return;
    if (e == bip.n_eq) {
      if (std::make_pair(size, kcount) > best_score) {
        best_score = {size, kcount};
        best = cur;
      }
      return;
    }
    for (int u : adj[e]) {
      if (used[u]) continue;
      used[u] = 1;
      cur[e] = u;
      rec(e + 1, size + 1, kcount + is_k[e][u]);
      used[u] = 0;
      cur[e] = -1;
    }
    rec(e + 1, size, kcount);
  };
  rec(0, 0, 0);
  Matching m;
  m.eq_to_un = best;
  m.un_to_eq.assign(bip.n_un, -1);
  for (int e = 0; e < bip.n_eq; ++e)
    if (best[e] >= 0) {
      m.un_to_eq[best[e]] = e;
      ++m.size;
    }
  return m;
}

DMReport dm_decompose(const BipartiteSystem& bip) { return dm_decompose(bip, max_matching(bip)); }

DMReport dm_decompose(const BipartiteSystem& bip, const Matching& matching) {
  DMReport rep;
  rep.matching = matching;
  const auto& m = rep.matching;
  const auto eadj = bip.eq_adjacency();
  const auto uadj = bip.un_adjacency();

  // Overdetermined: alternating paths from unmatched equations
  // (equation -any edge-> unknown -matching-> equation).
  std::vector<char> over_e(bip.n_eq, 0), over_u(bip.n_un, 0);
  std::queue<int> q;
  for (int e = 0; e < bip.n_eq; ++e)
    if (m.eq_to_un[e] < 0) {
      over_e[e] = 1;
      q.push(e);
    }
  while (!q.empty()) {
    int e = q.front();
    q.pop();
    for (int u : eadj[e]) {
      if (over_u[u]) continue;
      over_u[u] = 1;
      int e2 = m.un_to_eq[u];
      if (e2 >= 0 && !over_e[e2]) {
        over_e[e2] = 1;
        q.push(e2);
      }
    }
  }

  // Underdetermined: alternating paths from unmatched unknowns.
  std::vector<char> under_e(bip.n_eq, 0), under_u(bip.n_un, 0);
  for (int u = 0; u < bip.n_un; ++u)
    if (m.un_to_eq[u] < 0) {
      under_u[u] = 1;
      q.push(u);
    }
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int e : uadj[u]) {
      if (under_e[e]) continue;
      under_e[e] = 1;
      int u2 = m.eq_to_un[e];
      if (u2 >= 0 && !under_u[u2]) {
        under_u[u2] = 1;
        q.push(u2);
      }
    }
  }

  DMBlock over{BlockKind::overdetermined, {}, {}};
  DMBlock under{BlockKind::underdetermined, {}, {}};
  for (int e = 0; e < bip.n_eq; ++e) {
    if (over_e[e]) over.eqs.push_back(e);
    if (under_e[e]) under.eqs.push_back(e);
  }
  for (int u = 0; u < bip.n_un; ++u) {
    if (over_u[u]) over.uns.push_back(u);
    if (under_u[u]) under.uns.push_back(u);
  }

  // Well-determined remainder: equation e depends on e' when e contains the
  // unknown matched to e'. Strongly connected components give the fine blocks.
  std::vector<int> rest;
  for (int e = 0; e < bip.n_eq; ++e)
    if (!over_e[e] && !under_e[e]) rest.push_back(e);
  std::vector<int> local(bip.n_eq, -1);
  for (size_t k = 0; k < rest.size(); ++k) local[rest[k]] = static_cast<int>(k);
  const int n = static_cast<int>(rest.size());
  std::vector<std::vector<int>> dep(n);  // edge a -> b : a must precede b
  for (int b = 0; b < n; ++b)
    for (int u : eadj[rest[b]]) {
      int e2 = m.un_to_eq[u];
      if (e2 >= 0 && e2 != rest[b] && local[e2] >= 0) dep[local[e2]].push_back(b);
    }

  // Tarjan SCC.
  std::vector<int> idx(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on(n, 0);
  int counter = 0, ncomp = 0;
  std::function<void(int)> strong = [&](int v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = 1;
    for (int w : dep[v]) {
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
        w = stack.back();
        stack.pop_back();
        on[w] = 0;
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (int v = 0; v < n; ++v)
    if (idx[v] < 0) strong(v);

  // Condensed DAG, topologically sorted with smallest-member tie-breaking.
  std::vector<std::vector<int>> members(ncomp);
  for (int v = 0; v < n; ++v) members[comp[v]].push_back(v);
  std::vector<std::vector<int>> cdag(ncomp);
  std::vector<int> indeg(ncomp, 0);
  for (int a = 0; a < n; ++a)
    for (int b : dep[a])
      if (comp[a] != comp[b] &&
          std::find(cdag[comp[a]].begin(), cdag[comp[a]].end(), comp[b]) == cdag[comp[a]].end()) {
        cdag[comp[a]].push_back(comp[b]);
        ++indeg[comp[b]];
      }
  std::priority_queue<std::pair<int, int>, std::vector<std::pair<int, int>>, std::greater<>> ready;
  for (int c = 0; c < ncomp; ++c)
    if (indeg[c] == 0) ready.emplace(members[c].front(), c);
  std::vector<int> topo;
  while (!ready.empty()) {
    int c = ready.top().second;
    ready.pop();
    topo.push_back(c);
    for (int c2 : cdag[c])
      if (--indeg[c2] == 0) ready.emplace(members[c2].front(), c2);
  }

  if (!over.eqs.empty() || !over.uns.empty()) rep.blocks.push_back(over);
  const int first_well = static_cast<int>(rep.blocks.size());
  std::vector<int> block_of(ncomp);
  for (size_t k = 0; k < topo.size(); ++k) {
    DMBlock b{BlockKind::well_determined, {}, {}};
    for (int v : members[topo[k]]) {
      b.eqs.push_back(rest[v]);
      b.uns.push_back(m.eq_to_un[rest[v]]);
    }
    std::sort(b.eqs.begin(), b.eqs.end());
    std::sort(b.uns.begin(), b.uns.end());
    block_of[topo[k]] = first_well + static_cast<int>(k);
    rep.blocks.push_back(b);
  }
  for (int c = 0; c < ncomp; ++c)
    for (int c2 : cdag[c]) rep.precedes.emplace_back(block_of[c], block_of[c2]);
  std::sort(rep.precedes.begin(), rep.precedes.end());
  if (!under.eqs.empty() || !under.uns.empty()) rep.blocks.push_back(under);

  rep.consistent = m.size == bip.n_eq && m.size == bip.n_un;
  if (rep.consistent)
    for (int c : topo)
      for (int v : members[c]) rep.order.emplace_back(rest[v], m.eq_to_un[rest[v]]);
  return rep;
}

DMReport classify_consistency(const Form& form) { return dm_decompose(build_equation_unknown_graph(form)); }

bool is_numerically_singular(const Mat& A) {
  if (A.size() == 0) return true;
  // Ruiz equilibration: the diamond matrices mix 1/dt, 1/dx and O(1) rows.
  Mat S = A;
  for (int it = 0; it < 20; ++it) {
    Eigen::VectorXd rs = S.cwiseAbs().rowwise().maxCoeff(), cs = S.cwiseAbs().colwise().maxCoeff().transpose();
    for (Eigen::Index i = 0; i < rs.size(); ++i) rs(i) = rs(i) > 0 ? 1.0 / std::sqrt(rs(i)) : 1.0;
    for (Eigen::Index j = 0; j < cs.size(); ++j) cs(j) = cs(j) > 0 ? 1.0 / std::sqrt(cs(j)) : 1.0;
    S = rs.asDiagonal() * S * cs.asDiagonal();
  }
  Eigen::JacobiSVD<Mat> svd(S);
  const auto& s = svd.singularValues();
  return !(s(0) > 0.0) || s(s.size() - 1) < kSingularTol * s(0);
}

SingularityReport check_singularity_simple(const LinearizedForm& lf, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("check_singularity_simple: dt must be positive");
  const Mat A = lf.K / dt - lf.Peff / 4.0;
  Eigen::JacobiSVD<Mat> svd(A);
  const auto& s = svd.singularValues();
  SingularityReport rep;
  rep.max_singular_value = s.size() ? s[0] : 0.0;
  rep.min_singular_value = s.size() ? s[s.size() - 1] : 0.0;
  rep.singular = is_numerically_singular(A);
  return rep;
}

StageSystem assemble_stage_system(const Mat& K, const Mat& L, const Mat& P, const RKTableau& tab, double dt,
                                  double dx) {
  const int d = static_cast<int>(K.rows());
  const int r = tab.r;
  const Mat Kt = K / dt - L / dx;
  const Mat Lt = K / dt + L / dx;
  const int n = r * r * d;
  StageSystem s;
  s.Q = Mat::Zero(n, n);
  s.Db = Mat::Zero(n, r * d);
  s.Dl = Mat::Zero(n, r * d);
  // Stage Z_i^j lives at offset (i*r + j)*d.
  auto at = [&](int i, int j) { return (i * r + j) * d; };
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      s.Q.block(at(i, j), at(i, j), d, d) += P;
      for (int k = 0; k < r; ++k) {
        s.Q.block(at(i, j), at(i, k), d, d) -= tab.F(j, k) * Kt;
        s.Q.block(at(i, j), at(k, j), d, d) -= tab.F(i, k) * Lt;
      }
      s.Db.block(at(i, j), i * d, d, d) = -tab.mu[j] * Kt;
      s.Dl.block(at(i, j), j * d, d, d) = -tab.mu[i] * Lt;
    }
  return s;
}

SingularityReport check_singularity_rk(const LinearizedForm& lf, const RKTableau& tab, double dt, double dx) {
  if (!(dt > 0) || !(dx > 0)) throw std::invalid_argument("check_singularity_rk: dt and dx must be positive");
  const StageSystem sys = assemble_stage_system(lf.K, lf.L, lf.Peff, tab, dt, dx);
  Eigen::JacobiSVD<Mat> svd(sys.Q);
  const auto& s = svd.singularValues();
  SingularityReport rep;
  rep.max_singular_value = s[0];
  rep.min_singular_value = s[s.size() - 1];
  rep.singular = is_numerically_singular(sys.Q);

  if (dm_decompose(build_equation_unknown_graph(lf)).consistent) return rep;

  using CMat = Eigen::MatrixXcd;
  using CVec = Eigen::VectorXcd;
  Eigen::ComplexEigenSolver<CMat> es(tab.F.cast<std::complex<double>>());
  const std::complex<double> lam = es.eigenvalues()[0];
  const CVec x = es.eigenvectors().col(0);
  const CMat pencil = lf.Peff.cast<std::complex<double>>() - (2.0 * lam / dt) * lf.K.cast<std::complex<double>>();
  Eigen::JacobiSVD<CMat> psvd(pencil, Eigen::ComputeFullV);
  const CVec v = psvd.matrixV().col(pencil.cols() - 1);
  const int d = lf.d(), r = tab.r;
  CVec z(r * r * d);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) z.segment((i * r + j) * d, d) = x[i] * x[j] * v;
  rep.witness_residual = (sys.Q.cast<std::complex<double>>() * z).norm() / z.norm();
  rep.witness = z;
  return rep;
}

}  // namespace diamond
