#include "diamond/pipeline.hpp"

#include <cmath>
#include <sstream>

namespace diamond {

namespace {

using nlohmann::json;

std::string cycle_str(const PropagationGraph& g, const Cycle& c) {
  std::string out;
  for (int n : c.nodes) out += g.nodes[n] + " -> ";
  return out + g.nodes[c.nodes.front()] + " (" + c.weight.str() + ")";
}

json cycle_json(const PropagationGraph& g, const Cycle& c) {
  json nodes = json::array();
  for (int n : c.nodes) nodes.push_back(g.nodes[n]);
  json eqs = json::array();
  for (int e : c.edges) eqs.push_back(g.edges[e].equation + 1);
  return {{"nodes", nodes}, {"equations", eqs}, {"weight", c.weight.str()}};
}

json names_of(const Form& f, const std::vector<int>& idx) {
  json out = json::array();
  for (int i : idx) out.push_back(f.names[i]);
  return out;
}

json rows_of(const std::vector<int>& idx) {
  json out = json::array();
  for (int i : idx) out.push_back(i + 1);
  return out;
}

const char* via_name(Via v) { return v == Via::K ? "K" : v == Via::L ? "L" : "P"; }

}  // namespace

const char* to_string(Classification c) {
  switch (c) {
    case Classification::structurally_inconsistent: return "StructurallyInconsistent";
    case Classification::unconditionally_unstable: return "UnconditionallyUnstable";
    case Classification::conditionally_stable: return "ConditionallyStable";
  }
  return "";
}

std::optional<Classification> parse_classification(const std::string& text) {
  for (auto c : {Classification::structurally_inconsistent, Classification::unconditionally_unstable,
                 Classification::conditionally_stable})
    if (text == to_string(c)) return c;
  if (text == "inconsistent") return Classification::structurally_inconsistent;
  if (text == "unstable") return Classification::unconditionally_unstable;
  if (text == "stable") return Classification::conditionally_stable;
  throw std::invalid_argument("unknown classification '" + text + "' (inconsistent, unstable, stable)");
}

PipelineVerdict analyze(const Form& form, const AnalyzeOptions& opt) {
  PipelineVerdict v;
  v.pde = form.name;
  v.step1 = classify_consistency(form);
  if (!v.step1.consistent) {
    v.classification = Classification::structurally_inconsistent;
    return v;
  }
  v.classification = Classification::conditionally_stable;
  if (!opt.step2 && !opt.step3) return v;

  const LinearizedForm lf = linearize(form);
  try {
    v.graph = build_propagation_graph(lf);
  } catch (const std::exception& e) {
    v.note = std::string("step 2 skipped: ") + e.what();
    return v;
  }
  v.cycles = enumerate_cycles(*v.graph);
  v.step2 = stability_threshold(v.cycles);
  if (v.step2->unconditionally_unstable) {
    v.classification = Classification::unconditionally_unstable;
    return v;
  }
  if (!opt.step3) return v;

  v.dx = opt.dx;
  v.N = opt.N.value_or(40);
  const double s = std::max(1.0, boost::rational_cast<double>(v.step2->s_lo));
  v.dt = opt.dt.value_or(0.5 * std::pow(opt.dx, s));
  Criterion c = opt.criterion;
  c.dt = v.dt;
  try {
    v.step3 = spectral_verdict(symbol_family(lf, opt.scheme, v.dt, v.dx, v.N), c);
  } catch (const SingularError& e) {
    v.note = std::string("step 3 skipped: ") + e.what();
  }
  return v;
}

json to_json(const Form& form, const PipelineVerdict& v) {
  json j;
  j["pde"] = v.pde;
  j["classification"] = to_string(v.classification);
  json s1;
  s1["consistent"] = v.step1.consistent;
  json blocks = json::array();
  for (const auto& b : v.step1.blocks)
    blocks.push_back({{"kind", to_string(b.kind)}, {"equations", rows_of(b.eqs)}, {"unknowns", names_of(form, b.uns)}});
  s1["blocks"] = blocks;
  if (v.step1.consistent) {
    json order = json::array();
    for (auto [eq, var] : v.step1.order) order.push_back({{"equation", eq + 1}, {"variable", form.names[var]}});
    s1["order"] = order;
  }
  j["step1"] = s1;
  if (v.step2) {
    json s2;
    const auto& g = *v.graph;
    json edges = json::array();
    for (const auto& e : g.edges)
      edges.push_back({{"from", g.nodes[e.src]}, {"to", g.nodes[e.dst]}, {"weight", e.weight.str()},
                       {"equation", e.equation + 1}, {"via", via_name(e.via)}});
    s2["edges"] = edges;
    json cycles = json::array();
    for (const auto& c : v.cycles) cycles.push_back(cycle_json(g, c));
    s2["cycles"] = cycles;
    s2["unconditionally_unstable"] = v.step2->unconditionally_unstable;
    if (v.step2->witness) s2["witness"] = cycle_json(g, *v.step2->witness);
    if (!v.step2->unconditionally_unstable) {
      s2["s_lo"] = format_rational(v.step2->s_lo);
      s2["s_hi"] = v.step2->s_hi ? format_rational(*v.step2->s_hi) : "inf";
      json binding = json::array();
      for (const auto& c : v.step2->binding) binding.push_back(cycle_json(g, c));
      s2["binding"] = binding;
    }
    j["step2"] = s2;
  }
  if (v.step3) {
    j["step3"] = {{"dt", v.dt},
                  {"dx", v.dx},
                  {"N", v.N},
                  {"criterion", v.step3->criterion},
                  {"dominant_modulus", v.step3->dominant_all},
                  {"dominant_modulus_nonzero", v.step3->dominant_nonzero},
                  {"dominant_k", v.step3->dominant_k},
                  {"stable", v.step3->stable}};
  }
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

std::string to_text(const Form& form, const PipelineVerdict& v) {
  std::ostringstream os;
  os << v.pde << ": " << to_string(v.classification) << "\n";
  os << "  step 1: " << (v.step1.consistent ? "consistent" : "structurally inconsistent") << "\n";
  for (const auto& b : v.step1.blocks) {
    os << "    " << to_string(b.kind) << " eqs {";
    for (size_t i = 0; i < b.eqs.size(); ++i) os << (i ? "," : "") << b.eqs[i] + 1;
    os << "} vars {";
    for (size_t i = 0; i < b.uns.size(); ++i) os << (i ? "," : "") << form.names[b.uns[i]];
    os << "}\n";
  }
  if (v.step2) {
    const auto& g = *v.graph;
    os << "  step 2: " << v.cycles.size() << " cycles\n";
    for (const auto& c : v.cycles) os << "    " << cycle_str(g, c) << "\n";
    if (v.step2->unconditionally_unstable) {
      os << "    unconditionally unstable";
      if (v.step2->witness) os << ", witness " << cycle_str(g, *v.step2->witness);
      os << "\n";
    } else {
      os << "    feasible s in [" << format_rational(v.step2->s_lo) << ", "
         << (v.step2->s_hi ? format_rational(*v.step2->s_hi) : "inf") << ")\n";
    }
  }
  if (v.step3) {
    os << "  step 3: dt=" << v.dt << " dx=" << v.dx << " N=" << v.N << " criterion=" << v.step3->criterion
       << " |lambda_1|=" << v.step3->dominant_all << " (k>=1: " << v.step3->dominant_nonzero << ") "
       << (v.step3->stable ? "stable" : "unstable") << "\n";
  }
  if (!v.note.empty()) os << "  note: " << v.note << "\n";
  return os.str();
}

std::string dm_to_dot(const Form& form, const BipartiteSystem& bip, const DMReport& dm) {
  std::ostringstream os;
  os << "graph dm {\n  rankdir=LR;\n";
  for (size_t b = 0; b < dm.blocks.size(); ++b) {
    os << "  subgraph cluster_" << b << " {\n    label=\"" << to_string(dm.blocks[b].kind) << "\";\n";
    for (int e : dm.blocks[b].eqs) os << "    e" << e << " [label=\"eq" << e + 1 << "\", shape=box];\n";
    for (int u : dm.blocks[b].uns) os << "    u" << u << " [label=\"" << form.names[u] << "^t\"];\n";
    os << "  }\n";
  }
  for (size_t k = 0; k < bip.edges.size(); ++k) {
    const auto [e, u] = bip.edges[k];
    const bool matched = dm.matching.eq_to_un[e] == u;
    os << "  e" << e << " -- u" << u << " [label=\"" << (bip.provenance[k] == EdgeSource::K ? "K" : "S") << "\""
       << (matched ? ", penwidth=2" : ", style=dashed") << "];\n";
  }
  os << "}\n";
  return os.str();
}

std::string propagation_to_dot(const PropagationGraph& g) {
  std::ostringstream os;
  os << "digraph propagation {\n";
  for (size_t i = 0; i < g.nodes.size(); ++i) os << "  n" << i << " [label=\"" << g.nodes[i] << "\"];\n";
  for (const auto& e : g.edges)
    os << "  n" << e.src << " -> n" << e.dst << " [label=\"" << e.weight.str() << " (eq" << e.equation + 1 << ","
       << via_name(e.via) << ")\"];\n";
  os << "}\n";
  return os.str();
}

std::vector<ClassifyRow> classify_registry(std::optional<Classification> filter) {
  std::vector<ClassifyRow> rows;
  AnalyzeOptions opt;
  opt.step3 = false;
  for (const auto& name : registry_names()) {
    const Form f = registry_get(name);
    const auto v = analyze(f, opt);
    if (filter && v.classification != *filter) continue;
    ClassifyRow row{name, f.table_row, v.classification, "", "", ""};
    if (v.step2 && !v.step2->unconditionally_unstable) {
      row.s_lo = format_rational(v.step2->s_lo);
      row.s_hi = v.step2->s_hi ? format_rational(*v.step2->s_hi) : "inf";
    }
    if (v.step2 && v.step2->witness) row.witness = v.step2->witness->weight.str();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string classify_csv(const std::vector<ClassifyRow>& rows) {
  std::string out = "pde,table_row,classification,s_lo,s_hi,witness\r\n";
  for (const auto& r : rows)
    out += csv_escape(r.pde) + "," + csv_escape(r.table_row) + "," + to_string(r.classification) + "," +
           csv_escape(r.s_lo) + "," + csv_escape(r.s_hi) + "," + csv_escape(r.witness) + "\r\n";
  return out;
}

}  // namespace diamond
