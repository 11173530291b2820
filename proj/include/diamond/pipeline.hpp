#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "diamond/msform.hpp"
#include "diamond/propagation.hpp"
#include "diamond/spectral.hpp"
#include "diamond/structure.hpp"

namespace diamond {

enum class Classification { structurally_inconsistent, unconditionally_unstable, conditionally_stable };
const char* to_string(Classification c);

struct AnalyzeOptions {
  bool step2 = true;
  bool step3 = true;
  SchemeSpec scheme;
  Criterion criterion;
  double dx = 0.1;
  std::optional<double> dt;  // default 0.5 * dx^max(1, s_lo)
  std::optional<int> N;      // default 40
};

struct PipelineVerdict {
  std::string pde;
  DMReport step1;
  std::optional<PropagationGraph> graph;
  std::vector<Cycle> cycles;
  std::optional<Step2Verdict> step2;
  std::optional<SpectralVerdict> step3;
  double dt = 0.0, dx = 0.0;
  int N = 0;
  /// Set when Step 2 or 3 could not run (e.g. the linearized pattern loses a pivot).
  std::string note;
  Classification classification = Classification::structurally_inconsistent;
};

/// Steps 1 -> 2 -> 3 with early exit on structural inconsistency or an
/// unconditionally unstable Step-2 verdict.
PipelineVerdict analyze(const Form& form, const AnalyzeOptions& opt = {});

nlohmann::json to_json(const Form& form, const PipelineVerdict& v);
std::string to_text(const Form& form, const PipelineVerdict& v);

/// Graphviz renderings of the equation-unknown graph and the propagation graph.
std::string dm_to_dot(const Form& form, const BipartiteSystem& bip, const DMReport& dm);
std::string propagation_to_dot(const PropagationGraph& g);

struct ClassifyRow {
  std::string pde;
  std::string table_row;
  Classification classification = Classification::structurally_inconsistent;
  std::string s_lo;     // empty unless conditionally stable
  std::string s_hi;     // "inf" when unbounded
  std::string witness;  // witness cycle weight when unconditionally unstable
};

/// Steps 1-2 over every registered form; `filter` keeps one classification.
std::vector<ClassifyRow> classify_registry(std::optional<Classification> filter = std::nullopt);
std::optional<Classification> parse_classification(const std::string& text);
/// RFC-4180 CSV with a header row.
std::string classify_csv(const std::vector<ClassifyRow>& rows);

std::string csv_escape(const std::string& field);

}  // namespace diamond
