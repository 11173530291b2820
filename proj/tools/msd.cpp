// msd: stability analysis and simulation driver for multi-symplectic PDEs.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "diamond/integrator.hpp"
#include "diamond/kernels.hpp"
#include "diamond/pipeline.hpp"

namespace fs = std::filesystem;
using namespace diamond;

namespace {

struct Global {
  std::string out = ".";
  std::string format = "text";
  std::vector<std::string> params;
  unsigned seed = 12345;
  std::string isa;
};

Params parse_params(const std::vector<std::string>& items) {
  Params p;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--params expects key=value, got '" + item + "'");
    std::size_t used = 0;
    const std::string val = item.substr(eq + 1);
    const double x = std::stod(val, &used);
    if (used != val.size()) throw std::invalid_argument("--params: '" + val + "' is not a number");
    p[item.substr(0, eq)] = x;
  }
  return p;
}

Form load_form(const std::string& pde, const std::string& json_path, const Global& g) {
  if (!json_path.empty()) {
    Form f = load_form_json(json_path);
    for (const auto& [k, v] : parse_params(g.params)) f.params[k] = v;
    const auto report = validate_form(f, g.seed);
    if (!report.ok()) throw FormError("invalid form in " + json_path + "\n" + report.summary(), report);
    return f;
  }
  if (pde.empty()) throw std::invalid_argument("one of --pde or --form is required");
  return registry_get(pde, parse_params(g.params));
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::pair<double, double> parse_domain(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("--domain expects a,b");
  return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"msd: structural, graph and spectral stability analysis of diamond schemes"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--format", g.format, "Console format")->check(CLI::IsMember({"text", "json", "csv"}))->capture_default_str();
  app.add_option("--params", g.params, "PDE constants as key=value")->expected(0, -1);
  app.add_option("--seed", g.seed, "Seed for randomized checks")->capture_default_str();
  app.add_option("--isa", g.isa, "Force kernel instruction set")->check(CLI::IsMember({"scalar", "avx2"}));

  // analyze
  auto* an = app.add_subcommand("analyze", "Run Steps 1-3 on one PDE");
  std::string an_pde, an_form, an_scheme = "simple", an_crit = "strict";
  bool s1 = false, s2 = false, s3 = false;
  double an_dx = 0.1;
  std::optional<double> an_dt;
  std::optional<int> an_N;
  an->add_option("--pde", an_pde, "Registered PDE name");
  an->add_option("--form", an_form, "Form JSON file");
  an->add_flag("--step1", s1, "Stop after Step 1");
  an->add_flag("--step2", s2, "Stop after Step 2");
  an->add_flag("--step3", s3, "Run through Step 3 (default)");
  an->add_option("--scheme", an_scheme, "simple or rk:R")->capture_default_str();
  an->add_option("--criterion", an_crit, "strict, nozero or growth:THETA")->capture_default_str();
  an->add_option("--dx", an_dx, "Step 3 dx")->capture_default_str();
  an->add_option("--dt", an_dt, "Step 3 dt");
  an->add_option("--N", an_N, "Step 3 cell count");

  // run
  auto* run = app.add_subcommand("run", "Integrate a PDE on a periodic diamond mesh");
  std::string run_pde, run_form, run_scheme = "simple", run_domain = "0,1", run_ic = "zero", run_init = "auto";
  std::vector<std::string> observe;
  double run_dx = 0.1, run_dt = 0.05, run_T = 1.0, run_blowup = 1e8;
  long run_cadence = 0;
  std::vector<std::string> ic_params;
  run->add_option("--pde", run_pde, "Registered PDE name");
  run->add_option("--form", run_form, "Form JSON file");
  run->add_option("--scheme", run_scheme, "simple or rk:R")->capture_default_str();
  run->add_option("--dx", run_dx, "Cell width (N = round((b-a)/dx))")->capture_default_str();
  run->add_option("--dt", run_dt, "Time step")->capture_default_str();
  run->add_option("--domain", run_domain, "Periodic domain a,b")->capture_default_str();
  run->add_option("--T", run_T, "Horizon")->capture_default_str();
  run->add_option("--ic", run_ic, "Built-in initial condition")->capture_default_str();
  run->add_option("--ic-params", ic_params, "Initial-condition constants as key=value")->expected(0, -1);
  run->add_option("--init", run_init, "Half-step initialization: auto, exact, box")->capture_default_str();
  run->add_option("--observe", observe, "energy,snapshots")->delimiter(',');
  run->add_option("--cadence", run_cadence, "Steps between samples (0 = automatic)")->capture_default_str();
  run->add_option("--blowup", run_blowup, "Divergence bound")->capture_default_str();

  // sweep
  auto* sw = app.add_subcommand("sweep", "Stability boundary dt_max(dx)");
  std::string sw_pde, sw_form, sw_scheme = "simple", sw_crit = "strict", sw_dx = "0.4,0.2,0.1,0.05";
  double sw_len = 4.0;
  sw->add_option("--pde", sw_pde, "Registered PDE name");
  sw->add_option("--form", sw_form, "Form JSON file");
  sw->add_option("--scheme", sw_scheme, "simple or rk:R")->capture_default_str();
  sw->add_option("--criterion", sw_crit, "strict, nozero or growth:THETA")->capture_default_str();
  sw->add_option("--dx-list", sw_dx, "Descending dx values")->capture_default_str();
  sw->add_option("--domain-length", sw_len, "Domain length b-a")->capture_default_str();

  // classify
  auto* cl = app.add_subcommand("classify", "Classify every registered PDE");
  std::string cl_filter;
  cl->add_option("--filter", cl_filter, "inconsistent, unstable or stable");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!g.isa.empty()) kernels::set_active_isa(g.isa == "avx2" ? kernels::Isa::avx2 : kernels::Isa::scalar);
    const fs::path out(g.out);

    if (*an) {
      const Form f = load_form(an_pde, an_form, g);
      AnalyzeOptions opt;
      opt.step2 = !s1;
      opt.step3 = !s1 && !s2;
      opt.scheme = SchemeSpec::parse(an_scheme);
      opt.criterion = Criterion::parse(an_crit);
      opt.dx = an_dx;
      opt.dt = an_dt;
      opt.N = an_N;
      const auto v = analyze(f, opt);
      const auto j = to_json(f, v);
      write_file(out / (f.name + ".analysis.json"), j.dump(2) + "\n");
      const auto bip = build_equation_unknown_graph(f);
      write_file(out / (f.name + ".dm.dot"), dm_to_dot(f, bip, v.step1));
      if (v.graph) write_file(out / (f.name + ".propagation.dot"), propagation_to_dot(*v.graph));
      if (g.format == "json") std::cout << j.dump(2) << "\n";
      else std::cout << to_text(f, v);
      return 0;
    }

    if (*run) {
      const Form f = load_form(run_pde, run_form, g);
      const auto [a, b] = parse_domain(run_domain);
      MeshParams mesh{a, b, static_cast<int>(std::lround((b - a) / run_dx)), run_dt, run_T};
      const auto scheme = SchemeSpec::parse(run_scheme);
      const auto ic = make_initial_condition(run_ic, f, mesh, parse_params(ic_params));
      Observers obs;
      for (const auto& o : observe) {
        if (o == "energy") obs.energy = true;
        else if (o == "snapshots") obs.snapshots = true;
        else throw std::invalid_argument("--observe: unknown observer '" + o + "'");
      }
      obs.cadence = run_cadence;
      obs.blowup = run_blowup;
      obs.init = parse_half_init(run_init);
      const auto res = integrate(f, scheme, ic, mesh, obs);

      if (obs.energy) {
        std::string csv = "t,energy\r\n";
        for (const auto& e : res.energy) csv += fmt(e.t) + "," + fmt(e.value) + "\r\n";
        write_file(out / "energy.csv", csv);
      }
      if (obs.snapshots) {
        std::string csv = "t,x";
        for (const auto& n : f.names) csv += "," + csv_escape(n);
        csv += "\r\n";
        for (const auto& s : res.snapshots)
          for (int i = 0; i < mesh.N; ++i) {
            csv += fmt(s.t) + "," + fmt(mesh.x(i));
            for (int k = 0; k < f.d(); ++k) csv += "," + fmt(s.z(i, k));
            csv += "\r\n";
          }
        write_file(out / "snapshots.csv", csv);
      }
      nlohmann::json meta = {{"pde", f.name},         {"scheme", scheme.str()},   {"ic", ic.name},
                             {"a", a},                {"b", b},                   {"N", mesh.N},
                             {"dx", mesh.dx()},       {"dt", mesh.dt},            {"T", mesh.T},
                             {"status", to_string(res.status)}, {"steps", res.steps}, {"t_end", res.t_end},
                             {"max_abs", res.max_abs}, {"isa", kernels::isa_name(kernels::active_isa())}};
      if (!res.energy.empty()) {
        const double e0 = res.energy.front().value;
        double drift = 0.0;
        for (const auto& e : res.energy) drift = std::max(drift, std::abs(e.value - e0));
        meta["energy_initial"] = e0;
        meta["energy_max_abs_drift"] = drift;
        meta["energy_max_rel_drift"] = e0 != 0.0 ? drift / std::abs(e0) : drift;
      }
      write_file(out / "run.json", meta.dump(2) + "\n");
      if (g.format == "json") std::cout << meta.dump(2) << "\n";
      else
        std::cout << f.name << " " << scheme.str() << ": " << to_string(res.status) << " after " << res.steps
                  << " steps (t=" << res.t_end << "), max|z|=" << res.max_abs << "\n";
      return 0;
    }

    if (*sw) {
      const Form f = load_form(sw_pde, sw_form, g);
      const auto res = stability_boundary_sweep(linearize(f), SchemeSpec::parse(sw_scheme), sw_len, parse_list(sw_dx),
                                                Criterion::parse(sw_crit));
      std::string csv = "dx,N,dt_max\r\n";
      for (const auto& p : res.points)
        csv += fmt(p.dx) + "," + std::to_string(p.N) + "," + (p.dt_max ? fmt(*p.dt_max) : "") + "\r\n";
      csv += "slope,," + fmt(res.slope) + "\r\n";
      csv += "c,," + fmt(std::exp(res.intercept)) + "\r\n";
      write_file(out / (f.name + ".sweep.csv"), csv);
      if (g.format == "text") {
        for (const auto& p : res.points)
          std::cout << "dx=" << p.dx << " N=" << p.N << " dt_max=" << (p.dt_max ? fmt(*p.dt_max) : "none") << "\n";
        std::cout << "slope=" << res.slope << " c=" << std::exp(res.intercept) << "\n";
      } else {
        std::cout << csv;
      }
      return 0;
    }

    if (*cl) {
      const auto rows = classify_registry(cl_filter.empty() ? std::nullopt : parse_classification(cl_filter));
      const std::string csv = classify_csv(rows);
      write_file(out / "classification.csv", csv);
      if (g.format == "text") {
        for (const auto& r : rows) {
          std::cout << std::left << std::setw(22) << r.pde << std::setw(26) << to_string(r.classification);
          if (!r.s_lo.empty()) std::cout << "s in [" << r.s_lo << ", " << r.s_hi << ")";
          if (!r.witness.empty()) std::cout << "witness " << r.witness;
          std::cout << "\n";
        }
      } else {
        std::cout << csv;
      }
      return 0;
    }
  } catch (const FormError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
