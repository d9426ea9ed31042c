// vel: verification-lab front end.  Every subcommand writes a CSV report
// (header mandatory) and exits 0 iff all of its pass flags hold.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>

#include "vel/csv.hpp"
#include "vel/order_checks.hpp"
#include "vel/scenario.hpp"

namespace {

using namespace vel;

// --out FILE, default stdout
struct Sink {
  std::unique_ptr<std::ofstream> file;
  std::ostream& stream() { return file ? *file : std::cout; }
  static Sink open(const std::string& path) {
    Sink s;
    if (!path.empty()) {
      s.file = std::make_unique<std::ofstream>(path);
      if (!*s.file) throw std::runtime_error("cannot open output file: " + path);
    }
    return s;
  }
};

std::string var_name(VarKind v) {
  switch (v) {
    case VarKind::EntropyLin: return "s~";
    case VarKind::SoundLin: return "r~";
    case VarKind::VelocityLin: return "u~";
  }
  return "?";
}

std::string term_name(const Term& t) {
  return "r^" + std::to_string(t.m) + " d^" + std::to_string(t.l) + " " + var_name(t.var);
}

std::string order_str(Order o) { return CsvWriter::num(o.value()); }

int cmd_order(int max_m, int max_l, int max_k, int max_i, const std::string& out) {
  Sink sink = Sink::open(out);
  CsvWriter csv(sink.stream(),
                {"term", "k", "op", "claimed_min_order", "computed_min_order", "pass"});
  const bool ok = check_order_calculus(max_m, max_l, max_k, max_i, [&](const OrderCheckRow& r) {
    csv.row({term_name(r.term), std::to_string(r.k), r.op, order_str(r.claimed_min),
             order_str(r.computed_min), r.pass ? "1" : "0"});
  });
  std::cerr << "order check: " << (ok ? "pass" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

int cmd_identities(int samples, unsigned seed, double tol, const std::string& out) {
  Rng rng(seed);
  double w_gbb = 0, w_piu = 0, w_orth = 0;
  for (int trial = 0; trial < samples; ++trial) {
    Vec3<double> us;
    for (int i = 0; i < 3; ++i) us[i] = rng.uniform(-3.0, 3.0);
    const Vec4<double> u = complete_velocity<double>(us);
    const auto P = tensor_pack(u);
    w_gbb = std::max(w_gbb, ((P.B.transpose() * P.G * P.B - P.H).cwiseAbs().maxCoeff)());
    w_piu = std::max(w_piu, (P.Pi * lower_index(u)).cwiseAbs().maxCoeff());
    Vec3<double> ts;
    for (int i = 0; i < 3; ++i) ts[i] = rng.uniform(-2.0, 2.0);
    Vec4<double> X;
    X << lin_velocity_zero(u, ts), ts[0], ts[1], ts[2];
    w_orth = std::max(w_orth, std::abs(dot_minkowski(X, u)));
  }
  Sink sink = Sink::open(out);
  CsvWriter csv(sink.stream(), {"identity", "samples", "max_residual", "pass"});
  bool all = true;
  auto report = [&](const std::string& id, double worst) {
    const bool ok = worst < tol;
    all = all && ok;
    csv.row({id, std::to_string(samples), CsvWriter::num(worst), ok ? "1" : "0"});
  };
  report("GBB_eq_H", w_gbb);
  report("Pi_u_zero", w_piu);
  report("completion_orthogonal", w_orth);
  std::cerr << "identities: " << (all ? "pass" : "FAIL") << "\n";
  return all ? 0 : 1;
}

int cmd_elliptic(const std::string& op, int family_size, int k, const std::string& out) {
  if (k != 1) throw UnsupportedK("elliptic fits are implemented for k = 1");
  const EllipticFitReport rep = elliptic_fit_study(op, family_size);
  Sink sink = Sink::open(out);
  CsvWriter csv(sink.stream(), {"member", "lhs", "rhs", "ratio"});
  for (const auto& r : rep.rows)
    csv.row({std::to_string(r.member), CsvWriter::num(r.lhs), CsvWriter::num(r.rhs),
             CsvWriter::num(r.rhs > 0 ? r.lhs / r.rhs : 0)});
  std::cerr << "elliptic " << op << ": constant " << rep.constant << " refined " << rep.refined
            << " drift " << rep.drift << " -> " << (rep.pass ? "pass" : "FAIL") << "\n";
  return rep.pass ? 0 : 1;
}

int cmd_convergence(const std::string& test, int levels, int base_n, unsigned seed,
                    const std::string& out) {
  const ConvergenceReport rep = convergence_study(test, levels, base_n, seed);
  Sink sink = Sink::open(out);
  CsvWriter csv(sink.stream(), {"level", "n", "residual"});
  for (std::size_t i = 0; i < rep.rows.size(); ++i)
    csv.row({std::to_string(i), std::to_string(rep.rows[i].n),
             CsvWriter::num(rep.rows[i].residual)});
  std::cerr << "convergence " << test << ": rate " << rep.rate
            << (rep.control ? " (negative control)" : "") << " -> "
            << (rep.pass ? "pass" : "FAIL") << "\n";
  return rep.pass ? 0 : 1;
}

int cmd_equivalence(int n, int family_size, unsigned seed, const std::string& out) {
  Scenario sc;
  sc.n = n;
  sc.seed = seed;
  const EquivalenceReport rep = equivalence_study(sc, family_size);
  Sink sink = Sink::open(out);
  CsvWriter csv(sink.stream(), {"member", "ratio"});
  for (std::size_t m = 0; m < rep.ratios.size(); ++m)
    csv.row({std::to_string(m), CsvWriter::num(rep.ratios[m])});
  std::cerr << "equivalence: [" << rep.min_ratio << ", " << rep.max_ratio << "] refined ["
            << rep.min_fine << ", " << rep.max_fine << "] -> "
            << (rep.stable ? "pass" : "FAIL") << "\n";
  return rep.stable ? 0 : 1;
}

int cmd_run(const std::string& config_path, const std::string& out) {
  const Scenario sc = Scenario::from_config(Config::parse_file(config_path));
  const MonitorSeries ms = run_scenario(sc);
  Sink sink = Sink::open(out);
  CsvWriter csv(sink.stream(), {"t", "E0", "E2_wave", "E2_transport", "H2k", "entropy_norm",
                                "gronwall_bound"});
  for (const auto& r : ms.rows)
    csv.row({CsvWriter::num(r.t), CsvWriter::num(r.e0), CsvWriter::num(r.wave),
             CsvWriter::num(r.transport), CsvWriter::num(r.h2k), CsvWriter::num(r.entropy),
             CsvWriter::num(r.bound)});
  bool ok = ms.e0_monitor_pass && ms.h2k_monitor_pass;
  std::cerr << "run " << scenario_name(sc.id) << ": E0 monitor "
            << (ms.e0_monitor_pass ? "pass" : "FAIL") << ", H2k monitor "
            << (ms.h2k_monitor_pass ? "pass" : "FAIL") << " (margin " << ms.margin << ")";
  if (sc.id == ScenarioId::ConstantState) {
    ok = ok && ms.conserve_pass;
    std::cerr << ", conservation " << (ms.conserve_pass ? "pass" : "FAIL") << " (drift "
              << ms.h2k_drift << ")";
  }
  std::cerr << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification lab for the free-boundary linearized relativistic Euler system"};
  app.require_subcommand(1);
  std::string out;

  auto* run = app.add_subcommand("run", "monitored scenario run");
  std::string config_path;
  run->add_option("--config", config_path, "scenario config file")->required();
  run->add_option("--out", out, "CSV output file (default stdout)");

  auto* order = app.add_subcommand("order", "symbolic order calculus");
  auto* order_check = order->add_subcommand("check", "exhaustive order-calculus sweep");
  int max_m = 6, max_l = 6, max_k = 4, max_i = 8;
  order_check->add_option("--max-m", max_m, "max r power");
  order_check->add_option("--max-l", max_l, "max derivative count");
  order_check->add_option("--max-k", max_k, "max level");
  order_check->add_option("--max-i", max_i, "max D_t power");
  order_check->add_option("--out", out, "CSV output file (default stdout)");
  order->require_subcommand(1);

  auto* ident = app.add_subcommand("identities", "algebraic tensor identity fuzz");
  int samples = 1000;
  unsigned seed = 20240817;
  double tol = 1e-12;
  ident->add_option("--samples", samples, "random states per identity");
  ident->add_option("--seed", seed, "rng seed");
  ident->add_option("--tol", tol, "max residual");
  ident->add_option("--out", out, "CSV output file (default stdout)");

  auto* ell = app.add_subcommand("elliptic", "estimate-constant fits");
  std::string op = "L1";
  int family_size = 50, kk = 1;
  ell->add_option("--op", op, "L1 or L2L3")->check(CLI::IsMember({"L1", "L2L3"}));
  ell->add_option("--family-size", family_size, "test family size (>= 50)");
  ell->add_option("--k", kk, "derivative level");
  ell->add_option("--out", out, "CSV output file (default stdout)");

  auto* conv = app.add_subcommand("convergence", "residual refinement studies");
  std::string test = "perfect_derivative";
  int levels = 3, base_n = 64;
  unsigned cseed = 7;
  conv->add_option("--test", test, "study id");
  conv->add_option("--levels", levels, "refinement levels (>= 3)");
  conv->add_option("--base-n", base_n, "coarsest resolution");
  conv->add_option("--seed", cseed, "rng seed");
  conv->add_option("--out", out, "CSV output file (default stdout)");

  auto* eq = app.add_subcommand("equivalence", "energy/norm equivalence study");
  int eq_n = 48, eq_family = 50;
  unsigned eq_seed = 1;
  eq->add_option("--n", eq_n, "coarse resolution");
  eq->add_option("--family-size", eq_family, "family size (>= 50)");
  eq->add_option("--seed", eq_seed, "rng seed");
  eq->add_option("--out", out, "CSV output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out);
    if (*order_check) return cmd_order(max_m, max_l, max_k, max_i, out);
    if (*ident) return cmd_identities(samples, seed, tol, out);
    if (*ell) return cmd_elliptic(op, family_size, kk, out);
    if (*conv) return cmd_convergence(test, levels, base_n, cseed, out);
    if (*eq) return cmd_equivalence(eq_n, eq_family, eq_seed, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
