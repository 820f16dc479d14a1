#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "heavyq/circuits.hpp"
#include "heavyq/config.hpp"
#include "heavyq/parallel.hpp"
#include "heavyq/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hq;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Context {
  RunConfig cfg;
  fs::path out;
  fs::path cache;
  std::string command;
  json manifest;
  std::vector<std::string> written;

  bool csv() const {
    for (const auto& f : cfg.formats)
      if (f == "csv") return true;
    return false;
  }
  fs::path file(const std::string& name) {
    written.push_back(name);
    return out / name;
  }
  void finish() {
    manifest["tool"] = "heavyq";
    manifest["version"] = version();
    manifest["command"] = command;
    manifest["config_hash"] = config_hash(cfg);
    manifest["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    manifest["config"] = json::parse(canonical_config(cfg));
    written.push_back("manifest.json");
    manifest["outputs"] = written;
    std::ofstream f(out / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write manifest");
  }
};

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// RFC 4180 quoting for text fields.
std::string text(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + '"';
}

class CsvFile {
 public:
  explicit CsvFile(const fs::path& p) : f_(p, std::ios::binary) {
    if (!f_) throw std::runtime_error("cannot write " + p.string());
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) f_ << (i ? "," : "") << cells[i];
    f_ << "\r\n";
  }

 private:
  std::ofstream f_;
};

json trajectory_json(const TrajectoryParams& t) {
  return {{"v_max", t.v_max}, {"a_max", t.a_max}, {"x0", t.x0},          {"xf", t.xf},
          {"a0", t.a0},       {"t0", t.t0()},     {"T", t.T()},          {"duration", t.duration()}};
}

// Charges present at t = 0, or a single positive charge in the middle when
// the configuration has none (charge-pool adapt and circuits).
BackgroundCharges charges_or_default(const RunConfig& cfg) {
  auto q = cfg.static_charges();
  if (q.entries.empty()) {
    const int L = cfg.lattice.L;
    q.add(L % 2 == 0 ? L - 1 : L, 1.0);
  }
  return q;
}

void write_hadron(Context& ctx) {
  const auto hm = heavy_hadron_mass(ctx.cfg.lattice);
  ctx.manifest["E_vac"] = hm.E_vac;
  ctx.manifest["Lambda_bar"] = hm.lambda_bar;
  std::printf("E_vac = %.12f  Lambda_bar = %.12f\n", hm.E_vac, hm.lambda_bar);
}

int cmd_ground_state(Context& ctx) {
  const auto& c = ctx.cfg.lattice;
  const auto s = ctx.cfg.schedule();
  const auto q = s.at(0.0, c.N());
  const int sector = screening_sector(q);
  auto gs = ground_state(hamiltonian_at(c, s, 0.0, ctx.cfg.evolution.lambda_bar, sector), c.L, sector);
  const auto psi = to_complex(gs.psi);
  const auto rho = charge_density(psi);
  ctx.manifest["E"] = gs.E;
  ctx.manifest["sector"] = sector;
  ctx.manifest["residual"] = gs.residual;
  ctx.manifest["chiral_condensate"] = chiral_condensate(psi);
  if (s.moving) ctx.manifest["trajectory"] = trajectory_json(s.moving->trajectory);
  std::printf("E = %.12f (sector %d, residual %.2e)\n", gs.E, sector, gs.residual);
  write_hadron(ctx);
  if (ctx.csv()) {
    CsvFile f(ctx.file("density.csv"));
    f.row({"k", "q_k"});
    for (std::size_t k = 0; k < rho.size(); ++k) f.row({std::to_string(k), num(rho[k])});
  }
  return 0;
}

json series_to_json(const ObservableSeries& s) {
  json r = json::array();
  for (const auto& e : s.records) r.push_back({e.step, e.t, e.x, e.v, e.E});
  return {{"v_max", s.v_max}, {"records", r}};
}

ObservableSeries series_from_json(const json& j) {
  ObservableSeries s;
  s.v_max = j.at("v_max").get<double>();
  for (const auto& r : j.at("records")) {
    ObservableRecord e;
    e.step = r[0].get<int>();
    e.t = r[1].get<double>();
    e.x = r[2].get<double>();
    e.v = r[3].get<double>();
    e.E = r[4].get<double>();
    s.records.push_back(e);
  }
  return s;
}

// Vacuum partner of a medium run, reused from the cache when its hash matches.
ObservableSeries paired_vacuum(Context& ctx) {
  const RunConfig v = vacuum_partner(ctx.cfg);
  const std::string h = config_hash(v);
  const fs::path p = ctx.cache / h / "vacuum_series.json";
  ctx.manifest["vacuum_config_hash"] = h;
  if (fs::exists(p)) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    ctx.manifest["vacuum_cached"] = true;
    std::printf("paired vacuum run %s: cached\n", h.c_str());
    return series_from_json(json::parse(ss.str()));
  }
  std::printf("paired vacuum run %s: running\n", h.c_str());
  auto run = run_config(v);
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << series_to_json(run.result.series).dump() << '\n';
  ctx.manifest["vacuum_cached"] = false;
  return std::move(run.result.series);
}

int cmd_evolve(Context& ctx) {
  const auto s = ctx.cfg.schedule();
  write_hadron(ctx);
  if (!s.moving) {
    // nothing moves: report the static ground state, no series
    if (!s.static_charges.entries.empty()) {
      const int sector = screening_sector(s.static_charges);
      const auto gs = ground_state(hamiltonian_at(ctx.cfg.lattice, s, 0.0, ctx.cfg.evolution.lambda_bar, sector),
                                   ctx.cfg.lattice.L, sector);
      ctx.manifest["E0"] = gs.E;
      ctx.manifest["sector"] = sector;
    }
    ctx.manifest["steps"] = 0;
    if (ctx.csv()) write_series_csv(ctx.file("series.csv").string(), ObservableSeries{});
    return 0;
  }
  ctx.manifest["trajectory"] = trajectory_json(s.moving->trajectory);
  auto run = run_config(ctx.cfg);
  const auto& series = run.result.series;
  ctx.manifest["E0"] = run.E0;
  ctx.manifest["sector"] = run.sector;
  ctx.manifest["t_end"] = run.t_end;
  ctx.manifest["steps"] = static_cast<int>(series.size()) - 1;
  if (!series.records.empty()) {
    ctx.manifest["E_final"] = series.records.back().E;
    ctx.manifest["max_norm_error"] = [&] {
      double m = 0.0;
      for (const auto& r : series.records) m = std::max(m, std::abs(r.norm - 1.0));
      return m;
    }();
  }
  try {
    const auto fit = lattice_averaged_de_dx(series);
    ctx.manifest["lattice_averaged_dE_dx"] = fit.slope;
    ctx.manifest["fit_points"] = fit.points;
  } catch (const std::invalid_argument&) {
    ctx.manifest["lattice_averaged_dE_dx"] = nullptr;
  }
  std::printf("evolved %zu steps to t = %g (E0 = %.12f)\n", series.size() - 1, run.t_end, run.E0);
  if (ctx.csv()) {
    write_series_csv(ctx.file("series.csv").string(), series);
    if (!ctx.cfg.observables.tangle_ns.empty()) write_tangles_csv(ctx.file("tangles.csv").string(), series);
  }
  if (!s.static_charges.entries.empty()) {
    const auto vac = paired_vacuum(ctx);
    const auto d = delta_medium(series, vac);
    const auto dm = de_dx(series), dv = de_dx(vac);
    const auto& a = series.records;
    const auto& b = vac.records;
    ctx.manifest["net_delta_energy"] = (a.back().E - a.front().E) - (b.back().E - b.front().E);
    std::printf("net energy change relative to vacuum: %.12f\n", ctx.manifest["net_delta_energy"].get<double>());
    if (ctx.csv()) {
      CsvFile f(ctx.file("delta.csv"));
      f.row({"step", "t", "x", "dE_dx_medium", "dE_dx_vacuum", "delta"});
      for (std::size_t i = 0; i < d.size(); ++i)
        f.row({std::to_string(a[i].step), num(a[i].t), num(a[i].x), num(dm[i]), num(dv[i]), num(d[i])});
    }
  }
  return 0;
}

int cmd_scan(Context& ctx) {
  const auto& c = ctx.cfg.lattice;
  const auto s = ctx.cfg.schedule();
  const double x0 = s.moving ? s.moving->trajectory.x0 : 3.0;
  const double xf = s.moving ? s.moving->trajectory.xf : 2.0 * c.L - 5.0;
  double lam = std::numeric_limits<double>::quiet_NaN();
  if (!ctx.cfg.scan_velocities.empty()) lam = heavy_hadron_mass(c).lambda_bar;
  ctx.manifest["Lambda_bar"] = std::isfinite(lam) ? json(lam) : json(nullptr);
  std::vector<ScanRow> rows;
  for (double v : ctx.cfg.scan_velocities) {
    rows.push_back(scan_point(c, v, x0, xf, ctx.cfg.evolution));
    const auto& r = rows.back();
    if (r.skipped)
      std::printf("v = %g: skipped (%s)\n", v, r.reason.c_str());
    else
      std::printf("v = %g: slope %.10g\n", v, r.slope);
  }
  std::vector<double> lv, ls;
  for (const auto& r : rows)
    if (!r.skipped && r.v <= 0.3 + 1e-12 && r.slope > 0) lv.push_back(std::log(r.v)), ls.push_back(std::log(r.slope));
  ctx.manifest["velocity_exponent"] = lv.size() >= 2 ? json(linear_fit(lv, ls).slope) : json(nullptr);
  ctx.manifest["rows"] = rows.size();
  if (ctx.csv()) {
    CsvFile f(ctx.file("scan.csv"));
    f.row({"v", "status", "slope", "slope_over_lambda2", "points"});
    for (const auto& r : rows)
      f.row({num(r.v), r.skipped ? "skipped" : "ok", r.skipped ? "" : num(r.slope),
             r.skipped ? "" : num(r.slope / (lam * lam)), r.skipped ? "" : std::to_string(r.points)});
  }
  return 0;
}

void write_adapt_rows(CsvFile& f, const AdaptResult& r, const std::string& prefix_L, std::size_t width) {
  for (const auto& s : r.steps) {
    std::vector<std::string> row;
    if (!prefix_L.empty()) row.push_back(prefix_L);
    row.push_back(std::to_string(s.step));
    row.push_back(s.selected ? text(s.selected->str()) : "");
    row.push_back(s.selected ? num(s.gradient) : "");
    for (std::size_t k = 0; k < width; ++k) row.push_back(k < s.theta.size() ? num(s.theta[k]) : "");
    row.push_back(num(s.E));
    row.push_back(num(s.delta_E));
    row.push_back(num(s.infidelity));
    row.push_back(std::to_string(s.iterations));
    row.push_back(num(s.grad_norm));
    f.row(row);
  }
}

std::vector<std::string> adapt_header(bool with_L, std::size_t width) {
  std::vector<std::string> h;
  if (with_L) h.push_back("L");
  for (const char* k : {"step", "operator", "gradient"}) h.push_back(k);
  for (std::size_t k = 0; k < width; ++k) h.push_back("theta_" + std::to_string(k + 1));
  for (const char* k : {"E", "delta_E", "infidelity", "iterations", "grad_norm"}) h.push_back(k);
  return h;
}

json steps_json(const AdaptResult& r) {
  json a = json::array();
  for (const auto& s : r.steps)
    a.push_back({{"step", s.step},
                 {"operator", s.selected ? json(s.selected->str()) : json(nullptr)},
                 {"theta", s.theta},
                 {"E", s.E},
                 {"delta_E", std::isfinite(s.delta_E) ? json(s.delta_E) : json(nullptr)},
                 {"infidelity", std::isfinite(s.infidelity) ? json(s.infidelity) : json(nullptr)}});
  return a;
}

struct VacuumRun {
  AdaptResult result;
  GroundState exact;
};

// Exact ground states (for the delta_E / infidelity columns) are skipped
// above this sector dimension.
constexpr std::size_t kMaxExactDim = std::size_t{1} << 23;

VacuumRun vacuum_adapt(const LatticeConfig& c, const AdaptConfig& a) {
  auto H = build_hamiltonian(c, {});
  VacuumRun v;
  CompiledOperator h(H, Basis::charge_sector(c.L, 0));
  const bool metrics = h.basis()->dim() <= kMaxExactDim;
  if (metrics) v.exact = ground_state(H, c.L, 0);
  const auto init = RealState::basis_state(h.basis(), strong_coupling_vacuum(c.L));
  AdaptOptions o;
  o.max_steps = a.vacuum_steps;
  o.mode = a.vacuum_mode;
  o.gradient_threshold = a.gradient_threshold;
  o.optimizer.gtol = a.gtol;
  v.result = adapt_vqe(h, init, build_pool_vacuum(c.L), o, metrics ? &v.exact : nullptr);
  if (!metrics) std::fprintf(stderr, "note: L = %d too large for exact metrics; delta_E and infidelity left empty\n", c.L);
  return v;
}

void print_steps(const AdaptResult& r, const char* tag) {
  for (const auto& s : r.steps) {
    std::printf("%s step %d %-14s", tag, s.step, s.selected ? s.selected->str().c_str() : "-");
    for (double t : s.theta) std::printf(" %+.6f", t);
    std::printf("  dE %.6g  I_L %.6g\n", s.delta_E, s.infidelity);
  }
}

int cmd_adapt_vacuum(Context& ctx) {
  const auto& a = ctx.cfg.adapt;
  std::vector<int> Ls = a.L_values.empty() ? std::vector<int>{ctx.cfg.lattice.L} : a.L_values;
  std::vector<std::pair<int, VacuumRun>> runs;
  std::size_t width = 0;
  json per_L = json::object();
  for (int L : Ls) {
    LatticeConfig c = ctx.cfg.lattice;
    c.L = L;
    c.validate();
    runs.emplace_back(L, vacuum_adapt(c, a));
    const auto& r = runs.back().second.result;
    width = std::max(width, r.ansatz.size());
    per_L[std::to_string(L)] = steps_json(r);
    print_steps(r, ("L=" + std::to_string(L)).c_str());
  }
  ctx.manifest["runs"] = per_L;
  if (ctx.csv()) {
    CsvFile f(ctx.file("adapt_vacuum.csv"));
    f.row(adapt_header(true, width));
    for (const auto& [L, v] : runs) write_adapt_rows(f, v.result, std::to_string(L), width);
  }
  // ansatz of the configured size, else of the largest one
  const auto* pick = &runs.back();
  for (const auto& r : runs)
    if (r.first == ctx.cfg.lattice.L) pick = &r;
  save_ansatz(ctx.file("ansatz.json").string(), pick->second.result.ansatz, pick->first);

  if (a.extrapolate) {
    if (runs.size() < 3) throw ConfigError("$.adapt.L_values: extrapolation needs >= 3 sizes");
    const auto& ref = runs.back().second.result.ansatz;
    json ex = json::array();
    std::vector<std::vector<std::string>> rows;
    Ansatz inf = ref;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      std::vector<double> xs, ys;
      for (const auto& [L, v] : runs) {
        const auto& an = v.result.ansatz;
        if (k >= an.size()) continue;
        if (!(an[k].op.label == ref[k].op.label))
          std::fprintf(stderr, "warning: operator %zu differs at L = %d (%s vs %s)\n", k + 1, L,
                       an[k].op.label.str().c_str(), ref[k].op.label.str().c_str());
        xs.push_back(L);
        ys.push_back(an[k].theta);
      }
      const auto fit = extrapolate_parameters(xs, ys);
      inf[k].theta = fit.theta_inf;
      ex.push_back({{"index", k + 1},
                    {"operator", ref[k].op.label.str()},
                    {"theta_inf", fit.theta_inf},
                    {"c", fit.c},
                    {"b", fit.b},
                    {"rms_residual", fit.rms_residual},
                    {"degenerate", fit.degenerate},
                    {"message", fit.message}});
      rows.push_back({std::to_string(k + 1), text(ref[k].op.label.str()), num(fit.theta_inf), num(fit.c), num(fit.b),
                      num(fit.rms_residual), fit.degenerate ? "true" : "false"});
      std::printf("theta_inf[%zu] = %+.6f%s\n", k + 1, fit.theta_inf, fit.degenerate ? " (degenerate fit)" : "");
    }
    ctx.manifest["extrapolation"] = ex;
    if (ctx.csv()) {
      CsvFile f(ctx.file("extrapolation.csv"));
      f.row({"index", "operator", "theta_inf", "c", "b", "rms_residual", "degenerate"});
      for (const auto& r : rows) f.row(r);
    }
    // extrapolated angles on the configured size
    for (auto& e : inf) e.op = pool_operator(ctx.cfg.lattice.L, e.op.label);
    save_ansatz(ctx.file("ansatz_inf.json").string(), inf, ctx.cfg.lattice.L);
  }
  return 0;
}

int cmd_adapt_charge(Context& ctx) {
  const auto& c = ctx.cfg.lattice;
  const auto& a = ctx.cfg.adapt;
  const auto vac = vacuum_adapt(c, a);
  print_steps(vac.result, "vacuum");
  const auto q = charges_or_default(ctx.cfg);
  const int sector = screening_sector(q);
  const auto H = build_hamiltonian(c, q);
  const auto gs = ground_state(H, c.L, sector);
  CompiledOperator h(H, Basis::charge_sector(c.L, sector));
  const auto init = prepare_init_with_charge(c.L, vac.result.ansatz, q);
  std::vector<std::string> warnings;
  double xi = 0.0;
  if (q.entries.size() > 1) xi = 1.0 / heavy_hadron_mass(c).lambda_bar;
  const auto pool = build_pool_charges(c.L, q, xi, &warnings);
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  AdaptOptions o;
  o.max_steps = a.steps;
  o.mode = a.mode;
  o.gradient_threshold = a.gradient_threshold;
  o.optimizer.gtol = a.gtol;
  const auto r = adapt_vqe(h, init, pool, o, &gs);
  print_steps(r, "charge");
  ctx.manifest["E_gs"] = gs.E;
  ctx.manifest["sector"] = sector;
  ctx.manifest["vacuum_steps"] = steps_json(vac.result);
  ctx.manifest["charge_steps"] = steps_json(r);
  ctx.manifest["warnings"] = warnings;
  if (ctx.csv()) {
    CsvFile fv(ctx.file("adapt_vacuum.csv"));
    fv.row(adapt_header(false, vac.result.ansatz.size()));
    write_adapt_rows(fv, vac.result, "", vac.result.ansatz.size());
    CsvFile fc(ctx.file("adapt_steps.csv"));
    fc.row(adapt_header(false, r.ansatz.size()));
    write_adapt_rows(fc, r, "", r.ansatz.size());
  }
  Ansatz all = vac.result.ansatz;
  all.insert(all.end(), r.ansatz.begin(), r.ansatz.end());
  save_ansatz(ctx.file("ansatz.json").string(), all, c.L);
  return 0;
}

int cmd_adapt(Context& ctx) {
  return ctx.cfg.adapt.pool == "vacuum" ? cmd_adapt_vacuum(ctx) : cmd_adapt_charge(ctx);
}

// Splits a stored ansatz into vacuum and charge parts rebuilt at size L.
void split_ansatz(const Ansatz& in, int L, Ansatz& vacuum, Ansatz& charge) {
  for (const auto& e : in) {
    const auto& l = e.op.label;
    AnsatzElement x = e;
    if (l.family == PoolFamily::Charge) {
      const int sign = l.charge_sign ? l.charge_sign : 1;
      x.op = charge_operator(L, sign > 0 ? (L % 2 ? L : L - 1) : (L % 2 ? L - 1 : L), sign, l.n, l.d);
      charge.push_back(x);
    } else {
      x.op = pool_operator(L, l);
      vacuum.push_back(x);
    }
  }
}

// State the circuit should prepare: the vacuum ansatz, the superposition
// around every charge, then the charge block around each charge.
RealState reference_state(int L, const BackgroundCharges& q, const Ansatz& vacuum, const Ansatz& charge) {
  RealState psi = prepare_init_with_charge(L, vacuum, q);
  int proto = 0;
  for (const auto& e : charge) proto = e.op.label.charge_sign ? e.op.label.charge_sign : 1;
  for (const auto& c : q.entries) {
    const int sign = c.Q > 0 ? 1 : -1;
    for (const auto& e : charge)
      apply_element(psi, charge_operator(L, c.site, sign, e.op.label.n, e.op.label.d),
                    sign == proto ? e.theta : -e.theta, ApplyMode::Exact);
  }
  return psi;
}

int cmd_circuit(Context& ctx) {
  const int L = ctx.cfg.lattice.L;
  if (ctx.cfg.circuit.ansatz.empty()) throw ConfigError("$.circuit.ansatz: required by the circuit command");
  fs::path ap = ctx.cfg.circuit.ansatz;
  if (ap.is_relative()) ap = fs::path(ctx.cfg.source_dir) / ap;
  int Lf = 0;
  const auto stored = load_ansatz(ap.string(), &Lf);
  Ansatz vacuum, charge;
  split_ansatz(stored, L, vacuum, charge);
  std::vector<std::string> notes;
  for (auto& e : vacuum)
    if (e.mode == ApplyMode::Exact) {
      e.mode = ApplyMode::Trotter;
      if (notes.empty()) notes.push_back("vacuum elements optimized in exact mode are applied Trotterized");
    }
  const auto q = charge.empty() ? ctx.cfg.static_charges() : charges_or_default(ctx.cfg);
  SynthesisOptions so;
  so.reuse_vacuum_tail = ctx.cfg.circuit.reuse_vacuum_tail;
  SynthesisReport rep;
  const auto circ = synthesize_state_prep(L, q, vacuum, charge, so, &rep);
  const int nq = static_cast<int>(q.entries.size());
  const auto res = measure_resources(circ, L, nq);
  {
    std::ofstream f(ctx.file("state_prep.qasm"), std::ios::binary);
    f << export_qasm(circ);
  }
  ctx.manifest["ansatz_L"] = Lf;
  ctx.manifest["n_charges"] = nq;
  ctx.manifest["cnot_count"] = res.cnot_count;
  ctx.manifest["cnot_depth"] = res.cnot_depth;
  ctx.manifest["formula_count"] = res.formula_count;
  ctx.manifest["formula_depth"] = res.formula_depth;
  ctx.manifest["prep_cnots"] = rep.prep_cnots;
  ctx.manifest["vacuum_cnots"] = rep.vacuum_cnots;
  ctx.manifest["charge_block_cnots"] = rep.charge_block_cnots;
  notes.insert(notes.end(), rep.warnings.begin(), rep.warnings.end());
  for (const auto& n : notes) std::fprintf(stderr, "warning: %s\n", n.c_str());
  ctx.manifest["warnings"] = notes;
  std::printf("CNOTs %d (formula %d), depth %d (formula %d)\n", res.cnot_count, res.formula_count, res.cnot_depth,
              res.formula_depth);
  if (res.cnot_count != res.formula_count || res.cnot_depth != res.formula_depth)
    std::printf("note: synthesized resources differ from the closed-form count\n");
  if (2 * L <= 22) {
    const auto ref = reference_state(L, q, vacuum, charge);
    const auto full = simulate_circuit(circ);
    const auto sec = change_basis(full, ref.basis, 1e-8);
    const double F = fidelity(to_complex(ref), sec);
    ctx.manifest["fidelity_vs_ansatz"] = F;
    std::printf("fidelity with the ansatz state: 1 - F = %.3e\n", 1.0 - F);
  }
  return 0;
}

int cmd_resources(Context& ctx) {
  const auto& c = ctx.cfg.lattice;
  const int nq = static_cast<int>(ctx.cfg.static_charges().entries.size());
  int lb = ctx.cfg.resources_lambda_bar;
  if (lb < 0) lb = ctx.cfg.evolution.lambda_bar;
  if (lb < 0) {
    const double m = heavy_hadron_mass(c).lambda_bar;
    lb = default_lambda_bar(m);
    ctx.manifest["Lambda_bar"] = m;
  }
  const auto sp = state_prep_formula(c.L, nq);
  ctx.manifest["state_prep"] = {{"cnot_count", sp.formula_count}, {"cnot_depth", sp.formula_depth}, {"n_charges", nq}};
  ctx.manifest["lambda_bar"] = lb;
  std::printf("state preparation: %d CNOTs, depth %d (N_Q = %d)\n", sp.formula_count, sp.formula_depth, nq);
  try {
    const auto ts = cnot_cost_trotter_step(c.L, lb);
    ctx.manifest["trotter_step"] = {{"cnot_count", ts.formula_count}, {"scaling", ts.scaling}};
    std::printf("second-order Trotter step: %d CNOTs (lambda_bar = %d, %s)\n", ts.formula_count, lb,
                ts.scaling.c_str());
  } catch (const std::invalid_argument& e) {
    ctx.manifest["trotter_step"] = {{"error", e.what()}};
    std::printf("second-order Trotter step: %s\n", e.what());
  }
  if (ctx.csv()) {
    CsvFile f(ctx.file("resources.csv"));
    f.row({"kind", "L", "n_charges", "lambda_bar", "cnot_count", "cnot_depth"});
    f.row({"state-prep", std::to_string(c.L), std::to_string(nq), "", std::to_string(sp.formula_count),
           std::to_string(sp.formula_depth)});
    if (ctx.manifest["trotter_step"].contains("cnot_count"))
      f.row({"trotter-step", std::to_string(c.L), "", std::to_string(lb),
             std::to_string(ctx.manifest["trotter_step"]["cnot_count"].get<int>()), ""});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-charge energy loss in the lattice Schwinger model"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  std::string config_path, out_dir, cache_dir, stepper;
  int threads = 0;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", config_path, "run configuration (JSON)")->required();
    s->add_option("--out", out_dir, "output directory (overrides outputs.directory)");
    s->add_option("--threads", threads, "worker threads (0: runtime default)")->check(CLI::NonNegativeNumber);
    s->add_option("--stepper", stepper, "time stepper")->check(CLI::IsMember({"krylov", "trotter2"}));
    s->add_option("--cache", cache_dir, "cache for paired vacuum runs (default <out>/cache)");
  };
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(Context&);
  };
  const Sub subs[] = {
      {"ground-state", "ground state with the t = 0 charges, vacuum energy and hadron mass", cmd_ground_state},
      {"evolve", "time evolution with a moving heavy charge (vacuum-subtracted in a medium)", cmd_evolve},
      {"scan-velocity", "lattice-averaged energy loss for each velocity of scan.velocities", cmd_scan},
      {"adapt", "SC-ADAPT-VQE tables, ansatz file and extrapolation", cmd_adapt},
      {"circuit", "state-preparation circuit from an ansatz file (OpenQASM 3.0)", cmd_circuit},
      {"resources", "closed-form CNOT resources", cmd_resources},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> registered;
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    add_common(sc);
    registered.emplace_back(sc, &s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  Context ctx;
  const Sub* chosen = nullptr;
  for (const auto& [sc, s] : registered)
    if (sc->parsed()) chosen = s;
  try {
    ctx.cfg = load_config(config_path);
    if (!stepper.empty()) ctx.cfg.evolution.stepper = parse_stepper(stepper);
    ctx.out = out_dir.empty() ? fs::path(ctx.cfg.output_directory) : fs::path(out_dir);
    ctx.cache = cache_dir.empty() ? ctx.out / "cache" : fs::path(cache_dir);
    ctx.command = chosen->name;
    set_threads(threads);
    fs::create_directories(ctx.out);
    const int rc = chosen->run(ctx);
    ctx.finish();
    return rc;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const NotConverged& e) {
    std::fprintf(stderr, "numerical failure: %s (residual %.3e)\n", e.what(), e.residual);
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
}
