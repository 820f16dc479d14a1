#include "heavyq/scadapt.hpp"

#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <tuple>

#include "heavyq/hop.hpp"
#include "numerics.hpp"

namespace hq {

using json = nlohmann::json;

std::string to_string(PoolFamily f) {
  switch (f) {
    case PoolFamily::Charge: return "charge";
    case PoolFamily::Volume: return "volume";
    case PoolFamily::Surface0: return "surface0";
    case PoolFamily::Surface1: return "surface1";
  }
  return "?";
}

PoolFamily parse_family(const std::string& s) {
  if (s == "charge") return PoolFamily::Charge;
  if (s == "volume") return PoolFamily::Volume;
  if (s == "surface0") return PoolFamily::Surface0;
  if (s == "surface1") return PoolFamily::Surface1;
  throw ConfigError("unknown pool family '" + s + "'");
}

std::string PoolLabel::str() const {
  switch (family) {
    case PoolFamily::Charge: return "O_mh(" + std::to_string(n) + "," + std::to_string(d) + ")";
    case PoolFamily::Volume: return "O^V_mh(" + std::to_string(d) + ")";
    case PoolFamily::Surface0: return "O^S_mh(0," + std::to_string(d) + ")";
    case PoolFamily::Surface1: return "O^S_mh(1," + std::to_string(d) + ")";
  }
  return "?";
}

bool operator<(const PoolLabel& a, const PoolLabel& b) {
  return std::tie(a.family, a.n, a.d, a.site, a.charge_sign) <
         std::tie(b.family, b.n, b.d, b.site, b.charge_sign);
}

bool operator==(const PoolLabel& a, const PoolLabel& b) {
  return std::tie(a.family, a.n, a.d, a.site, a.charge_sign) ==
         std::tie(b.family, b.n, b.d, b.site, b.charge_sign);
}

PauliTermSum PoolOperator::pauli(int nq) const {
  PauliTermSum s(nq);
  for (const auto& t : terms) s.add(hop_generator(nq, t.a, t.b), t.coef);
  s.simplify();
  return s;
}

bool PoolOperator::commuting(int nq) const {
  const auto t = pauli(nq).terms();
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j)
      if (!t[i].p.commutes_with(t[j].p)) return false;
  return true;
}

PoolOperator volume_operator(int L, int d) {
  const int N = 2 * L;
  if (d < 1 || d % 2 == 0 || d > N - 3) throw std::invalid_argument("volume operator needs odd d <= 2L-3");
  PoolOperator o;
  o.label = {PoolFamily::Volume, 0, d};
  for (int n = 0; n + d <= N - 1; ++n) o.terms.push_back({n, n + d, n % 2 == 0 ? 1.0 : -1.0});
  return o;
}

PoolOperator surface_operator(int L, int which, int d) {
  const int N = 2 * L;
  PoolOperator o;
  if (which == 0) {
    if (d < 1 || d % 2 == 0 || d > N - 3) throw std::invalid_argument("surface-0 operator needs odd d <= 2L-3");
    o.label = {PoolFamily::Surface0, 0, d};
    o.terms = {{0, d, 0.5}, {N - 1 - d, N - 1, 0.5}};
  } else if (which == 1) {
    if (d < 1 || d % 2 == 0 || d > N - 5) throw std::invalid_argument("surface-1 operator needs odd d <= 2L-5");
    o.label = {PoolFamily::Surface1, 1, d};
    o.terms = {{1, d + 1, -0.5}, {N - 2 - d, N - 2, -0.5}};
  } else {
    throw std::invalid_argument("surface family must be 0 or 1");
  }
  return o;
}

std::vector<PoolOperator> build_pool_vacuum(int L) {
  if (L < 2) throw ConfigError("vacuum pool needs L >= 2");
  std::vector<PoolOperator> pool;
  for (int d = 1; d <= 2 * L - 3; d += 2) pool.push_back(volume_operator(L, d));
  for (int d = 1; d <= 2 * L - 3; d += 2) pool.push_back(surface_operator(L, 0, d));
  for (int d = 1; d <= 2 * L - 5; d += 2) pool.push_back(surface_operator(L, 1, d));
  return pool;
}

PoolOperator charge_operator(int L, int site, int sign, int n, int d) {
  const int N = 2 * L;
  if (sign != 1 && sign != -1) throw std::invalid_argument("charge sign must be +-1");
  if (d < 1) throw std::invalid_argument("charge operator needs d >= 1");
  PoolOperator o;
  o.label = {PoolFamily::Charge, n, d, site, sign};
  const int a = sign > 0 ? site - n : site + n - d;
  const double c = (sign > 0 || d % 2 == 0) ? 1.0 : -1.0;
  if (a < 0 || a + d >= N) throw std::out_of_range("charge operator leaves the lattice");
  o.terms = {{a, a + d, c}};
  return o;
}

std::vector<PoolOperator> build_pool_charge(int L, int site, int sign) {
  const int N = 2 * L;
  if (site < 0) site = sign > 0 ? L - 1 : L;
  if (site >= N) throw ConfigError("charge site out of range");
  std::vector<PoolOperator> pool;
  for (int n = -L + 1; n <= L - 1; ++n)
    for (int d = 1; d <= N - 1; ++d) {
      const int a = sign > 0 ? site - n : site + n - d;
      if (a < 0 || a + d >= N) continue;
      pool.push_back(charge_operator(L, site, sign, n, d));
    }
  return pool;
}

std::vector<PoolOperator> build_pool_charges(int L, const BackgroundCharges& q, double xi,
                                             std::vector<std::string>* warnings) {
  const int N = 2 * L;
  q.validate(N);
  std::vector<PoolOperator> pool;
  std::vector<std::pair<int, int>> seen;
  std::vector<int> sites;
  for (const auto& e : q.entries) {
    if (e.Q == 0.0) continue;
    sites.push_back(e.site);
    for (auto& op : build_pool_charge(L, e.site, e.Q > 0 ? 1 : -1)) {
      const std::pair<int, int> ab{op.terms[0].a, op.terms[0].b};
      if (std::find(seen.begin(), seen.end(), ab) != seen.end()) continue;
      seen.push_back(ab);
      pool.push_back(std::move(op));
    }
  }
  if (warnings && xi > 0.0) {
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (std::min(sites[i], N - 1 - sites[i]) < 2.0 * xi)
        warnings->push_back("charge at site " + std::to_string(sites[i]) + " is within 2 xi of a boundary");
      for (std::size_t j = i + 1; j < sites.size(); ++j)
        if (std::abs(sites[i] - sites[j]) < 2.0 * xi)
          warnings->push_back("charges at sites " + std::to_string(sites[i]) + " and " +
                              std::to_string(sites[j]) + " are within 2 xi of each other");
    }
  }
  return pool;
}

std::string to_string(ApplyMode m) {
  switch (m) {
    case ApplyMode::Exact: return "exact";
    case ApplyMode::Trotter: return "trotter";
    case ApplyMode::TrotterPrinted: return "trotter-printed";
  }
  return "?";
}

ApplyMode parse_apply_mode(const std::string& s) {
  if (s == "exact") return ApplyMode::Exact;
  if (s == "trotter") return ApplyMode::Trotter;
  if (s == "trotter-printed") return ApplyMode::TrotterPrinted;
  throw ConfigError("unknown application mode '" + s + "'");
}

namespace {

bool sites_disjoint(const std::vector<HopTerm>& t) {
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j)
      if (t[i].a == t[j].a || t[i].a == t[j].b || t[i].b == t[j].a || t[i].b == t[j].b) return false;
  return true;
}

// Upper bound on ||sum c_k A_k||: terms are packed greedily into site-disjoint
// groups, each of norm max |c| (disjoint bilinears commute).
double generator_norm_bound(const std::vector<HopTerm>& t) {
  std::vector<std::pair<std::uint64_t, double>> groups;
  for (const auto& h : t) {
    const std::uint64_t m = (std::uint64_t{1} << h.a) | (std::uint64_t{1} << h.b);
    bool placed = false;
    for (auto& g : groups)
      if (!(g.first & m)) {
        g.first |= m;
        g.second = std::max(g.second, std::abs(h.coef));
        placed = true;
        break;
      }
    if (!placed) groups.push_back({m, std::abs(h.coef)});
  }
  double s = 0.0;
  for (const auto& g : groups) s += g.second;
  return s;
}

// out = M in with M = -sum c_k A_k (so exp(theta M) = exp(i theta O)).
void apply_generator(const std::vector<HopTerm>& t, const RealState& in, RealState& out) {
  std::fill(out.amp.begin(), out.amp.end(), 0.0);
  for (const auto& h : t) add_hop_generator(in, out, h.a, h.b, -h.coef);
}

// psi <- exp(theta M) psi by scaled Taylor series.
void expm_generator(RealState& psi, const std::vector<HopTerm>& t, double theta) {
  const double bound = std::abs(theta) * generator_norm_bound(t);
  if (bound == 0.0) return;
  const int s = std::max(1, static_cast<int>(std::ceil(bound / 0.5)));
  const double tau = theta / s;
  RealState term(psi.basis), next(psi.basis);
  for (int k = 0; k < s; ++k) {
    term.amp = psi.amp;
    for (int j = 1; j <= 40; ++j) {
      apply_generator(t, term, next);
      scale(next.amp, tau / j);
      std::swap(term.amp, next.amp);
      axpy(1.0, term.amp, psi.amp);
      if (norm(term.amp) < 1e-17 * norm(psi.amp)) break;
    }
  }
}

std::vector<HopTerm> ordered_terms(const PoolOperator& op, ApplyMode mode) {
  std::vector<HopTerm> t = op.terms;
  if (mode == ApplyMode::Trotter)
    std::stable_partition(t.begin(), t.end(), [](const HopTerm& h) { return h.a % 2 == 0; });
  return t;
}

// Elementary exponentials of an ansatz in application order.
struct Unit {
  std::size_t k = 0;            // angle index
  std::vector<HopTerm> terms;   // one term: Givens rotation
};

std::vector<Unit> units_of(const Ansatz& a) {
  std::vector<Unit> u;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto& op = a[k].op;
    if (a[k].mode == ApplyMode::Exact && !(op.terms.size() > 1 && sites_disjoint(op.terms))) {
      u.push_back({k, op.terms});
    } else {
      for (const auto& h : ordered_terms(op, a[k].mode)) u.push_back({k, {h}});
    }
  }
  return u;
}

void apply_unit(RealState& psi, const Unit& u, double theta) {
  if (u.terms.size() == 1)
    apply_givens(psi, u.terms[0].a, u.terms[0].b, theta * u.terms[0].coef);
  else
    expm_generator(psi, u.terms, theta);
}

}  // namespace

void apply_element(RealState& psi, const PoolOperator& op, double theta, ApplyMode mode) {
  AnsatzElement e{op, theta, mode};
  for (const auto& u : units_of({e})) apply_unit(psi, u, theta);
}

void apply_ansatz(RealState& psi, const Ansatz& a) {
  for (const auto& u : units_of(a)) apply_unit(psi, u, a[u.k].theta);
}

RealState ansatz_state(const RealState& init, const Ansatz& a) {
  RealState psi = init;
  apply_ansatz(psi, a);
  return psi;
}

double gradient_from(const RealState& psi, const RealState& h_psi, const PoolOperator& op) {
  // i<[H, O]> = -2 <H psi, A psi> summed over terms
  double g = 0.0;
  for (const auto& h : op.terms) g += -2.0 * h.coef * hop_matrix_element(h_psi, psi, h.a, h.b);
  return g;
}

double gradient(const RealState& psi, const CompiledOperator& H, const PoolOperator& op) {
  return gradient_from(psi, H(psi), op);
}

double energy_and_gradient(const CompiledOperator& H, const RealState& init, const Ansatz& a,
                           std::vector<double>* grad) {
  const auto units = units_of(a);
  RealState phi = init;
  for (const auto& u : units) apply_unit(phi, u, a[u.k].theta);
  RealState lam = H(phi);
  const double E = dot(phi.amp, lam.amp);
  if (!grad) return E;
  grad->assign(a.size(), 0.0);
  RealState tmp(phi.basis);
  for (auto it = units.rbegin(); it != units.rend(); ++it) {
    const double th = a[it->k].theta;
    if (it->terms.size() == 1) {
      const auto& h = it->terms[0];
      (*grad)[it->k] += -2.0 * h.coef * hop_matrix_element(lam, phi, h.a, h.b);
    } else {
      apply_generator(it->terms, phi, tmp);
      (*grad)[it->k] += 2.0 * dot(lam.amp, tmp.amp);
    }
    if (it + 1 == units.rend()) break;
    apply_unit(phi, *it, -th);
    apply_unit(lam, *it, -th);
  }
  return E;
}

namespace {

struct OptContext {
  const CompiledOperator* H;
  const RealState* init;
  Ansatz* a;
  std::vector<double> g;
};

void load_angles(OptContext* c, const gsl_vector* x) {
  for (std::size_t k = 0; k < c->a->size(); ++k) (*c->a)[k].theta = gsl_vector_get(x, k);
}

double opt_f(const gsl_vector* x, void* p) {
  auto* c = static_cast<OptContext*>(p);
  load_angles(c, x);
  return energy_and_gradient(*c->H, *c->init, *c->a, nullptr);
}

void opt_fdf(const gsl_vector* x, void* p, double* f, gsl_vector* df) {
  auto* c = static_cast<OptContext*>(p);
  load_angles(c, x);
  *f = energy_and_gradient(*c->H, *c->init, *c->a, &c->g);
  for (std::size_t k = 0; k < c->g.size(); ++k) gsl_vector_set(df, k, c->g[k]);
}

void opt_df(const gsl_vector* x, void* p, gsl_vector* df) {
  double f;
  opt_fdf(x, p, &f, df);
}

}  // namespace

OptimizeResult optimize_angles(const CompiledOperator& H, const RealState& init, Ansatz& a,
                               const OptimizeOptions& opt) {
  gsl_quiet();
  OptimizeResult r;
  const std::size_t n = a.size();
  if (n == 0) {
    r.E = H.expectation(init);
    return r;
  }
  OptContext ctx{&H, &init, &a, {}};
  gsl_multimin_function_fdf fn{&opt_f, &opt_df, &opt_fdf, n, &ctx};
  gsl_vector* x = gsl_vector_alloc(n);
  for (std::size_t k = 0; k < n; ++k) gsl_vector_set(x, k, a[k].theta);
  gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);
  gsl_multimin_fdfminimizer_set(s, &fn, x, opt.initial_step, 0.1);
  int status = GSL_CONTINUE;
  int it = 0;
  auto gnorm = [&] { return gsl_blas_dnrm2(s->gradient); };
  while (gnorm() >= opt.gtol && it < opt.max_iterations) {
    ++it;
    status = gsl_multimin_fdfminimizer_iterate(s);
    if (status) break;
  }
  // Line searches can stall just above the threshold in floating point; a
  // restart from the current point clears the accumulated Hessian.
  for (int restart = 0; gnorm() >= opt.gtol && restart < 5 && it < opt.max_iterations; ++restart) {
    gsl_vector_memcpy(x, s->x);
    gsl_multimin_fdfminimizer_set(s, &fn, x, 1e-4, 0.1);
    while (gnorm() >= opt.gtol && it < opt.max_iterations) {
      ++it;
      if (gsl_multimin_fdfminimizer_iterate(s)) break;
    }
  }
  r.grad_norm = gnorm();
  r.iterations = it;
  for (std::size_t k = 0; k < n; ++k) a[k].theta = gsl_vector_get(s->x, k);
  r.E = s->f;
  gsl_multimin_fdfminimizer_free(s);
  gsl_vector_free(x);
  // Near the optimum, energy differences drop below round-off before the
  // gradient reaches gtol; finish with Newton steps on the analytic gradient
  // (Hessian from central differences of the gradient).
  for (int nt = 0; nt < 8 && r.grad_norm >= opt.gtol; ++nt) {
    std::vector<double> g0;
    energy_and_gradient(H, init, a, &g0);
    Eigen::MatrixXd hess(n, n);
    const double h = 1e-4;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> gp, gm;
      Ansatz ap = a, am = a;
      ap[j].theta += h;
      am[j].theta -= h;
      energy_and_gradient(H, init, ap, &gp);
      energy_and_gradient(H, init, am, &gm);
      for (std::size_t i = 0; i < n; ++i) hess(i, j) = (gp[i] - gm[i]) / (2 * h);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    Eigen::VectorXd gv = Eigen::Map<Eigen::VectorXd>(g0.data(), n);
    const Eigen::VectorXd step = hess.ldlt().solve(-gv);
    if (!step.allFinite()) break;
    Ansatz trial = a;
    for (std::size_t k = 0; k < n; ++k) trial[k].theta += step[k];
    std::vector<double> g1;
    const double E1 = energy_and_gradient(H, init, trial, &g1);
    const double n1 = Eigen::Map<Eigen::VectorXd>(g1.data(), n).norm();
    if (!(n1 < r.grad_norm)) break;
    a = std::move(trial);
    r.E = E1;
    r.grad_norm = n1;
    ++r.iterations;
  }
  if (!(r.grad_norm < std::max(opt.gtol, 1e-7))) {
    std::ostringstream msg;
    msg << "angle optimization did not converge after " << it << " iterations: |grad| = " << r.grad_norm
        << ", E = " << r.E << ", theta =";
    for (const auto& e : a) msg << ' ' << e.theta;
    throw OptimizerError(msg.str());
  }
  return r;
}

double infidelity_density(const RealState& ansatz, const RealState& exact, int L) {
  require_same_basis(ansatz, exact);
  return (1.0 - fidelity(ansatz, exact)) / L;
}

double energy_deviation(double E, double E_gs) {
  if (E_gs == 0.0) return E - E_gs;
  return (E_gs - E) / E_gs;
}

AdaptResult adapt_vqe(const CompiledOperator& H, const RealState& init,
                      const std::vector<PoolOperator>& pool, const AdaptOptions& opt,
                      const GroundState* exact) {
  AdaptResult res;
  const int L = init.L();
  auto metrics = [&](AdaptStepRecord& r, const RealState& psi) {
    if (!exact) return;
    r.delta_E = energy_deviation(r.E, exact->E);
    r.infidelity = infidelity_density(psi, exact->psi, L);
  };
  if (exact) res.E_gs = exact->E;
  {
    AdaptStepRecord r0;
    r0.E = H.expectation(init);
    metrics(r0, init);
    res.steps.push_back(r0);
  }
  for (int step = 1; step <= opt.max_steps; ++step) {
    const RealState psi = ansatz_state(init, res.ansatz);
    const RealState hpsi = H(psi);
    std::vector<double> g(pool.size());
    double best = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      g[i] = gradient_from(psi, hpsi, pool[i]);
      best = std::max(best, std::abs(g[i]));
    }
    if (best == 0.0 || (opt.gradient_threshold > 0.0 && best < opt.gradient_threshold)) break;
    std::size_t pick = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (std::abs(g[i]) < best * (1.0 - opt.tie_tolerance)) continue;
      if (pick == pool.size() || pool[i].label < pool[pick].label) pick = i;
    }
    res.ansatz.push_back({pool[pick], 0.0, opt.mode});
    const OptimizeResult o = optimize_angles(H, init, res.ansatz, opt.optimizer);
    AdaptStepRecord r;
    r.step = step;
    r.selected = pool[pick].label;
    r.gradient = g[pick];
    for (const auto& e : res.ansatz) r.theta.push_back(e.theta);
    r.E = o.E;
    r.iterations = o.iterations;
    r.grad_norm = o.grad_norm;
    metrics(r, ansatz_state(init, res.ansatz));
    res.steps.push_back(r);
  }
  return res;
}

int screening_sector(const BackgroundCharges& q) {
  const double t = q.total();
  if (std::abs(t - std::round(t)) > 1e-12) throw ConfigError("total heavy charge must be an integer");
  return -static_cast<int>(std::lround(t));
}

RealState prepare_init_with_charge(int L, const Ansatz& vacuum, const BackgroundCharges& q) {
  const int N = 2 * L;
  q.validate(N);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> flips;
  for (const auto& e : q.entries) {
    if (e.Q == 0.0) continue;
    if (std::abs(std::abs(e.Q) - 1.0) > 1e-12)
      throw ConfigError("state preparation supports unit heavy charges only");
    const bool odd = e.site % 2 == 1;
    if ((e.Q > 0) != odd)
      throw ConfigError("positive (negative) heavy charges must sit on odd (even) sites for state preparation");
    if (e.site - 1 < 0 || e.site + 1 >= N) throw ConfigError("heavy charge too close to the boundary");
    flips.push_back({std::uint64_t{1} << (e.site - 1), std::uint64_t{1} << (e.site + 1)});
  }
  auto basis = Basis::charge_sector(L, screening_sector(q));
  RealState psi(basis);
  const std::uint64_t vac = strong_coupling_vacuum(L);
  const double amp = std::pow(0.5, 0.5 * flips.size());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << flips.size()); ++mask) {
    std::uint64_t s = vac;
    for (std::size_t k = 0; k < flips.size(); ++k) s ^= (mask >> k & 1) ? flips[k].second : flips[k].first;
    if (!basis->contains(s)) throw ConfigError("overlapping heavy-charge neighbourhoods");
    psi.amp[basis->index(s)] += amp;
  }
  if (std::abs(norm(psi.amp) - 1.0) > 1e-12) throw ConfigError("overlapping heavy-charge neighbourhoods");
  apply_ansatz(psi, vacuum);
  return psi;
}

Ansatz mirror_ansatz(const Ansatz& a, int L) {
  const int N = 2 * L;
  Ansatz out;
  for (const auto& e : a) {
    if (e.op.label.family != PoolFamily::Charge) {
      out.push_back(e);
      continue;
    }
    const auto& l = e.op.label;
    out.push_back({charge_operator(L, N - 1 - l.site, -l.charge_sign, l.n, l.d), -e.theta, e.mode});
  }
  return out;
}

namespace {

struct FitPoint {
  double L, y;
};

// Least squares in (theta_inf, c') for fixed b with u = exp(-b (L - L0)).
struct FixedB {
  double t_inf, c, rss;
};

FixedB fit_fixed_b(const std::vector<FitPoint>& p, double b, double L0) {
  double su = 0, sy = 0, suu = 0, suy = 0;
  const double n = p.size();
  for (const auto& q : p) {
    const double u = std::exp(-b * (q.L - L0));
    su += u;
    sy += q.y;
    suu += u * u;
    suy += u * q.y;
  }
  const double det = n * suu - su * su;
  FixedB f{sy / n, 0.0, 0.0};
  if (std::abs(det) > 1e-300) {
    f.c = (n * suy - su * sy) / det;
    f.t_inf = (sy - f.c * su) / n;
  }
  for (const auto& q : p) {
    const double r = q.y - f.t_inf - f.c * std::exp(-b * (q.L - L0));
    f.rss += r * r;
  }
  return f;
}

struct BrentCtx {
  const std::vector<FitPoint>* p;
  double L0;
};

double brent_rss(double logb, void* v) {
  auto* c = static_cast<BrentCtx*>(v);
  return fit_fixed_b(*c->p, std::exp(logb), c->L0).rss;
}

}  // namespace

ExtrapolationFit extrapolate_parameters(const std::vector<double>& Ls, const std::vector<double>& th) {
  if (Ls.size() != th.size()) throw std::invalid_argument("size mismatch in extrapolation");
  if (Ls.size() < 3) throw std::invalid_argument("extrapolation needs >= 3 system sizes");
  gsl_quiet();
  std::vector<FitPoint> p;
  for (std::size_t i = 0; i < Ls.size(); ++i) p.push_back({Ls[i], th[i]});
  std::sort(p.begin(), p.end(), [](auto& a, auto& b) { return a.L < b.L; });
  ExtrapolationFit out;
  const double L0 = p.front().L;
  const double largest = p.back().y;
  double lo = th[0], hi = th[0];
  for (double y : th) lo = std::min(lo, y), hi = std::max(hi, y);
  if (hi - lo <= 1e-14 * std::max(1.0, std::abs(hi))) {
    out.theta_inf = largest;
    out.message = "constant series";
    return out;
  }
  // log b on a grid, then Brent refinement around the best grid point
  constexpr double kLo = -7.0, kHi = 2.5;
  constexpr int kGrid = 400;
  int best = 0;
  double best_rss = INFINITY;
  for (int i = 0; i <= kGrid; ++i) {
    const double lb = kLo + (kHi - kLo) * i / kGrid;
    const double r = fit_fixed_b(p, std::exp(lb), L0).rss;
    if (r < best_rss) best_rss = r, best = i;
  }
  double logb = kLo + (kHi - kLo) * best / kGrid;
  if (best > 0 && best < kGrid) {
    BrentCtx ctx{&p, L0};
    gsl_function F{&brent_rss, &ctx};
    gsl_min_fminimizer* m = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
    const double a = kLo + (kHi - kLo) * (best - 1) / kGrid, b = kLo + (kHi - kLo) * (best + 1) / kGrid;
    if (gsl_min_fminimizer_set(m, &F, logb, a, b) == GSL_SUCCESS) {
      for (int it = 0; it < 200; ++it) {
        if (gsl_min_fminimizer_iterate(m)) break;
        if (gsl_min_test_interval(gsl_min_fminimizer_x_lower(m), gsl_min_fminimizer_x_upper(m), 1e-12, 0.0) ==
            GSL_SUCCESS)
          break;
      }
      logb = gsl_min_fminimizer_x_minimum(m);
    }
    gsl_min_fminimizer_free(m);
  } else {
    out.degenerate = true;
    out.message = best == 0 ? "decay rate driven to zero (series without curvature)"
                            : "decay rate diverges (series flat beyond the first point)";
  }
  const double b = std::exp(logb);
  const FixedB f = fit_fixed_b(p, b, L0);
  out.b = b;
  out.c = f.c * std::exp(b * L0);
  out.rms_residual = std::sqrt(f.rss / p.size());
  if (out.degenerate || f.c * (largest - f.t_inf) < 0.0 || !std::isfinite(f.t_inf)) {
    if (!out.degenerate) out.message = "non-monotone series";
    out.degenerate = true;
    out.theta_inf = largest;
  } else {
    out.theta_inf = f.t_inf;
  }
  return out;
}

PoolOperator pool_operator(int L, const PoolLabel& l) {
  switch (l.family) {
    case PoolFamily::Charge: return charge_operator(L, l.site < 0 ? L - 1 : l.site, l.charge_sign ? l.charge_sign : 1, l.n, l.d);
    case PoolFamily::Volume: return volume_operator(L, l.d);
    case PoolFamily::Surface0: return surface_operator(L, 0, l.d);
    case PoolFamily::Surface1: return surface_operator(L, 1, l.d);
  }
  throw std::invalid_argument("bad pool label");
}

std::string ansatz_to_json(const Ansatz& a, int L) {
  json j;
  j["L"] = L;
  j["ansatz"] = json::array();
  for (const auto& e : a) {
    const auto& l = e.op.label;
    json x = {{"family", to_string(l.family)}, {"n", l.n},         {"d", l.d},
              {"theta", e.theta},             {"mode", to_string(e.mode)}};
    if (l.family == PoolFamily::Charge) {
      x["site"] = l.site;
      x["charge_sign"] = l.charge_sign;
    }
    j["ansatz"].push_back(x);
  }
  return j.dump(2);
}

Ansatz ansatz_from_json(const std::string& text, int* Lout) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("ansatz file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("L") || !j.contains("ansatz") || !j["ansatz"].is_array())
    throw ConfigError("ansatz file needs 'L' and an 'ansatz' list");
  const int L = j["L"].get<int>();
  Ansatz a;
  for (const auto& x : j["ansatz"]) {
    for (auto it = x.begin(); it != x.end(); ++it) {
      static const char* known[] = {"family", "n", "d", "theta", "mode", "site", "charge_sign"};
      if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known))
        throw ConfigError("ansatz file: unknown key '" + it.key() + "'");
    }
    PoolLabel l;
    l.family = parse_family(x.at("family").get<std::string>());
    l.n = x.value("n", 0);
    l.d = x.at("d").get<int>();
    l.site = x.value("site", -1);
    l.charge_sign = x.value("charge_sign", l.family == PoolFamily::Charge ? 1 : 0);
    a.push_back({pool_operator(L, l), x.at("theta").get<double>(),
                 parse_apply_mode(x.value("mode", std::string("exact")))});
  }
  if (Lout) *Lout = L;
  return a;
}

void save_ansatz(const std::string& path, const Ansatz& a, int L) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << ansatz_to_json(a, L) << '\n';
}

Ansatz load_ansatz(const std::string& path, int* L) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read ansatz file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ansatz_from_json(ss.str(), L);
}

}  // namespace hq
