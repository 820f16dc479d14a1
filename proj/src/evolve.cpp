#include "heavyq/evolve.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace hq {

KrylovStats krylov_expm(const CompiledOperator& H, StateVector& psi, double dt,
                        const KrylovOptions& opt) {
  if (!H.is_real()) throw std::invalid_argument("krylov_expm expects a real symmetric H");
  KrylovStats st;
  if (dt == 0.0) return st;
  const std::size_t n = psi.dim();
  const int mmax = static_cast<int>(std::min<std::size_t>(opt.max_dim, n));
  const double sgn = dt > 0 ? 1.0 : -1.0;
  double remaining = std::abs(dt);
  double tau = remaining;
  std::vector<std::vector<cplx>> V(mmax + 1);
  std::vector<cplx> w(n);
  const double nrm = norm(psi.amp);

  while (remaining > 0.0) {
    V[0] = psi.amp;
    scale(V[0], 1.0 / nrm);
    std::vector<double> alpha, beta;
    int m = 0;
    bool breakdown = false;
    for (int j = 0; j < mmax; ++j) {
      H.apply(V[j], w);
      ++st.matvecs;
      const double a = dot(V[j], w).real();
      axpy(cplx(-a), V[j], w);
      if (j > 0) axpy(cplx(-beta[j - 1]), V[j - 1], w);
      if (opt.full_reorthogonalization)
        for (int i = 0; i <= j; ++i) axpy(-dot(V[i], w), V[i], w);
      alpha.push_back(a);
      const double b = norm(w);
      beta.push_back(b);
      m = j + 1;
      if (b < 1e-13 * std::max(1.0, std::abs(a))) {
        breakdown = true;
        break;
      }
      if (j + 1 < mmax) {
        V[j + 1] = w;
        scale(V[j + 1], 1.0 / b);
      }
    }
    Eigen::VectorXd d(m), e(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) d[i] = alpha[i];
    for (int i = 0; i + 1 < m; ++i) e[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXd& Q = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();

    tau = std::min(tau, remaining);
    Eigen::VectorXcd c(m);
    double err = 0.0;
    for (int attempt = 0;; ++attempt) {
      Eigen::VectorXcd f(m);
      for (int i = 0; i < m; ++i) f[i] = std::exp(cplx(0, -sgn * tau * lam[i])) * Q(0, i);
      c = Q * f;
      err = breakdown ? 0.0 : beta[m - 1] * std::abs(c[m - 1]);
      if (err <= opt.tol * tau / std::abs(dt) || tau <= remaining * 1e-9) break;
      if (attempt > 60) throw NumericalError("Krylov exponential failed to reach tolerance");
      tau *= 0.5;
    }
    std::vector<cplx> out(n, cplx(0));
    for (int i = 0; i < m; ++i) axpy(nrm * c[i], V[i], out);
    psi.amp.swap(out);
    remaining -= tau;
    if (remaining < 1e-15 * std::abs(dt)) remaining = 0.0;
    st.error_estimate += err;
    ++st.substeps;
  }
  return st;
}

void apply_bond_exp(StateVector& psi, int j, double tau) {
  const Basis& B = *psi.basis;
  const std::uint64_t ma = std::uint64_t{1} << j, mb = std::uint64_t{2} << j;
  const double c = std::cos(0.5 * tau);
  const cplx is(0, -std::sin(0.5 * tau));
  cplx* v = psi.amp.data();
  parallel_for(B.dim(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint64_t s = B.state(i);
      if ((s & ma) || !(s & mb)) continue;
      const std::size_t k = B.index(s ^ ma ^ mb);
      const cplx x = v[i], y = v[k];
      v[i] = c * x + is * y;
      v[k] = is * x + c * y;
    }
  });
}

void apply_diagonal_exp(StateVector& psi, const std::vector<double>& d, double tau) {
  parallel_for(psi.dim(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) psi.amp[i] *= std::exp(cplx(0, -tau * d[i]));
  });
}

void trotter2_step(StateVector& psi, const CompiledOperator& H, double dt) {
  const int N = psi.nqubits();
  apply_diagonal_exp(psi, H.diagonal(), 0.5 * dt);
  for (int j = 0; j + 1 < N; j += 2) apply_bond_exp(psi, j, 0.5 * dt);
  for (int j = 1; j + 1 < N; j += 2) apply_bond_exp(psi, j, dt);
  for (int j = 0; j + 1 < N; j += 2) apply_bond_exp(psi, j, 0.5 * dt);
  apply_diagonal_exp(psi, H.diagonal(), 0.5 * dt);
}

std::string to_string(Stepper s) { return s == Stepper::Krylov ? "krylov" : "trotter2"; }

Stepper parse_stepper(const std::string& s) {
  if (s == "krylov" || s == "krylov-exact") return Stepper::Krylov;
  if (s == "trotter2") return Stepper::Trotter2;
  throw ConfigError("unknown stepper '" + s + "'");
}

ChargeSampling parse_sampling(const std::string& s) {
  if (s == "start") return ChargeSampling::Start;
  if (s == "midpoint") return ChargeSampling::Midpoint;
  if (s == "end") return ChargeSampling::End;
  throw ConfigError("unknown charge sampling '" + s + "'");
}

BackgroundCharges ChargeSchedule::at(double t, int n_sites) const {
  BackgroundCharges q = static_charges;
  if (moving) {
    const auto k = eval_trajectory(moving->trajectory, std::max(t, 0.0));
    const auto p = partition_charge(k.x, moving->Q, n_sites);
    q.add(p.site_lo, p.q_lo);
    q.add(p.site_hi, p.q_hi);
  }
  return q;
}

double ChargeSchedule::position(double t) const {
  return moving ? eval_trajectory(moving->trajectory, std::max(t, 0.0)).x
                : std::numeric_limits<double>::quiet_NaN();
}

double ChargeSchedule::velocity(double t) const {
  return moving ? eval_trajectory(moving->trajectory, std::max(t, 0.0)).v
                : std::numeric_limits<double>::quiet_NaN();
}

double ChargeSchedule::total() const {
  return static_charges.total() + (moving ? moving->Q : 0.0);
}

PauliTermSum hamiltonian_at(const LatticeConfig& c, const ChargeSchedule& s, double t,
                            int lambda_bar, int q_tot) {
  const BackgroundCharges q = s.at(t, c.N());
  return lambda_bar < 0 ? build_hamiltonian(c, q) : truncate_interaction(c, q, lambda_bar, q_tot);
}

std::vector<EvolutionRecord> evolve(StateVector& psi, const LatticeConfig& c,
                                    const ChargeSchedule& schedule, double t_end,
                                    const EvolutionOptions& opt, const StepObserver& observe) {
  c.validate();
  if (psi.nqubits() != c.N()) throw std::invalid_argument("state does not match the lattice");
  if (psi.basis->is_full() && opt.lambda_bar >= 0)
    throw std::invalid_argument("truncated interaction needs a fixed-charge basis");
  double dt = opt.dt;
  if (dt <= 0.0) {
    if (!schedule.moving) throw ConfigError("dt required without a moving charge");
    dt = step_schedule(schedule.moving->trajectory.v_max);
  }
  const int q_tot = psi.basis->is_full() ? 0 : psi.basis->q_tot();
  const int nsteps = static_cast<int>(std::ceil(t_end / dt - 1e-9));

  CompiledOperator H(hamiltonian_at(c, schedule, 0.0, opt.lambda_bar, q_tot), psi.basis);
  CompiledOperator Hm = H;  // H at measurement times
  std::vector<EvolutionRecord> records;
  EvolutionRecord rec{0, 0.0, schedule.position(0.0), dt, opt.stepper, opt.lambda_bar, 0.0, 0};
  records.push_back(rec);
  if (observe) observe(rec, psi, Hm);

  for (int j = 1; j <= nsteps; ++j) {
    const double t0 = (j - 1) * dt;
    double ts = t0 + 0.5 * dt;
    if (opt.sampling == ChargeSampling::Start) ts = t0;
    if (opt.sampling == ChargeSampling::End) ts = t0 + dt;
    if (schedule.moving) H.set_diagonal(hamiltonian_at(c, schedule, ts, opt.lambda_bar, q_tot));
    rec = EvolutionRecord{j, j * dt, schedule.position(j * dt), dt, opt.stepper, opt.lambda_bar, ts, 0};
    if (opt.stepper == Stepper::Krylov)
      rec.matvecs = krylov_expm(H, psi, dt, opt.krylov).matvecs;
    else
      trotter2_step(psi, H, dt);
    const double nrm = norm(psi.amp);
    if (std::abs(nrm - 1.0) > opt.norm_tol)
      throw NumericalError("norm drift " + std::to_string(nrm - 1.0) + " at step " +
                           std::to_string(j));
    records.push_back(rec);
    if (observe) {
      if (schedule.moving)
        Hm.set_diagonal(hamiltonian_at(c, schedule, rec.t, opt.lambda_bar, q_tot));
      observe(rec, psi, Hm);
    }
  }
  return records;
}

void save_checkpoint(const std::string& path, const StateVector& psi, const CheckpointHeader& h) {
  nlohmann::json j{{"L", h.L}, {"t", h.t}, {"config_hash", h.config_hash},
                   {"dim", psi.dim()}, {"nqubits", psi.nqubits()}};
  j["q_tot"] = h.q_tot ? nlohmann::json(*h.q_tot) : nlohmann::json(nullptr);
  const std::string head = j.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint " + path);
  const std::uint64_t len = head.size();
  f.write("HQCK", 4);
  f.write(reinterpret_cast<const char*>(&len), sizeof len);
  f.write(head.data(), static_cast<std::streamsize>(len));
  f.write(reinterpret_cast<const char*>(psi.amp.data()),
          static_cast<std::streamsize>(psi.dim() * sizeof(cplx)));
}

StateVector load_checkpoint(const std::string& path, CheckpointHeader* out) {
  std::ifstream f(path, std::ios::binary);
  char magic[4];
  std::uint64_t len = 0;
  if (!f.read(magic, 4) || std::memcmp(magic, "HQCK", 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  f.read(reinterpret_cast<char*>(&len), sizeof len);
  std::string head(len, '\0');
  f.read(head.data(), static_cast<std::streamsize>(len));
  const auto j = nlohmann::json::parse(head);
  CheckpointHeader h;
  h.L = j.at("L");
  h.t = j.at("t");
  h.config_hash = j.at("config_hash");
  if (!j.at("q_tot").is_null()) h.q_tot = j.at("q_tot").get<int>();
  auto basis = h.q_tot ? Basis::charge_sector(h.L, *h.q_tot) : Basis::full(2 * h.L);
  if (basis->dim() != j.at("dim").get<std::size_t>())
    throw std::runtime_error("checkpoint dimension mismatch");
  StateVector psi(basis);
  f.read(reinterpret_cast<char*>(psi.amp.data()),
         static_cast<std::streamsize>(psi.dim() * sizeof(cplx)));
  if (!f) throw std::runtime_error("truncated checkpoint " + path);
  if (out) *out = h;
  return psi;
}

}  // namespace hq
