#include "heavyq/observables.hpp"

#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace hq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <std::size_t K>
struct Acc {
  std::array<cplx, K> v{};
  Acc& operator+=(const Acc& o) {
    for (std::size_t i = 0; i < K; ++i) v[i] += o.v[i];
    return *this;
  }
};

template <class M>
double entropy_bits(const M& rho) {
  constexpr int K = static_cast<int>(std::tuple_size_v<M>);
  Eigen::Matrix<cplx, K, K> r;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) r(i, j) = rho[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cplx, K, K>> es(r, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < K; ++i) {
    const double l = es.eigenvalues()[i];
    if (l > 1e-15) s -= l * std::log2(l);
  }
  return std::max(s, 0.0);
}

}  // namespace

template <class T>
std::vector<double> charge_density(const BasicState<T>& psi) {
  const Basis& B = *psi.basis;
  const int N = B.nqubits();
  // weight with bit k set, per site
  struct Occ {
    std::array<double, 64> w{};
    Occ& operator+=(const Occ& o) {
      for (int k = 0; k < 64; ++k) w[k] += o.w[k];
      return *this;
    }
  };
  const Occ occ = parallel_sum<Occ>(B.dim(), [&](std::size_t lo, std::size_t hi) {
    Occ a;
    for (std::size_t i = lo; i < hi; ++i) {
      const double p = std::norm(psi.amp[i]);
      if (p == 0.0) continue;
      for (std::uint64_t s = B.state(i); s; s &= s - 1) a.w[std::countr_zero(s)] += p;
    }
    return a;
  });
  const double total = norm(psi.amp);
  std::vector<double> q(N);
  for (int k = 0; k < N; ++k) {
    const double z = total * total - 2.0 * occ.w[k];  // <Z_k>
    q[k] = -0.5 * (z + ((k % 2 == 0) ? 1.0 : -1.0) * total * total);
  }
  return q;
}

template <class T>
double total_charge(const BasicState<T>& psi) {
  double s = 0.0;
  for (double q : charge_density(psi)) s += q;
  return s;
}

template <class T>
double chiral_condensate(const BasicState<T>& psi) {
  // [(-1)^j Z_j + 1]/2 = 1 - n_j on even sites and n_j on odd sites
  const auto q = charge_density(psi);
  const int N = psi.nqubits();
  double s = 0.0;
  for (int j = 0; j < N; ++j) s += (j % 2 == 0) ? -q[j] : q[j];
  return s / N;
}

template std::vector<double> charge_density(const BasicState<double>&);
template std::vector<double> charge_density(const BasicState<cplx>&);
template double total_charge(const BasicState<double>&);
template double total_charge(const BasicState<cplx>&);
template double chiral_condensate(const BasicState<double>&);
template double chiral_condensate(const BasicState<cplx>&);

Mat2 reduced_density(const StateVector& psi, int n) {
  const Basis& B = *psi.basis;
  if (n < 0 || n >= B.nqubits()) throw std::out_of_range("site out of range");
  const std::uint64_t mn = std::uint64_t{1} << n;
  const auto acc = parallel_sum<Acc<4>>(B.dim(), [&](std::size_t lo, std::size_t hi) {
    Acc<4> a;
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint64_t s = B.state(i);
      const int l = (s & mn) ? 1 : 0;
      a.v[l * 2 + l] += std::norm(psi.amp[i]);
      const std::uint64_t s2 = s ^ mn;
      if (B.contains(s2)) a.v[l * 2 + (1 - l)] += psi.amp[i] * std::conj(psi.amp[B.index(s2)]);
    }
    return a;
  });
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = acc.v[i * 2 + j];
  return r;
}

Mat4 reduced_density(const StateVector& psi, int n, int m) {
  const Basis& B = *psi.basis;
  if (n < 0 || m < 0 || n >= B.nqubits() || m >= B.nqubits() || n == m)
    throw std::out_of_range("bad site pair");
  const std::uint64_t mn = std::uint64_t{1} << n, mm = std::uint64_t{1} << m;
  const auto acc = parallel_sum<Acc<16>>(B.dim(), [&](std::size_t lo, std::size_t hi) {
    Acc<16> a;
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint64_t s = B.state(i);
      const cplx amp = psi.amp[i];
      if (amp == cplx(0)) continue;
      const int l = ((s & mn) ? 1 : 0) + ((s & mm) ? 2 : 0);
      const std::uint64_t rest = s & ~(mn | mm);
      for (int l2 = 0; l2 < 4; ++l2) {
        const std::uint64_t s2 = rest | ((l2 & 1) ? mn : 0) | ((l2 & 2) ? mm : 0);
        if (!B.contains(s2)) continue;
        a.v[l * 4 + l2] += amp * std::conj(psi.amp[B.index(s2)]);
      }
    }
    return a;
  });
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i][j] = acc.v[i * 4 + j];
  return r;
}

double von_neumann_entropy_bits(const Mat2& rho) { return entropy_bits(rho); }
double von_neumann_entropy_bits(const Mat4& rho) { return entropy_bits(rho); }

double single_site_entropy(const StateVector& psi, int n) {
  return entropy_bits(reduced_density(psi, n));
}

double two_site_entropy(const StateVector& psi, int n, int m) {
  return entropy_bits(reduced_density(psi, n, m));
}

double mutual_information(const StateVector& psi, int n, int m) {
  const double I = single_site_entropy(psi, n) + single_site_entropy(psi, m) - two_site_entropy(psi, n, m);
  return std::max(I, 0.0);
}

double n_tangle(const StateVector& psi, const std::vector<int>& sites) {
  const Basis& B = *psi.basis;
  std::uint64_t S = 0;
  for (int k : sites) {
    if (k < 0 || k >= B.nqubits()) throw std::out_of_range("site out of range");
    if (S >> k & 1) throw std::invalid_argument("repeated site in n-tangle");
    S |= std::uint64_t{1} << k;
  }
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx ph = ipow[sites.size() % 4];
  const cplx ov = parallel_sum<cplx>(B.dim(), [&](std::size_t lo, std::size_t hi) {
    cplx a = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint64_t s = B.state(i), src = s ^ S;
      if (!B.contains(src)) continue;
      const double sg = (std::popcount(src & S) & 1) ? -1.0 : 1.0;
      a += std::conj(psi.amp[i]) * sg * std::conj(psi.amp[B.index(src)]);
    }
    return a;
  });
  return std::norm(ph * ov);
}

std::vector<TangleEntry> tangle_table(const StateVector& psi, const std::vector<int>& ns) {
  std::vector<TangleEntry> out;
  const int N = psi.nqubits();
  for (int n : ns) {
    if (n < 2 || n > N) continue;
    for (int i1 = 0; i1 + n <= N; ++i1) {
      std::vector<int> sites(n);
      for (int k = 0; k < n; ++k) sites[k] = i1 + k;
      out.push_back({n, i1, i1 + 0.5 * (n - 1), n_tangle(psi, sites)});
    }
  }
  return out;
}

ObservableRecord measure(const StateVector& psi, const CompiledOperator& H, const ObservableToggles& tg) {
  ObservableRecord r;
  r.E = H.expectation(psi);
  r.norm = norm(psi.amp);
  r.density = charge_density(psi);
  r.q_tot = 0.0;
  for (double q : r.density) r.q_tot += q;
  const int N = psi.nqubits();
  if (tg.entropies || tg.mutual_information) {
    r.entropy.resize(N);
    for (int n = 0; n < N; ++n) r.entropy[n] = single_site_entropy(psi, n);
  }
  if (tg.mutual_information) {
    r.mutual_info.assign(N, std::vector<double>(N, 0.0));
    for (int n = 0; n < N; ++n)
      for (int m = n + 1; m < N; ++m) {
        const double I = std::max(0.0, r.entropy[n] + r.entropy[m] - two_site_entropy(psi, n, m));
        r.mutual_info[n][m] = r.mutual_info[m][n] = I;
      }
  }
  if (!tg.tangle_ns.empty()) r.tangles = tangle_table(psi, tg.tangle_ns);
  return r;
}

RunResult run_evolution(StateVector& psi, const LatticeConfig& c, const ChargeSchedule& s,
                        double t_end, const EvolutionOptions& opt, const ObservableToggles& tg) {
  RunResult out;
  out.series.v_max = s.moving ? s.moving->trajectory.v_max : 0.0;
  out.evolution = evolve(psi, c, s, t_end, opt,
                         [&](const EvolutionRecord& e, const StateVector& st, const CompiledOperator& H) {
                           ObservableRecord r = measure(st, H, tg);
                           r.step = e.step;
                           r.t = e.t;
                           r.x = e.x;
                           r.v = s.moving ? s.velocity(e.t) : 0.0;
                           out.series.records.push_back(std::move(r));
                         });
  return out;
}

std::vector<double> finite_difference(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("size mismatch");
  if (n < 3) throw std::invalid_argument("finite differences need >= 3 points");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == n ? i : i + 1;
    const double dx = x[b] - x[a];
    d[i] = std::abs(dx) < 1e-12 ? kNaN : (y[b] - y[a]) / dx;
  }
  return d;
}

std::vector<double> de_dx(const ObservableSeries& s) {
  std::vector<double> x, e;
  for (const auto& r : s.records) {
    x.push_back(r.x);
    e.push_back(r.E);
  }
  return finite_difference(x, e);
}

std::vector<double> symmetrized_de_dx(const ObservableSeries& s, double center,
                                      const std::vector<double>& xt) {
  const auto d = de_dx(s);
  auto interp = [&](double x) {
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      const double x0 = s.records[i].x, x1 = s.records[i + 1].x;
      if (x1 > x0 && x >= x0 && x <= x1) return d[i] + (d[i + 1] - d[i]) * (x - x0) / (x1 - x0);
    }
    return kNaN;
  };
  std::vector<double> out;
  for (double u : xt) out.push_back(0.5 * (interp(center + u) + interp(center - u)));
  return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  f.points = static_cast<int>(x.size());
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear fit needs >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("degenerate abscissa in linear fit");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

LinearFit lattice_averaged_de_dx(const ObservableSeries& s, double window) {
  std::vector<double> x, e;
  for (const auto& r : s.records)
    if (r.v >= s.v_max - window && std::isfinite(r.E)) {
      x.push_back(r.x);
      e.push_back(r.E);
    }
  if (x.size() < 3) throw std::invalid_argument("constant-velocity window shorter than 3 points");
  return linear_fit(x, e);
}

std::vector<double> delta_medium(const ObservableSeries& med, const ObservableSeries& vac) {
  if (med.size() != vac.size()) throw std::invalid_argument("series grids differ");
  for (std::size_t i = 0; i < med.size(); ++i)
    if (std::abs(med.records[i].t - vac.records[i].t) > 1e-12 ||
        !(std::abs(med.records[i].x - vac.records[i].x) <= 1e-12))
      throw std::invalid_argument("series grids differ");
  const auto a = de_dx(med), b = de_dx(vac);
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

std::vector<double> coherence_combination(const ObservableSeries& a, const ObservableSeries& b,
                                          const ObservableSeries& ab, const ObservableSeries& vac) {
  const auto da = delta_medium(a, vac), db = delta_medium(b, vac), dc = delta_medium(ab, vac);
  std::vector<double> out(da.size());
  for (std::size_t i = 0; i < da.size(); ++i) out[i] = dc[i] - da[i] - db[i];
  return out;
}

HadronMass heavy_hadron_mass(const LatticeConfig& c, const LanczosOptions& opt) {
  HadronMass h;
  h.E_vac = ground_state(build_hamiltonian(c, {}), c.L, 0, opt).E;
  BackgroundCharges q;
  q.add(c.L - 1, 1.0);
  h.E_charged = ground_state(build_hamiltonian(c, q), c.L, -1, opt).E;
  h.lambda_bar = h.E_charged - h.E_vac;
  return h;
}

namespace {
std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_series_csv(const std::string& path, const ObservableSeries& s) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  const int N = s.records.empty() ? 0 : static_cast<int>(s.records[0].density.size());
  const bool has_s = !s.records.empty() && !s.records[0].entropy.empty();
  f << "step,t,x,v,E,dE_dx";
  for (int k = 0; k < N; ++k) f << ",q_" << k;
  if (has_s)
    for (int k = 0; k < N; ++k) f << ",S_" << k;
  f << "\r\n";
  const auto d = s.size() >= 3 ? de_dx(s) : std::vector<double>(s.size(), kNaN);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& r = s.records[i];
    f << r.step << ',' << num(r.t) << ',' << num(r.x) << ',' << num(r.v) << ',' << num(r.E) << ','
      << num(d[i]);
    for (double q : r.density) f << ',' << num(q);
    if (has_s)
      for (double e : r.entropy) f << ',' << num(e);
    f << "\r\n";
  }
}

void write_tangles_csv(const std::string& path, const ObservableSeries& s) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "step,t,x,n,i1,center,tau\r\n";
  for (const auto& r : s.records)
    for (const auto& e : r.tangles)
      f << r.step << ',' << num(r.t) << ',' << num(r.x) << ',' << e.n << ',' << e.i1 << ','
        << num(e.center) << ',' << num(e.tau) << "\r\n";
}

}  // namespace hq
