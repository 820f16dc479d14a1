#include "heavyq/eigensolver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>

namespace hq {

GroundState ground_state(const CompiledOperator& H, const LanczosOptions& opt,
                         const RealState* guess) {
  if (!H.is_real()) throw std::invalid_argument("ground_state needs a real symmetric operator");
  const auto& basis = H.basis();
  const std::size_t n = basis->dim();
  GroundState out;
  out.psi = RealState(basis);
  if (n == 1) {
    out.psi.amp[0] = 1.0;
    out.E = H.diagonal()[0];
    return out;
  }
  const std::size_t by_memory = std::max<std::size_t>(4, opt.memory_budget / (8 * n));
  const int k = static_cast<int>(std::min<std::size_t>({std::size_t(opt.krylov_dim), by_memory, n}));

  std::vector<std::vector<double>> V(k + 1);
  std::vector<double> x(n), w(n);
  if (guess) {
    require_same_basis(*guess, out.psi);
    x = guess->amp;
  } else {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& e : x) e = u(rng);
  }
  normalize(x);

  double residual = 0.0;
  for (int cycle = 0; cycle < opt.max_restarts; ++cycle) {
    V[0] = x;
    std::vector<double> alpha, beta;
    int m = 0;
    for (int j = 0; j < k; ++j) {
      H.apply(V[j], w);
      ++out.matvecs;
      const double a = dot(V[j], w);
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) axpy(-dot(V[i], w), V[i], w);
      const double b = norm(w);
      m = j + 1;
      if (j + 1 == k || b < 1e-13 * std::max(1.0, std::abs(a))) {
        beta.push_back(b);
        break;
      }
      beta.push_back(b);
      V[j + 1] = w;
      scale(V[j + 1], 1.0 / b);
    }
    Eigen::VectorXd diag(m), off(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) diag[i] = alpha[i];
    for (int i = 0; i + 1 < m; ++i) off[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    const Eigen::VectorXd y = es.eigenvectors().col(0);

    std::fill(x.begin(), x.end(), 0.0);
    for (int i = 0; i < m; ++i) axpy(y[i], V[i], x);
    normalize(x);
    const double estimate = std::abs(beta[m - 1] * y[m - 1]);
    if (estimate < 0.5 * opt.tol || m < k) {
      H.apply(x, w);
      ++out.matvecs;
      out.E = dot(x, w);
      axpy(-out.E, x, w);
      residual = norm(w);
      if (residual < opt.tol) {
        out.psi.amp = x;
        out.residual = residual;
        return out;
      }
    } else {
      residual = estimate;
    }
  }
  throw NotConverged("Lanczos did not converge (residual " + std::to_string(residual) + ")",
                     residual);
}

GroundState ground_state(const PauliTermSum& h, int L, int q_tot, const LanczosOptions& opt) {
  return ground_state(CompiledOperator(h, Basis::charge_sector(L, q_tot)), opt);
}

}  // namespace hq
