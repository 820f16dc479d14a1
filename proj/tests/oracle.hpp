#pragma once
// Dense reference implementations, independent of the bitwise kernels.
#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "heavyq/pauli.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// 2x2 factor for one qubit.
inline Eigen::Matrix2cd pauli(char op) {
  Eigen::Matrix2cd m;
  const cplx i(0, 1);
  switch (op) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1;
  }
  return m;
}

// Kronecker product with qubit k as bit k of the row index.
inline Mat dense(const hq::PauliString& p, int n) {
  Mat m = Mat::Identity(1, 1);
  for (int k = n - 1; k >= 0; --k) {
    const auto f = pauli(p.op(k));
    Mat r(m.rows() * 2, m.cols() * 2);
    for (int a = 0; a < m.rows(); ++a)
      for (int b = 0; b < m.cols(); ++b) r.block<2, 2>(2 * a, 2 * b) = m(a, b) * f;
    m = r;
  }
  return m;
}

inline Mat dense(const hq::PauliTermSum& h, int n) {
  Mat m = Mat::Zero(1 << n, 1 << n);
  for (const auto& t : h.terms()) m += t.coef * dense(t.p, n);
  return m;
}

// Indices of full-space states with the given popcount.
inline std::vector<int> sector_states(int n, int pop) {
  std::vector<int> s;
  for (int i = 0; i < (1 << n); ++i)
    if (std::popcount(static_cast<unsigned>(i)) == pop) s.push_back(i);
  return s;
}

inline Mat restrict(const Mat& m, const std::vector<int>& idx) {
  Mat r(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) r(a, b) = m(idx[a], idx[b]);
  return r;
}

// exp(-i t H) for Hermitian H.
inline Mat expm_herm(const Mat& h, double t) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const auto& v = es.eigenvectors();
  Vec ph(v.cols());
  for (int k = 0; k < v.cols(); ++k) ph(k) = std::exp(cplx(0, -t * es.eigenvalues()(k)));
  return v * ph.asDiagonal() * v.adjoint();
}

// Kogut-Susskind Hamiltonian on N = 2L staggered sites built from fermion
// occupations: hopping (s+ s- + h.c.)/2, staggered mass m/2 [(-1)^k Z_k + 1],
// and the electric energy g^2/2 sum_j E_j^2 with E_j from Gauss's law (open
// boundary, E_{-1} = 0).
inline Mat schwinger(int L, double m, double g, const std::vector<double>& Qk) {
  const int N = 2 * L, D = 1 << N;
  Mat h = Mat::Zero(D, D);
  for (int s = 0; s < D; ++s) {
    double diag = 0.0, E = 0.0;
    for (int k = 0; k < N; ++k) {
      const int occ = (s >> k) & 1;           // Z_k = 1 - 2 occ
      const double z = 1.0 - 2.0 * occ;
      diag += 0.5 * m * (((k % 2) ? -1.0 : 1.0) * z + 1.0);
      const double q = -0.5 * (z + ((k % 2) ? -1.0 : 1.0));
      if (k < N - 1) {
        E += q + Qk[k];
        diag += 0.5 * g * g * E * E;
      }
    }
    h(s, s) += diag;
    for (int k = 0; k + 1 < N; ++k) {
      const int a = (s >> k) & 1, b = (s >> (k + 1)) & 1;
      if (a != b) h(s ^ (3 << k), s) += 0.5;
    }
  }
  return h;
}

}  // namespace oracle
