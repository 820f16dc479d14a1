#pragma once
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "heavyq/basis.hpp"
#include "heavyq/parallel.hpp"

namespace hq {

using cplx = std::complex<double>;

inline double conj_if(double x) { return x; }
inline cplx conj_if(cplx x) { return std::conj(x); }
inline double real_part(double x) { return x; }
inline double real_part(cplx x) { return x.real(); }

template <class T>
struct BasicState {
  std::shared_ptr<const Basis> basis;
  std::vector<T> amp;

  BasicState() = default;
  explicit BasicState(std::shared_ptr<const Basis> b) : basis(std::move(b)), amp(basis->dim()) {}

  static BasicState basis_state(std::shared_ptr<const Basis> b, std::uint64_t s) {
    if (!b->contains(s)) throw std::invalid_argument("basis state outside the basis");
    BasicState psi(b);
    psi.amp[b->index(s)] = T(1);
    return psi;
  }

  std::size_t dim() const { return amp.size(); }
  int nqubits() const { return basis->nqubits(); }
  int L() const { return basis->nqubits() / 2; }
  T& operator[](std::size_t i) { return amp[i]; }
  const T& operator[](std::size_t i) const { return amp[i]; }
};

using StateVector = BasicState<cplx>;
using RealState = BasicState<double>;

// <a|b> (conjugating a), deterministic in the worker count.
template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  return parallel_sum<T>(a.size(), [&](std::size_t lo, std::size_t hi) {
    T s{};
    for (std::size_t i = lo; i < hi; ++i) s += conj_if(a[i]) * b[i];
    return s;
  });
}

template <class T>
double norm(const std::vector<T>& a) {
  return std::sqrt(parallel_sum<double>(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::norm(a[i]);
    return s;
  }));
}

template <class T, class S>
void scale(std::vector<T>& a, S f) {
  parallel_for(a.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) a[i] *= f;
  });
}

// y += f * x
template <class T, class S>
void axpy(S f, const std::vector<T>& x, std::vector<T>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dimension mismatch");
  parallel_for(x.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) y[i] += f * x[i];
  });
}

template <class T>
double normalize(std::vector<T>& a) {
  const double n = norm(a);
  if (n == 0.0) throw std::runtime_error("cannot normalize the zero vector");
  scale(a, 1.0 / n);
  return n;
}

template <class T>
void require_same_basis(const BasicState<T>& a, const BasicState<T>& b) {
  if (!a.basis || !b.basis || a.basis->dim() != b.basis->dim() ||
      a.basis->nqubits() != b.basis->nqubits() || a.basis->popcount() != b.basis->popcount())
    throw std::invalid_argument("states live in different bases");
}

template <class T>
double fidelity(const BasicState<T>& a, const BasicState<T>& b) {
  require_same_basis(a, b);
  return std::norm(dot(a.amp, b.amp));
}

StateVector to_complex(const RealState& r);

// Re-expresses a state in another basis of the same qubit count; amplitudes
// outside the target basis must vanish.
StateVector change_basis(const StateVector& psi, std::shared_ptr<const Basis> target,
                         double tol = 1e-12);

}  // namespace hq
