#pragma once
#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "heavyq/basis.hpp"
#include "heavyq/pauli.hpp"
#include "heavyq/state.hpp"

namespace hq {

// Diagonal of a Z-only Pauli sum evaluated on every basis state. Terms of
// weight <= 2 go through byte-chunk lookup tables (one table per chunk and per
// chunk pair); heavier Z-strings are evaluated directly.
std::vector<double> evaluate_diagonal(const std::vector<PauliTerm>& diag, const Basis& b);

// A Pauli sum bound to a basis for repeated application. The diagonal is
// tabulated per basis state; off-diagonal strings are grouped by flip mask and
// applied as a gather, so every output amplitude is written by one worker.
class CompiledOperator {
 public:
  CompiledOperator() = default;
  CompiledOperator(const PauliTermSum& op, std::shared_ptr<const Basis> basis, cplx scale = 1.0);

  const std::shared_ptr<const Basis>& basis() const { return basis_; }
  bool is_real() const { return real_; }
  const std::vector<double>& diagonal() const { return diag_; }

  // Replaces the diagonal part (the off-diagonal structure is kept); used for
  // Hamiltonians whose background charges move.
  void set_diagonal(const PauliTermSum& op);

  // out = O * in
  void apply(const std::vector<cplx>& in, std::vector<cplx>& out) const;
  void apply(const std::vector<double>& in, std::vector<double>& out) const;

  template <class T>
  BasicState<T> operator()(const BasicState<T>& psi) const {
    BasicState<T> out(basis_);
    apply(psi.amp, out.amp);
    return out;
  }

  // <psi|O|psi> (real part for Hermitian operators)
  template <class T>
  double expectation(const BasicState<T>& psi) const {
    std::vector<T> tmp(psi.dim());
    apply(psi.amp, tmp);
    return real_part(dot(psi.amp, tmp));
  }

 private:
  struct Group {
    std::uint64_t flip = 0;
    std::vector<std::uint64_t> zmask;
    std::vector<cplx> coef;
  };
  template <class T>
  void apply_impl(const std::vector<T>& in, std::vector<T>& out) const;

  std::shared_ptr<const Basis> basis_;
  cplx scale_ = 1.0;
  std::vector<double> diag_;
  std::vector<Group> groups_;
  bool real_ = true;
};

// Convenience: op * psi without keeping the compiled form.
StateVector apply_operator(const PauliTermSum& op, const StateVector& psi);

}  // namespace hq
