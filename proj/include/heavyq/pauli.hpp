#pragma once
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace hq {

// Pauli string in symplectic form: bit k of x (z) set means an X (Z) factor on
// qubit k; both set means Y. Acting on a basis state s:
//   P|s> = i^{|x&z|} (-1)^{popcount(s&z)} |s ^ x>.
struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  static PauliString single(int q, char op);
  // Parses "X0 Z1 Y2" style labels (empty string = identity).
  static PauliString parse(const std::string& label);

  bool is_diagonal() const { return x == 0; }
  bool is_identity() const { return x == 0 && z == 0; }
  int n_y() const;
  int weight() const;
  char op(int q) const;
  std::string label() const;

  bool commutes_with(const PauliString& o) const;
  bool operator==(const PauliString&) const = default;
  auto operator<=>(const PauliString&) const = default;
};

// Product a*b = phase * c with phase in {1, i, -1, -i}.
std::pair<std::complex<double>, PauliString> multiply(const PauliString& a,
                                                      const PauliString& b);

struct PauliTerm {
  double coef = 0.0;
  PauliString p;
};

// Real-weighted sum of Pauli strings. Diagonal (identity/Z-only) and
// off-diagonal terms are stored separately.
class PauliTermSum {
 public:
  PauliTermSum() = default;
  explicit PauliTermSum(int nqubits) : nqubits_(nqubits) {}

  int nqubits() const { return nqubits_; }
  void add(double coef, const PauliString& p);
  void add(const PauliTermSum& o, double scale = 1.0);

  // Merges equal strings and drops |coef| <= tol.
  void simplify(double tol = 1e-14);

  const std::vector<PauliTerm>& diagonal() const { return diag_; }
  const std::vector<PauliTerm>& offdiagonal() const { return offdiag_; }
  std::size_t size() const { return diag_.size() + offdiag_.size(); }
  double identity_coef() const;
  double coef_of(const PauliString& p) const;

  std::vector<PauliTerm> terms() const;
  std::string str() const;

 private:
  int nqubits_ = 0;
  std::vector<PauliTerm> diag_;
  std::vector<PauliTerm> offdiag_;
};

// Weighted sum with complex coefficients; arises from products and
// commutators of real sums (e.g. i[H, O]).
struct ComplexPauliSum {
  int nqubits = 0;
  std::vector<std::pair<std::complex<double>, PauliString>> terms;
  void simplify(double tol = 1e-14);
};

ComplexPauliSum product(const PauliTermSum& a, const PauliTermSum& b);
// [a, b] = ab - ba.
ComplexPauliSum commutator(const PauliTermSum& a, const PauliTermSum& b);

}  // namespace hq
