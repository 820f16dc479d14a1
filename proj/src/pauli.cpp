#include "heavyq/pauli.hpp"

#include <bit>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hq {

PauliString PauliString::single(int q, char op) {
  if (q < 0 || q >= 64) throw std::out_of_range("qubit index out of range");
  const std::uint64_t b = std::uint64_t{1} << q;
  switch (op) {
    case 'I': return {};
    case 'X': return {b, 0};
    case 'Y': return {b, b};
    case 'Z': return {0, b};
  }
  throw std::invalid_argument(std::string("unknown Pauli letter ") + op);
}

PauliString PauliString::parse(const std::string& label) {
  PauliString p;
  std::istringstream in(label);
  std::string tok;
  while (in >> tok) {
    if (tok.size() < 2) throw std::invalid_argument("bad Pauli token '" + tok + "'");
    const int q = std::stoi(tok.substr(1));
    const PauliString s = single(q, tok[0]);
    if ((p.x | p.z) & (s.x | s.z)) throw std::invalid_argument("repeated qubit in '" + label + "'");
    p.x |= s.x;
    p.z |= s.z;
  }
  return p;
}

int PauliString::n_y() const { return std::popcount(x & z); }
int PauliString::weight() const { return std::popcount(x | z); }

char PauliString::op(int q) const {
  const bool bx = (x >> q) & 1, bz = (z >> q) & 1;
  return bx ? (bz ? 'Y' : 'X') : (bz ? 'Z' : 'I');
}

std::string PauliString::label() const {
  std::string out;
  for (int q = 0; q < 64; ++q) {
    const char c = op(q);
    if (c == 'I') continue;
    if (!out.empty()) out += ' ';
    out += c + std::to_string(q);
  }
  return out.empty() ? "I" : out;
}

bool PauliString::commutes_with(const PauliString& o) const {
  return (std::popcount(x & o.z) + std::popcount(z & o.x)) % 2 == 0;
}

std::pair<std::complex<double>, PauliString> multiply(const PauliString& a,
                                                      const PauliString& b) {
  // Per-qubit products: XY = iZ, YZ = iX, ZX = iY and reversed with -i.
  int ipow = 0;
  for (std::uint64_t m = (a.x | a.z) & (b.x | b.z); m; m &= m - 1) {
    const int q = std::countr_zero(m);
    const char pa = a.op(q), pb = b.op(q);
    if (pa == pb) continue;
    const bool cyclic = (pa == 'X' && pb == 'Y') || (pa == 'Y' && pb == 'Z') ||
                        (pa == 'Z' && pb == 'X');
    ipow += cyclic ? 1 : 3;
  }
  static const std::complex<double> ph[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return {ph[ipow % 4], PauliString{a.x ^ b.x, a.z ^ b.z}};
}

void PauliTermSum::add(double coef, const PauliString& p) {
  (p.is_diagonal() ? diag_ : offdiag_).push_back({coef, p});
}

void PauliTermSum::add(const PauliTermSum& o, double scale) {
  nqubits_ = std::max(nqubits_, o.nqubits_);
  for (const auto& t : o.diag_) diag_.push_back({t.coef * scale, t.p});
  for (const auto& t : o.offdiag_) offdiag_.push_back({t.coef * scale, t.p});
}

namespace {
void merge(std::vector<PauliTerm>& v, double tol) {
  std::map<PauliString, double> acc;
  std::vector<PauliString> order;
  for (const auto& t : v) {
    auto [it, fresh] = acc.try_emplace(t.p, 0.0);
    if (fresh) order.push_back(t.p);
    it->second += t.coef;
  }
  v.clear();
  for (const auto& p : order)
    if (std::abs(acc[p]) > tol) v.push_back({acc[p], p});
}
}  // namespace

void PauliTermSum::simplify(double tol) {
  merge(diag_, tol);
  merge(offdiag_, tol);
}

double PauliTermSum::identity_coef() const { return coef_of(PauliString{}); }

double PauliTermSum::coef_of(const PauliString& p) const {
  double c = 0.0;
  for (const auto& t : p.is_diagonal() ? diag_ : offdiag_)
    if (t.p == p) c += t.coef;
  return c;
}

std::vector<PauliTerm> PauliTermSum::terms() const {
  std::vector<PauliTerm> all = diag_;
  all.insert(all.end(), offdiag_.begin(), offdiag_.end());
  return all;
}

std::string PauliTermSum::str() const {
  std::ostringstream os;
  for (const auto& t : terms()) os << t.coef << " * " << t.p.label() << "\n";
  return os.str();
}

void ComplexPauliSum::simplify(double tol) {
  std::map<PauliString, std::complex<double>> acc;
  for (const auto& [c, p] : terms) acc[p] += c;
  terms.clear();
  for (const auto& [p, c] : acc)
    if (std::abs(c) > tol) terms.emplace_back(c, p);
}

ComplexPauliSum product(const PauliTermSum& a, const PauliTermSum& b) {
  ComplexPauliSum out{std::max(a.nqubits(), b.nqubits()), {}};
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) {
      auto [ph, p] = multiply(ta.p, tb.p);
      out.terms.emplace_back(ph * ta.coef * tb.coef, p);
    }
  out.simplify();
  return out;
}

ComplexPauliSum commutator(const PauliTermSum& a, const PauliTermSum& b) {
  ComplexPauliSum out{std::max(a.nqubits(), b.nqubits()), {}};
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) {
      if (ta.p.commutes_with(tb.p)) continue;
      auto [ph, p] = multiply(ta.p, tb.p);
      out.terms.emplace_back(2.0 * ph * ta.coef * tb.coef, p);
    }
  out.simplify();
  return out;
}

}  // namespace hq
