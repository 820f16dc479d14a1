#include "heavyq/operator.hpp"

#include <bit>
#include <map>
#include <stdexcept>

namespace hq {

StateVector to_complex(const RealState& r) {
  StateVector c(r.basis);
  for (std::size_t i = 0; i < r.dim(); ++i) c.amp[i] = r.amp[i];
  return c;
}

StateVector change_basis(const StateVector& psi, std::shared_ptr<const Basis> target,
                         double tol) {
  if (psi.nqubits() != target->nqubits()) throw std::invalid_argument("qubit count mismatch");
  StateVector out(target);
  double lost = 0.0;
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    const std::uint64_t s = psi.basis->state(i);
    if (target->contains(s))
      out.amp[target->index(s)] = psi.amp[i];
    else
      lost += std::norm(psi.amp[i]);
  }
  if (lost > tol) throw std::invalid_argument("state has weight outside the target basis");
  return out;
}

namespace {

constexpr int kChunkBits = 8;
constexpr int kChunkSize = 1 << kChunkBits;

double z_sign(std::uint64_t s, std::uint64_t z) { return (std::popcount(s & z) & 1) ? -1.0 : 1.0; }

}  // namespace

std::vector<double> evaluate_diagonal(const std::vector<PauliTerm>& diag, const Basis& b) {
  const int n = b.nqubits();
  const int nch = (n + kChunkBits - 1) / kChunkBits;
  double constant = 0.0;
  // single[u]: terms supported inside chunk u; pair[u*nch+v]: across u < v.
  std::vector<std::vector<double>> single(nch), pair(nch * nch);
  std::vector<PauliTerm> heavy;
  auto chunk_of = [](int q) { return q / kChunkBits; };
  for (const auto& t : diag) {
    if (!t.p.is_diagonal()) throw std::invalid_argument("off-diagonal term in diagonal part");
    if (t.p.z >> n) throw std::invalid_argument("term acts outside the basis qubits");
    const int w = t.p.weight();
    if (w == 0) {
      constant += t.coef;
      continue;
    }
    if (w > 2) {
      heavy.push_back(t);
      continue;
    }
    const int q0 = std::countr_zero(t.p.z);
    const int q1 = w == 2 ? 63 - std::countl_zero(t.p.z) : q0;
    const int u = chunk_of(q0), v = chunk_of(q1);
    if (u == v) {
      auto& tab = single[u];
      if (tab.empty()) tab.assign(kChunkSize, 0.0);
      const std::uint64_t zl = t.p.z >> (u * kChunkBits);
      for (int a = 0; a < kChunkSize; ++a) tab[a] += t.coef * z_sign(a, zl);
    } else {
      auto& tab = pair[u * nch + v];
      if (tab.empty()) tab.assign(kChunkSize * kChunkSize, 0.0);
      const int du = q0 - u * kChunkBits, dv = q1 - v * kChunkBits;
      for (int a = 0; a < kChunkSize; ++a)
        for (int c = 0; c < kChunkSize; ++c) {
          const double s = (((a >> du) ^ (c >> dv)) & 1) ? -1.0 : 1.0;
          tab[a * kChunkSize + c] += t.coef * s;
        }
    }
  }
  struct PairRef {
    int u, v;
    const double* tab;
  };
  std::vector<PairRef> pairs;
  for (int u = 0; u < nch; ++u)
    for (int v = u + 1; v < nch; ++v)
      if (!pair[u * nch + v].empty()) pairs.push_back({u, v, pair[u * nch + v].data()});

  std::vector<double> out(b.dim());
  parallel_for(b.dim(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint64_t s = b.state(i);
      double d = constant;
      for (int u = 0; u < nch; ++u)
        if (!single[u].empty()) d += single[u][(s >> (u * kChunkBits)) & (kChunkSize - 1)];
      for (const auto& p : pairs)
        d += p.tab[((s >> (p.u * kChunkBits)) & (kChunkSize - 1)) * kChunkSize +
                   ((s >> (p.v * kChunkBits)) & (kChunkSize - 1))];
      for (const auto& t : heavy) d += t.coef * z_sign(s, t.p.z);
      out[i] = d;
    }
  });
  return out;
}

CompiledOperator::CompiledOperator(const PauliTermSum& op, std::shared_ptr<const Basis> basis,
                                   cplx scale)
    : basis_(std::move(basis)), scale_(scale) {
  if (op.nqubits() > basis_->nqubits())
    throw std::invalid_argument("operator acts on more qubits than the basis");
  set_diagonal(op);
  std::map<std::uint64_t, std::size_t> where;
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (const auto& t : op.offdiagonal()) {
    if ((t.p.x | t.p.z) >> basis_->nqubits())
      throw std::invalid_argument("term acts outside the basis qubits");
    auto [it, fresh] = where.try_emplace(t.p.x, groups_.size());
    if (fresh) groups_.push_back({t.p.x, {}, {}});
    Group& g = groups_[it->second];
    const cplx c = scale_ * t.coef * ipow[t.p.n_y() % 4];
    g.zmask.push_back(t.p.z);
    g.coef.push_back(c);
    if (std::abs(c.imag()) > 1e-15 * std::max(1.0, std::abs(c))) real_ = false;
  }
}

void CompiledOperator::set_diagonal(const PauliTermSum& op) {
  if (!op.diagonal().empty() && scale_.imag() != 0.0)
    throw std::invalid_argument("complex scale with a diagonal part");
  diag_ = evaluate_diagonal(op.diagonal(), *basis_);
  if (scale_.real() != 1.0)
    for (auto& d : diag_) d *= scale_.real();
}

template <class T>
void CompiledOperator::apply_impl(const std::vector<T>& in, std::vector<T>& out) const {
  const Basis& b = *basis_;
  if (in.size() != b.dim()) throw std::invalid_argument("dimension mismatch");
  out.resize(b.dim());
  if (&in == &out) throw std::invalid_argument("in-place application not supported");
  parallel_for(b.dim(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint64_t s = b.state(i);
      T acc = diag_[i] * in[i];
      for (const auto& g : groups_) {
        const std::uint64_t src = s ^ g.flip;
        if (!b.contains(src)) continue;
        T c{};
        for (std::size_t t = 0; t < g.coef.size(); ++t) {
          const double sg = z_sign(src, g.zmask[t]);
          if constexpr (std::is_same_v<T, double>)
            c += sg * g.coef[t].real();
          else
            c += sg * g.coef[t];
        }
        if (c != T{}) acc += c * in[b.index(src)];
      }
      out[i] = acc;
    }
  });
}

void CompiledOperator::apply(const std::vector<cplx>& in, std::vector<cplx>& out) const {
  apply_impl(in, out);
}

void CompiledOperator::apply(const std::vector<double>& in, std::vector<double>& out) const {
  if (!real_) throw std::invalid_argument("operator has complex matrix elements");
  apply_impl(in, out);
}

StateVector apply_operator(const PauliTermSum& op, const StateVector& psi) {
  return CompiledOperator(op, psi.basis)(psi);
}

}  // namespace hq
