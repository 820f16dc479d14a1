#include "heavyq/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>

namespace hq {

std::string gate_name(GateKind k) {
  switch (k) {
    case GateKind::H: return "h";
    case GateKind::X: return "x";
    case GateKind::S: return "s";
    case GateKind::Sdg: return "sdg";
    case GateKind::RX: return "rx";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::CNOT: return "cx";
    case GateKind::RXYPlus: return "r_xy_p";
    case GateKind::RXYMinus: return "r_xy_m";
  }
  return "?";
}

void Circuit::add(GateKind k, int q, double theta) {
  if (q < 0 || q >= nqubits) throw std::out_of_range("gate qubit out of range");
  gates.push_back({k, q, -1, theta});
}

void Circuit::add2(GateKind k, int q0, int q1, double theta) {
  if (q0 < 0 || q1 < 0 || q0 >= nqubits || q1 >= nqubits || q0 == q1)
    throw std::out_of_range("gate qubits out of range");
  if ((k == GateKind::RXYPlus || k == GateKind::RXYMinus) && q1 != q0 + 1)
    throw std::invalid_argument("R^{XY} acts on adjacent qubits (a, a+1)");
  gates.push_back({k, q0, q1, theta});
}

void Circuit::append(const Circuit& o) {
  if (o.nqubits != nqubits) throw std::invalid_argument("qubit count mismatch");
  gates.insert(gates.end(), o.gates.begin(), o.gates.end());
}

Circuit expand_composites(const Circuit& c) {
  Circuit out(c.nqubits);
  for (const auto& g : c.gates) {
    if (g.kind != GateKind::RXYPlus && g.kind != GateKind::RXYMinus) {
      out.gates.push_back(g);
      continue;
    }
    const double tb = g.kind == GateKind::RXYPlus ? g.theta : -g.theta;
    out.add(GateKind::H, g.q0);
    out.add2(GateKind::CNOT, g.q0, g.q1);
    out.add(GateKind::RY, g.q0, -g.theta);
    out.add(GateKind::RY, g.q1, tb);
    out.add2(GateKind::CNOT, g.q0, g.q1);
    out.add(GateKind::H, g.q0);
  }
  return out;
}

int cnot_count(const Circuit& c) {
  int n = 0;
  for (const auto& g : c.gates) {
    if (g.kind == GateKind::CNOT) n += 1;
    if (g.kind == GateKind::RXYPlus || g.kind == GateKind::RXYMinus) n += 2;
  }
  return n;
}

int cnot_depth(const Circuit& c) {
  std::vector<int> level(c.nqubits, 0);
  int depth = 0;
  for (const auto& g : c.gates) {
    if (!g.two_qubit()) continue;
    const int span = g.kind == GateKind::CNOT ? 1 : 2;
    const int l = std::max(level[g.q0], level[g.q1]) + span;
    level[g.q0] = level[g.q1] = l;
    depth = std::max(depth, l);
  }
  return depth;
}

Circuit cancel_adjacent_cnots(const Circuit& c) {
  std::vector<Gate> out;
  std::vector<int> last(c.nqubits, -1);  // index into out of the last live gate per qubit
  std::vector<bool> live;
  for (const auto& g : c.gates) {
    if (g.kind == GateKind::CNOT) {
      const int i = last[g.q0];
      if (i >= 0 && i == last[g.q1] && live[i] && out[i].kind == GateKind::CNOT && out[i].q0 == g.q0 &&
          out[i].q1 == g.q1) {
        live[i] = false;
        // restore the previous live gate on both qubits
        for (int q : {g.q0, g.q1}) {
          int j = i - 1;
          while (j >= 0 && !(live[j] && (out[j].q0 == q || out[j].q1 == q))) --j;
          last[q] = j;
        }
        continue;
      }
    }
    out.push_back(g);
    live.push_back(true);
    last[g.q0] = static_cast<int>(out.size()) - 1;
    if (g.two_qubit()) last[g.q1] = static_cast<int>(out.size()) - 1;
  }
  Circuit r(c.nqubits);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (live[i]) r.gates.push_back(out[i]);
  return r;
}

namespace {

using C = std::complex<double>;
using Mat2c = std::array<std::array<C, 2>, 2>;

Mat2c single_matrix(const Gate& g) {
  const double h = 1.0 / std::sqrt(2.0);
  const double c = std::cos(g.theta / 2), s = std::sin(g.theta / 2);
  const C I(0, 1);
  switch (g.kind) {
    case GateKind::H: return {{{h, h}, {h, -h}}};
    case GateKind::X: return {{{0, 1}, {1, 0}}};
    case GateKind::S: return {{{1, 0}, {0, I}}};
    case GateKind::Sdg: return {{{1, 0}, {0, -I}}};
    case GateKind::RX: return {{{c, -I * s}, {-I * s, c}}};
    case GateKind::RY: return {{{c, -s}, {s, c}}};
    case GateKind::RZ: return {{{std::exp(-I * (g.theta / 2)), 0}, {0, std::exp(I * (g.theta / 2))}}};
    default: break;
  }
  throw std::logic_error("not a single-qubit gate");
}

void apply_single(StateVector& psi, int q, const Mat2c& m) {
  const std::uint64_t mq = std::uint64_t{1} << q;
  C* v = psi.amp.data();
  parallel_for(psi.dim(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      if (i & mq) continue;
      const C a = v[i], b = v[i | mq];
      v[i] = m[0][0] * a + m[0][1] * b;
      v[i | mq] = m[1][0] * a + m[1][1] * b;
    }
  });
}

void apply_cnot(StateVector& psi, int c, int t) {
  const std::uint64_t mc = std::uint64_t{1} << c, mt = std::uint64_t{1} << t;
  C* v = psi.amp.data();
  parallel_for(psi.dim(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      if ((i & mc) && !(i & mt)) std::swap(v[i], v[i | mt]);
  });
}

}  // namespace

void apply_circuit(StateVector& psi, const Circuit& c) {
  if (!psi.basis->is_full() || psi.nqubits() != c.nqubits)
    throw std::invalid_argument("circuit simulation needs a full-space state of matching size");
  for (const auto& g : expand_composites(c).gates) {
    if (g.kind == GateKind::CNOT)
      apply_cnot(psi, g.q0, g.q1);
    else
      apply_single(psi, g.q0, single_matrix(g));
  }
}

StateVector simulate_circuit(const Circuit& c) {
  if (c.nqubits > 24) throw std::invalid_argument("circuit simulation limited to 24 qubits");
  if (c.nqubits < 1) throw std::invalid_argument("empty register");
  StateVector psi = StateVector::basis_state(Basis::full(c.nqubits), 0);
  apply_circuit(psi, c);
  return psi;
}

Mat4c givens_block(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat4c u{};
  u[0][0] = u[3][3] = 1.0;
  // index 2 = |0_q 1_{q+1}>, index 1 = |1_q 0_{q+1}>
  u[2][2] = c;
  u[1][2] = s;
  u[2][1] = -s;
  u[1][1] = c;
  return u;
}

Mat4c fswap_block() {
  Mat4c u{};
  u[0][0] = 1.0;
  u[1][2] = u[2][1] = 1.0;
  u[3][3] = -1.0;
  return u;
}

Mat4c block_product(const Mat4c& a, const Mat4c& b) {
  Mat4c r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

namespace {

bool proportional_to(const Mat4c& u, const Mat4c& v, double tol = 1e-11) {
  C ph = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) ph += std::conj(v[i][j]) * u[i][j];
  return std::abs(std::abs(ph) - 4.0) < tol * 4;
}

Mat4c identity4() {
  Mat4c u{};
  for (int i = 0; i < 4; ++i) u[i][i] = 1.0;
  return u;
}

}  // namespace

Circuit lower_block(const Mat4c& u, int q, int nq) {
  constexpr double tol = 1e-10;
  for (int i : {0, 3})
    for (int j = 0; j < 4; ++j)
      if (j != i && (std::abs(u[i][j]) > tol || std::abs(u[j][i]) > tol))
        throw std::invalid_argument("block does not conserve particle number");
  const C p00 = u[0][0], p11 = u[3][3];
  // W on (index 1, index 2)
  const C w11 = u[1][1], w12 = u[1][2], w21 = u[2][1], w22 = u[2][2];
  if (std::abs(p00 * p11 - (w11 * w22 - w12 * w21)) > 1e-9)
    throw std::invalid_argument("block needs three CNOTs (p00 p11 != det W)");
  const double phi = 0.5 * std::arg(p00 * p11);
  const C e = std::exp(C(0, -phi));
  // W' = e^{-i phi} W in SU(2) = Rz(f1) Ry(f2) Rz(f3)
  const C a = w11 * e, b = w21 * e;
  const double f2 = 2.0 * std::atan2(std::abs(b), std::abs(a));
  double sum = std::abs(a) > 1e-14 ? -2.0 * std::arg(a) : 0.0;   // f1 + f3
  double diff = std::abs(b) > 1e-14 ? 2.0 * std::arg(b) : 0.0;   // f1 - f3
  const double f1 = 0.5 * (sum + diff), f3 = 0.5 * (sum - diff);
  const double s = -2.0 * std::arg(p00 * e);
  // Rz(-delta) on the pair from RZ_q(alpha) RZ_{q+1}(beta) with delta = alpha - beta;
  // R-^{XY}(theta) acts as Ry(-2 theta).
  const double theta = -0.5 * f2, d2 = -f1, d1 = -f3;
  const double a1 = 0.5 * (s + d1), b1 = 0.5 * (s - d1), a2 = 0.5 * d2, b2 = -0.5 * d2;
  Circuit c(nq);
  auto rz = [&](int qq, double t) {
    const double r = std::remainder(t, 4.0 * M_PI);
    if (std::abs(r) > 1e-13) c.add(GateKind::RZ, qq, r);
  };
  rz(q, a1);
  rz(q + 1, b1);
  if (std::abs(std::remainder(theta, 2.0 * M_PI)) > 1e-13) c.add2(GateKind::RXYMinus, q, q + 1, theta);
  rz(q, a2);
  rz(q + 1, b2);
  return c;
}

Mat4c circuit_matrix(const Circuit& c, int q) {
  Mat4c m{};
  for (int col = 0; col < 4; ++col) {
    Circuit local(2);
    for (const auto& g : c.gates) {
      Gate h = g;
      h.q0 -= q;
      if (h.two_qubit()) h.q1 -= q;
      if (h.q0 < 0 || h.q0 > 1 || (h.two_qubit() && (h.q1 < 0 || h.q1 > 1)))
        throw std::invalid_argument("gate outside the qubit pair");
      local.gates.push_back(h);
    }
    StateVector psi = StateVector::basis_state(Basis::full(2), col);
    apply_circuit(psi, local);
    for (int r = 0; r < 4; ++r) m[r][col] = psi.amp[r];
  }
  return m;
}

namespace {

// Block-level circuit: two-qubit number-conserving blocks on adjacent pairs
// plus ordinary gates. Blocks on the same pair with nothing in between are
// multiplied together; products proportional to the identity vanish.
class BlockBuilder {
 public:
  struct Op {
    bool block = false;
    int q = 0;  // block on (q, q+1)
    Mat4c u{};
    Gate g{};
    bool live = true;
  };

  BlockBuilder(int n, bool merge) : n_(n), merge_(merge) {}

  void gate(const Gate& g) { ops_.push_back({false, 0, {}, g, true}); }

  void block(int q, const Mat4c& u) {
    if (q < 0 || q + 1 >= n_) throw std::out_of_range("block outside the register");
    if (merge_) {
      const int k = last_touching(q, q + 1);
      if (k >= 0 && ops_[k].block && ops_[k].q == q) {
        ops_[k].u = block_product(u, ops_[k].u);
        if (proportional_to(ops_[k].u, identity4())) ops_[k].live = false;
        return;
      }
    }
    ops_.push_back({true, q, u, {}, true});
  }

  // Pure fSWAP as the last operation on both of its qubits.
  bool trailing_fswap(int q) const {
    const int k = last_touching(q, q + 1);
    return k >= 0 && ops_[k].block && ops_[k].q == q && proportional_to(ops_[k].u, fswap_block());
  }

  Circuit lower(bool peephole) const {
    Circuit c(n_);
    for (const auto& o : ops_) {
      if (!o.live) continue;
      if (o.block)
        c.append(lower_block(o.u, o.q, n_));
      else
        c.gates.push_back(o.g);
    }
    return peephole ? cancel_adjacent_cnots(c) : c;
  }

 private:
  int last_touching(int a, int b) const {
    for (int k = static_cast<int>(ops_.size()) - 1; k >= 0; --k) {
      const auto& o = ops_[k];
      if (!o.live) continue;
      if (o.block) {
        if (o.q == a || o.q == b || o.q + 1 == a || o.q + 1 == b) return k;
      } else if (o.g.q0 == a || o.g.q0 == b || o.g.q1 == a || o.g.q1 == b) {
        return k;
      }
    }
    return -1;
  }

  int n_;
  bool merge_;
  std::vector<Op> ops_;
};

// Trotterized exp(i theta O) for one vacuum element.
void emit_vacuum_element(BlockBuilder& bb, const AnsatzElement& e) {
  std::vector<HopTerm> t = e.op.terms;
  const bool disjoint = [&] {
    std::set<int> s;
    for (const auto& h : t)
      if (!s.insert(h.a).second || !s.insert(h.b).second) return false;
    return true;
  }();
  if (e.mode == ApplyMode::Exact && t.size() > 1 && !disjoint)
    throw ConfigError("circuit synthesis needs Trotterized vacuum elements");
  if (e.mode == ApplyMode::Trotter)
    std::stable_partition(t.begin(), t.end(), [](const HopTerm& h) { return h.a % 2 == 0; });
  std::size_t i = 0;
  while (i < t.size()) {
    // maximal run of site-disjoint distance-3 hops with equal start parity
    std::size_t j = i;
    std::set<int> used;
    while (j < t.size() && t[j].b - t[j].a == 3 && t[j].a % 2 == t[i].a % 2 && !used.count(t[j].a) &&
           !used.count(t[j].b) && !used.count(t[j].a + 1) && !used.count(t[j].a + 2)) {
      for (int k = t[j].a; k <= t[j].b; ++k) used.insert(k);
      ++j;
    }
    if (t[i].b - t[i].a == 3 && j > i) {
      std::set<int> pairs;
      for (std::size_t k = i; k < j; ++k) {
        pairs.insert(t[k].a);
        pairs.insert(t[k].a + 2);
      }
      for (int p : pairs) bb.block(p, fswap_block());
      for (std::size_t k = i; k < j; ++k) bb.block(t[k].a + 1, givens_block(e.theta * t[k].coef));
      for (int p : pairs) bb.block(p, fswap_block());
      i = j;
      continue;
    }
    const auto& h = t[i];
    for (int p = h.a; p + 1 < h.b; ++p) bb.block(p, fswap_block());
    bb.block(h.b - 1, givens_block(e.theta * h.coef));
    for (int p = h.b - 2; p >= h.a; --p) bb.block(p, fswap_block());
    ++i;
  }
}

struct ChargeHop {
  int x, y;  // modes, x < y
  double angle;
};

// Cheapest fSWAP-network schedule (2 CNOTs per two-qubit block) realizing the
// layered hops on window [lo, lo + W) and restoring the mode order. Pairs in
// `free_pairs` may start swapped at no cost (they cancel a preceding fSWAP).
struct Move {
  enum Kind { Start, Fswap, Hop, HopFswap } kind;
  int i = 0;    // window position of the pair
  int op = -1;  // hop index within its layer
};

std::vector<Move> plan_charge_block(int lo, int W, const std::vector<std::vector<ChargeHop>>& layers,
                                    const std::vector<int>& free_pairs) {
  using Perm = std::vector<int>;
  struct State {
    Perm perm;
    int layer;
    int done;
    auto key() const { return std::tie(perm, layer, done); }
    bool operator<(const State& o) const { return key() < o.key(); }
  };
  struct Node {
    State s;
    int parent;
    Move mv;
  };
  Perm ident(W);
  for (int k = 0; k < W; ++k) ident[k] = lo + k;
  const int nl = static_cast<int>(layers.size());
  std::vector<Node> nodes;
  std::map<State, int> best;
  using QE = std::tuple<int, int, int>;  // cost, tie counter, node
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  int counter = 0;
  const int nf = static_cast<int>(free_pairs.size());
  for (int mask = 0; mask < (1 << nf); ++mask) {
    Perm p = ident;
    int k = 0;
    for (int b = 0; b < nf; ++b)
      if (mask >> b & 1) {
        std::swap(p[free_pairs[b] - lo], p[free_pairs[b] - lo + 1]);
        ++k;
      }
    nodes.push_back({{p, 0, 0}, -1, {Move::Start, mask, -1}});
    pq.push({2 * (nf - k), counter++, static_cast<int>(nodes.size()) - 1});
  }
  auto advance = [&](State s, int op) {
    s.done |= 1 << op;
    if (s.done == (1 << layers[s.layer].size()) - 1) {
      ++s.layer;
      s.done = 0;
    }
    return s;
  };
  while (!pq.empty()) {
    auto [cost, tie, id] = pq.top();
    (void)tie;
    pq.pop();
    const State s = nodes[id].s;
    auto it = best.find(s);
    if (it != best.end()) continue;
    best[s] = cost;
    if (s.layer == nl && s.perm == ident) {
      std::vector<Move> path;
      for (int k = id; k >= 0; k = nodes[k].parent) path.push_back(nodes[k].mv);
      std::reverse(path.begin(), path.end());
      return path;
    }
    auto push = [&](const State& ns, Move mv) {
      if (best.count(ns)) return;
      nodes.push_back({ns, id, mv});
      pq.push({cost + 2, counter++, static_cast<int>(nodes.size()) - 1});
    };
    for (int i = 0; i + 1 < W; ++i) {
      State ns = s;
      std::swap(ns.perm[i], ns.perm[i + 1]);
      push(ns, {Move::Fswap, i, -1});
    }
    if (s.layer < nl) {
      const auto& L = layers[s.layer];
      for (int j = 0; j < static_cast<int>(L.size()); ++j) {
        if (s.done >> j & 1) continue;
        for (int i = 0; i + 1 < W; ++i) {
          const int u = s.perm[i], v = s.perm[i + 1];
          if (!((u == L[j].x && v == L[j].y) || (u == L[j].y && v == L[j].x))) continue;
          push(advance(s, j), {Move::Hop, i, j});
          State ns = advance(s, j);
          std::swap(ns.perm[i], ns.perm[i + 1]);
          push(ns, {Move::HopFswap, i, j});
        }
      }
    }
  }
  throw std::logic_error("no fSWAP schedule found");
}

void emit_charge_block(BlockBuilder& bb, int lo, int W, const std::vector<std::vector<ChargeHop>>& layers,
                       const std::vector<int>& free_pairs) {
  const auto plan = plan_charge_block(lo, W, layers, free_pairs);
  std::vector<int> perm(W);
  for (int k = 0; k < W; ++k) perm[k] = lo + k;
  int layer = 0, done = 0;
  for (const auto& mv : plan) {
    if (mv.kind == Move::Start) {
      for (int b = 0; b < static_cast<int>(free_pairs.size()); ++b)
        if (mv.i >> b & 1) {
          bb.block(free_pairs[b], fswap_block());
          std::swap(perm[free_pairs[b] - lo], perm[free_pairs[b] - lo + 1]);
        }
      continue;
    }
    if (mv.kind == Move::Hop || mv.kind == Move::HopFswap) {
      const ChargeHop& h = layers[layer][mv.op];
      const double sgn = perm[mv.i] == h.x ? 1.0 : -1.0;
      bb.block(lo + mv.i, givens_block(sgn * h.angle));
      done |= 1 << mv.op;
      if (done == (1 << layers[layer].size()) - 1) {
        ++layer;
        done = 0;
      }
    }
    if (mv.kind == Move::Fswap || mv.kind == Move::HopFswap) {
      bb.block(lo + mv.i, fswap_block());
      std::swap(perm[mv.i], perm[mv.i + 1]);
    }
  }
}

}  // namespace

Circuit synthesize_state_prep(int L, const BackgroundCharges& charges, const Ansatz& vacuum,
                              const Ansatz& charge_ansatz, const SynthesisOptions& opt,
                              SynthesisReport* report) {
  const int N = 2 * L;
  charges.validate(N);
  if (N > 64) throw ConfigError("register too large");
  SynthesisReport rep;
  // Prototype charge for the charge-pool elements.
  int proto_sign = 0;
  for (const auto& e : charge_ansatz) {
    if (e.op.label.family != PoolFamily::Charge) throw ConfigError("charge block accepts charge-pool elements only");
    const int s = e.op.label.charge_sign ? e.op.label.charge_sign : 1;
    if (proto_sign && s != proto_sign) throw ConfigError("charge ansatz mixes charge signs");
    proto_sign = s;
  }
  for (const auto& e : vacuum)
    if (e.op.label.family == PoolFamily::Charge) throw ConfigError("vacuum block accepts volume/surface elements only");

  struct Site {
    int c, sign;
    int lo, hi;
    std::vector<AnsatzElement> elems;
  };
  std::vector<Site> sites;
  for (const auto& q : charges.entries) {
    if (q.Q == 0.0) continue;
    if (std::abs(std::abs(q.Q) - 1.0) > 1e-12) throw ConfigError("state preparation supports unit heavy charges only");
    Site s{q.site, q.Q > 0 ? 1 : -1, q.site - 1, q.site + 1, {}};
    if ((s.sign > 0) != (s.c % 2 == 1))
      throw ConfigError("positive (negative) heavy charges must sit on odd (even) sites");
    if (s.lo < 0 || s.hi >= N) throw ConfigError("heavy charge too close to the boundary");
    for (const auto& e : charge_ansatz) {
      const auto& l = e.op.label;
      PoolOperator op;
      try {
        op = charge_operator(L, s.c, s.sign, l.n, l.d);
      } catch (const std::out_of_range&) {
        throw ConfigError("charge block around site " + std::to_string(s.c) + " leaves the lattice");
      }
      s.elems.push_back({op, s.sign == proto_sign ? e.theta : -e.theta, ApplyMode::Exact});
      s.lo = std::min(s.lo, op.terms[0].a);
      s.hi = std::max(s.hi, op.terms[0].b);
    }
    sites.push_back(std::move(s));
  }
  std::sort(sites.begin(), sites.end(), [](auto& a, auto& b) { return a.c < b.c; });
  for (std::size_t i = 1; i < sites.size(); ++i)
    if (sites[i].lo <= sites[i - 1].hi)
      throw ConfigError("overlapping charge neighbourhoods (sites " + std::to_string(sites[i - 1].c) + " and " +
                        std::to_string(sites[i].c) + ")");

  BlockBuilder bb(N, opt.peephole);
  // |Omega_0>_Q: vacuum X gates off the charge triples, then per charge
  // H_a CX(a,m) CX(m,b) CX(a,m) X_b (+ X_m for negative charges).
  const std::uint64_t vac = strong_coupling_vacuum(L);
  std::vector<bool> in_triple(N, false);
  for (const auto& s : sites)
    for (int k = s.c - 1; k <= s.c + 1; ++k) in_triple[k] = true;
  for (int k = 0; k < N; ++k)
    if (!in_triple[k] && (vac >> k & 1)) bb.gate({GateKind::X, k, -1, 0.0});
  for (const auto& s : sites) {
    const int a = s.c - 1, m = s.c, b = s.c + 1;
    bb.gate({GateKind::H, a, -1, 0.0});
    bb.gate({GateKind::CNOT, a, m, 0.0});
    bb.gate({GateKind::CNOT, m, b, 0.0});
    bb.gate({GateKind::CNOT, a, m, 0.0});
    bb.gate({GateKind::X, b, -1, 0.0});
    if (s.sign < 0) bb.gate({GateKind::X, m, -1, 0.0});
  }
  rep.prep_cnots = cnot_count(bb.lower(opt.peephole));
  for (const auto& e : vacuum) emit_vacuum_element(bb, e);
  int running = cnot_count(bb.lower(opt.peephole));
  rep.vacuum_cnots = running - rep.prep_cnots;
  for (const auto& s : sites) {
    // layers of consecutive site-disjoint hops
    std::vector<std::vector<ChargeHop>> layers;
    std::set<int> used;
    for (const auto& e : s.elems) {
      const auto& h = e.op.terms[0];
      if (layers.empty() || used.count(h.a) || used.count(h.b)) {
        layers.emplace_back();
        used.clear();
      }
      layers.back().push_back({h.a, h.b, e.theta * h.coef});
      used.insert(h.a);
      used.insert(h.b);
    }
    if (layers.empty()) {
      rep.charge_block_cnots.push_back(0);
      continue;
    }
    std::vector<int> free_pairs;
    if (opt.reuse_vacuum_tail)
      for (int p = s.lo; p + 1 <= s.hi; ++p)
        if (bb.trailing_fswap(p) && (free_pairs.empty() || free_pairs.back() + 1 < p)) free_pairs.push_back(p);
    emit_charge_block(bb, s.lo, s.hi - s.lo + 1, layers, free_pairs);
    const int now = cnot_count(bb.lower(opt.peephole));
    rep.charge_block_cnots.push_back(now - running);
    running = now;
  }
  if (report) *report = rep;
  return bb.lower(opt.peephole);
}

ResourceReport state_prep_formula(int L, int n_charges) {
  ResourceReport r;
  r.kind = "state-prep";
  r.formula_count = 16 * L - 12 + 25 * n_charges;
  r.formula_depth = 35;
  r.scaling = "O(L) CNOTs, O(1) depth";
  return r;
}

ResourceReport measure_resources(const Circuit& c, int L, int n_charges) {
  ResourceReport r = state_prep_formula(L, n_charges);
  r.cnot_count = cnot_count(c);
  r.cnot_depth = cnot_depth(c);
  return r;
}

ResourceReport cnot_cost_trotter_step(int L, int lb) {
  if (L < 2) throw ConfigError("L must be >= 2");
  if (lb < 0 || 2 * lb > L) throw ConfigError("lambda_bar must satisfy 0 <= 2 lambda_bar <= L");
  ResourceReport r;
  r.kind = "trotter-step";
  r.formula_count = 4 * (2 * L - 1) + (2 * L - 4 * lb) * (lb + 1) * (2 * lb + 1) - (L - 2 * lb + 2);
  r.cnot_count = r.formula_count;
  r.scaling = "O(L xi^2) CNOTs, O(xi^2) depth";
  return r;
}

}  // namespace hq
