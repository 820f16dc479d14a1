#pragma once
#include <array>
#include <complex>
#include <string>
#include <vector>

#include "heavyq/model.hpp"
#include "heavyq/scadapt.hpp"
#include "heavyq/state.hpp"

namespace hq {

// R+-^{XY}(theta) = exp(-i theta/2 (Y_a X_b +- X_a Y_b)) on adjacent (a, a+1);
// RX/RY/RZ(theta) = exp(-i theta/2 P).
enum class GateKind { H, X, S, Sdg, RX, RY, RZ, CNOT, RXYPlus, RXYMinus };

std::string gate_name(GateKind k);

struct Gate {
  GateKind kind = GateKind::H;
  int q0 = 0;
  int q1 = -1;  // CNOT target / second qubit of R+-
  double theta = 0.0;
  bool two_qubit() const { return q1 >= 0; }
};

struct Circuit {
  int nqubits = 0;
  std::vector<Gate> gates;

  explicit Circuit(int n = 0) : nqubits(n) {}
  void add(GateKind k, int q, double theta = 0.0);
  void add2(GateKind k, int q0, int q1, double theta = 0.0);
  void append(const Circuit& o);
};

// R+- replaced by H / CNOT / RY:
//   R-(t) = H_a CX_ab RY_a(-t) RY_b(-t) CX_ab H_a,  R+(t) = same with RY_b(+t).
Circuit expand_composites(const Circuit& c);

// CNOT gates plus two per R+- gate.
int cnot_count(const Circuit& c);
// Layers containing a CNOT when CNOTs are scheduled as soon as possible on a
// line (single-qubit gates take no layer; R+- spans two CNOT layers).
int cnot_depth(const Circuit& c);

// Drops pairs of identical adjacent CNOTs (no gate on either qubit between).
Circuit cancel_adjacent_cnots(const Circuit& c);

// Exact state-vector simulation from |0...0> (full 2^n space, n <= 24).
StateVector simulate_circuit(const Circuit& c);
// Same from a given full-space state.
void apply_circuit(StateVector& psi, const Circuit& c);

// Number-conserving two-qubit unitary on adjacent qubits (q, q+1); local index
// bit_q + 2 bit_{q+1}.
using Mat4c = std::array<std::array<std::complex<double>, 4>, 4>;
Mat4c givens_block(double theta);  // exp(i theta G(q, q+1))
Mat4c fswap_block();
Mat4c block_product(const Mat4c& later, const Mat4c& earlier);
// Lowers a block with p00 p11 = det(W) to RZ locals around one R-^{XY} core
// (no core when the block is diagonal); equal up to a global phase.
Circuit lower_block(const Mat4c& u, int q, int nqubits);
// 4x4 matrix of a circuit on qubits (q, q+1) (test helper).
Mat4c circuit_matrix(const Circuit& c, int q);

struct SynthesisOptions {
  bool reuse_vacuum_tail = true;  // let charge blocks absorb trailing fSWAPs
  bool peephole = true;
};

struct SynthesisReport {
  int prep_cnots = 0;
  int vacuum_cnots = 0;
  std::vector<int> charge_block_cnots;  // per heavy charge, net of cancellations
  std::vector<std::string> warnings;
};

// |Omega_0>_Q preparation (X gates, Hadamard-CNOT superposition per charge),
// the Trotterized vacuum block, then the charge-pool block repeated around each
// heavy charge (mirrored with negated angles for charges of the other sign).
// The charge ansatz is anchored on one prototype charge; vacuum elements must
// be volume/surface operators. Long hops go through fermionic-SWAP networks.
Circuit synthesize_state_prep(int L, const BackgroundCharges& charges, const Ansatz& vacuum,
                              const Ansatz& charge_ansatz, const SynthesisOptions& opt = {},
                              SynthesisReport* report = nullptr);

struct ResourceReport {
  std::string kind;  // "state-prep" | "trotter-step"
  int cnot_count = 0;
  int cnot_depth = 0;
  int formula_count = 0;
  int formula_depth = 0;  // 0 when the formula gives only a scaling
  std::string scaling;
};

// 16L - 12 + 25 N_Q CNOTs at depth 35.
ResourceReport state_prep_formula(int L, int n_charges);
ResourceReport measure_resources(const Circuit& c, int L, int n_charges);
// 4(2L-1) + (2L - 4 lb)(lb + 1)(2 lb + 1) - (L - 2 lb + 2) for one
// second-order step with interactions truncated at lb spatial sites.
ResourceReport cnot_cost_trotter_step(int L, int lambda_bar);

// OpenQASM 3.0 text; R+- are declared gates with their CNOT bodies.
std::string export_qasm(const Circuit& c);
// Parser for the subset emitted by export_qasm.
Circuit import_qasm(const std::string& text);
// Counts "cx" instructions outside gate declarations, expanding R+- calls.
int qasm_cnot_count(const std::string& text);

}  // namespace hq
