#include <cstdio>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "heavyq/circuits.hpp"

namespace hq {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string export_qasm(const Circuit& c) {
  std::ostringstream o;
  o << "OPENQASM 3.0;\n"
    << "include \"stdgates.inc\";\n"
    << "// r_xy_p(t) a, b = exp(-i t/2 (Y_a X_b + X_a Y_b)); r_xy_m(t) a, b = exp(-i t/2 (Y_a X_b - X_a Y_b))\n"
    << "gate r_xy_p(theta) a, b { h a; cx a, b; ry(-theta) a; ry(theta) b; cx a, b; h a; }\n"
    << "gate r_xy_m(theta) a, b { h a; cx a, b; ry(-theta) a; ry(-theta) b; cx a, b; h a; }\n"
    << "qubit[" << c.nqubits << "] q;\n";
  for (const auto& g : c.gates) {
    o << gate_name(g.kind);
    switch (g.kind) {
      case GateKind::RX:
      case GateKind::RY:
      case GateKind::RZ:
      case GateKind::RXYPlus:
      case GateKind::RXYMinus: o << '(' << fmt(g.theta) << ')'; break;
      default: break;
    }
    o << " q[" << g.q0 << ']';
    if (g.two_qubit()) o << ", q[" << g.q1 << ']';
    o << ";\n";
  }
  return o.str();
}

Circuit import_qasm(const std::string& text) {
  // strip comments and gate declarations
  std::string s;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto p = line.find("//");
      if (p != std::string::npos) line.erase(p);
      s += line + '\n';
    }
  }
  for (std::size_t p; (p = s.find("gate ")) != std::string::npos;) {
    const auto e = s.find('}', p);
    if (e == std::string::npos) throw std::invalid_argument("unterminated gate declaration");
    s.erase(p, e - p + 1);
  }
  static const std::regex reg(R"(^qubit\[(\d+)\]\s+q$)");
  static const std::regex ins(R"(^([a-z_]+)(?:\(([^)]*)\))?\s+q\[(\d+)\](?:\s*,\s*q\[(\d+)\])?$)");
  Circuit c;
  bool have_reg = false;
  std::istringstream in(s);
  std::string stmt;
  while (std::getline(in, stmt, ';')) {
    const auto b = stmt.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    stmt = stmt.substr(b, stmt.find_last_not_of(" \t\r\n") - b + 1);
    if (stmt.rfind("OPENQASM", 0) == 0 || stmt.rfind("include", 0) == 0) continue;
    std::smatch m;
    if (std::regex_match(stmt, m, reg)) {
      c = Circuit(std::stoi(m[1]));
      have_reg = true;
      continue;
    }
    if (!std::regex_match(stmt, m, ins)) throw std::invalid_argument("unsupported QASM statement: " + stmt);
    if (!have_reg) throw std::invalid_argument("gate before qubit declaration");
    const std::string name = m[1];
    const double th = m[2].matched ? std::stod(m[2]) : 0.0;
    const int q0 = std::stoi(m[3]);
    const int q1 = m[4].matched ? std::stoi(m[4]) : -1;
    static const GateKind kinds[] = {GateKind::H,  GateKind::X,  GateKind::S,    GateKind::Sdg,     GateKind::RX,
                                     GateKind::RY, GateKind::RZ, GateKind::CNOT, GateKind::RXYPlus, GateKind::RXYMinus};
    bool ok = false;
    for (GateKind k : kinds) {
      if (gate_name(k) != name) continue;
      const bool two = k == GateKind::CNOT || k == GateKind::RXYPlus || k == GateKind::RXYMinus;
      if (two != (q1 >= 0)) throw std::invalid_argument("wrong operand count: " + stmt);
      if (two)
        c.add2(k, q0, q1, th);
      else
        c.add(k, q0, th);
      ok = true;
      break;
    }
    if (!ok) throw std::invalid_argument("unknown gate: " + name);
  }
  if (!have_reg) throw std::invalid_argument("missing qubit declaration");
  return c;
}

int qasm_cnot_count(const std::string& text) { return cnot_count(expand_composites(import_qasm(text))); }

}  // namespace hq
