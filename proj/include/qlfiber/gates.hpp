// Qulbit codes in two-mode Fock space, gate extraction with leakage and
// fidelity, the cross-Kerr CNOT, the quadrature Hadamard moment map and
// Lie-closure reachability on code subspaces.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qlfiber/hilbert.hpp"
#include "qlfiber/profiles.hpp"
#include "qlfiber/types.hpp"

namespace qlfiber {

enum class CodeKind { N7, N8, Kerr, Custom };

std::string to_string(CodeKind kind);
CodeKind code_kind_from_string(const std::string& name);

struct QulbitCode {
  std::string name;
  FockSpace space;
  std::vector<StateVector> states;
  // One label per logical basis state; two-qulbit labels read "<target><control>".
  std::vector<std::string> labels;
  int logical_dim = 0;
  // Every code state keeps max occupation <= n_max - 4.
  bool has_headroom = false;

  // dim x logical_dim matrix whose columns are the code states.
  CMatrix basis() const;
};

// N7: |1] = |1,0>, |0] = |0,1>.
// N8: |11] = |3,0>, |01] = |2,1>, |10] = |1,2>, |00] = |0,3> (normalized).
// KERR: target |1] = (|0> - |1>)_a / sqrt2, |0] = (|0> + |1>)_a / sqrt2 on mode a,
//       control |1] = |1>_b, |0] = |0>_b; labels in the same order as N8.
QulbitCode make_code(CodeKind kind, const FockSpace& space);
QulbitCode make_custom_code(const std::string& name, const FockSpace& space, std::vector<StateVector> states,
                            std::vector<std::string> labels);

struct GateReport {
  CMatrix extracted;
  double leakage = 0.0;
  std::optional<double> fidelity;
  // arg Tr(target^dag extracted) with a target, arg det(extracted)/d otherwise.
  double global_phase = 0.0;
  // ||(1 - P) U P|| for the code projector P.
  double off_block_norm = 0.0;
};

// |Tr(a^dag b)| / d; invariant under global phases of either argument.
double gate_fidelity(const CMatrix& achieved, const CMatrix& target);
// 1 - mean squared singular value of the block.
double block_leakage(const CMatrix& block);

GateReport extract_gate(const CMatrix& u_full, const QulbitCode& code,
                        const std::optional<CMatrix>& target = std::nullopt);

// diag(exp(i phase n1 n2)).
CMatrix kerr_cnot_unitary(const FockSpace& space, double phase);

// Logical CNOT in the code's label order: flips the target bit when the
// control bit is 1.
CMatrix cnot_matrix(const QulbitCode& code);

struct QuadratureMap {
  // Heisenberg first-moment map of exp(+i (p^2/2 + x^2/2) pi/4) on the
  // dimensionless quadratures (x, p).
  RMatrix dimensionless;
  // Same map on physical (x, p_x) with oscillator width w: D S D^-1, D = diag(w, lambda/w).
  RMatrix physical;
  // The commonly quoted form: (p, x) -> ((p + x)/sqrt2, (p - x)/sqrt2), written on (x, p).
  RMatrix claimed;
  double determinant = 0.0;
  double claimed_determinant = 0.0;
  bool matches_claim = false;
  // Matched isotropic segment whose forward propagation realizes the map
  // (oscillator phase 7 pi / 4, equal to -pi/4 mod 2 pi).
  QuadraticSegment segment;
  std::string note;
};

QuadratureMap quadrature_hadamard_map(double lambda, double n0 = 1.5, double width = 1.0);

struct LieClosure {
  int dimension = 0;
  // Orthonormal (Frobenius, real inner product) basis of i * algebra on the code.
  std::vector<CMatrix> basis;
};

// Norm of the part of G|code> that leaves the code subspace.
double generator_leakage(const CMatrix& generator, const QulbitCode& code);

// Real Lie algebra generated by {i P^dag G P}; generators must be Hermitian
// and preserve the code subspace.
LieClosure lie_closure(const std::vector<CMatrix>& generators, const QulbitCode& code);

}  // namespace qlfiber
