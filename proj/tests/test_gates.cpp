#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qlfiber/expm.hpp"
#include "qlfiber/gates.hpp"

using namespace qlfiber;

namespace {

CMatrix cnot_truth_table()
{
  // Labels (target, control): 11, 01, 10, 00. Control set flips the target.
  CMatrix c = CMatrix::Zero(4, 4);
  c(1, 0) = c(0, 1) = 1.0;
  c(2, 2) = c(3, 3) = 1.0;
  return c;
}

}  // namespace

TEST(Codes, N7AndN8States)
{
  const FockSpace s(8, 2);
  const QulbitCode n7 = make_code(CodeKind::N7, s);
  EXPECT_EQ(n7.logical_dim, 2);
  EXPECT_EQ(n7.labels, (std::vector<std::string>{"1", "0"}));
  EXPECT_EQ(n7.states[0].amplitudes, fock_state(s, 1, 0).amplitudes);
  EXPECT_EQ(n7.states[1].amplitudes, fock_state(s, 0, 1).amplitudes);
  EXPECT_TRUE(n7.has_headroom);

  const QulbitCode n8 = make_code(CodeKind::N8, s);
  EXPECT_EQ(n8.labels, (std::vector<std::string>{"11", "01", "10", "00"}));
  // b^dag^3 |0> / sqrt(3!) built by hand.
  const LadderOperators ops = ladder_ops(s);
  CVector v = fock_state(s, 0, 0).amplitudes;
  for (int k = 0; k < 3; ++k) v = ops.b_dag * v;
  EXPECT_LT((v / std::sqrt(6.0) - n8.states[3].amplitudes).norm(), 1e-14);
  EXPECT_LT((n8.basis().adjoint() * n8.basis() - CMatrix::Identity(4, 4)).norm(), 1e-12);

  EXPECT_THROW(make_code(CodeKind::N8, FockSpace(2, 2)), CutoffExceededError);
  EXPECT_FALSE(make_code(CodeKind::N8, FockSpace(5, 2)).has_headroom);
}

TEST(Codes, KerrCoding)
{
  const FockSpace s(6, 2);
  const QulbitCode k = make_code(CodeKind::Kerr, s);
  // |01]: target 0 = (|0> + |1>)_a / sqrt2, control 1 = |1>_b.
  CVector expected = CVector::Zero(s.dim());
  expected(s.index(0, 1)) = 1.0 / std::sqrt(2.0);
  expected(s.index(1, 1)) = 1.0 / std::sqrt(2.0);
  EXPECT_LT((k.states[1].amplitudes - expected).norm(), 1e-15);
  // |10]: target 1 = (|0> - |1>)_a / sqrt2, control 0 = |0>_b.
  expected.setZero();
  expected(s.index(0, 0)) = 1.0 / std::sqrt(2.0);
  expected(s.index(1, 0)) = -1.0 / std::sqrt(2.0);
  EXPECT_LT((k.states[2].amplitudes - expected).norm(), 1e-15);
}

TEST(Codes, CustomValidation)
{
  const FockSpace s(4, 2);
  std::vector<StateVector> states{fock_state(s, 1, 0), fock_state(s, 1, 0)};
  EXPECT_THROW(make_custom_code("dup", s, states, {"a", "b"}), ValidationError);
  states[1] = fock_state(s, 2, 0);
  EXPECT_THROW(make_custom_code("labels", s, states, {"a"}), ValidationError);
  EXPECT_EQ(make_custom_code("ok", s, states, {"a", "b"}).logical_dim, 2);
}

TEST(Extract, IdentityAndLeakage)
{
  const FockSpace s(6, 2);
  const QulbitCode n7 = make_code(CodeKind::N7, s);
  const GateReport id = extract_gate(CMatrix::Identity(s.dim(), s.dim()), n7, CMatrix(CMatrix::Identity(2, 2)));
  EXPECT_EQ(id.extracted, CMatrix(CMatrix::Identity(2, 2)));
  EXPECT_EQ(id.leakage, 0.0);
  EXPECT_NEAR(*id.fidelity, 1.0, 1e-15);
  EXPECT_NEAR(id.off_block_norm, 0.0, 1e-15);

  // A beam-splitter onto |2,0> leaks half of |1,0>'s weight... here: swap |1,0> with |2,0>.
  CMatrix swap = CMatrix::Identity(s.dim(), s.dim());
  const Index i10 = s.index(1, 0), i20 = s.index(2, 0);
  swap(i10, i10) = swap(i20, i20) = 0.0;
  swap(i10, i20) = swap(i20, i10) = 1.0;
  const GateReport leak = extract_gate(swap, n7);
  EXPECT_NEAR(leak.leakage, 0.5, 1e-15);
  EXPECT_NEAR(leak.off_block_norm, 1.0, 1e-15);
  EXPECT_FALSE(leak.fidelity.has_value());
}

TEST(Extract, JxRotationGivesX)
{
  const FockSpace s(6, 2);
  const QulbitCode n7 = make_code(CodeKind::N7, s);
  const JordanSchwinger js = jordan_schwinger(s);
  const CMatrix u = oracle::hermitian_evolution(js.j_plus + js.j_minus, kPi / 2.0);
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  const GateReport r = extract_gate(u, n7, x);
  EXPECT_NEAR(*r.fidelity, 1.0, 1e-14);
  EXPECT_LT(r.leakage, 1e-14);
}

TEST(Fidelity, GlobalPhaseInvariance)
{
  std::mt19937_64 rng(9);
  for (int k = 0; k < 10; ++k) {
    const CMatrix g = oracle::random_su2(rng);
    EXPECT_NEAR(gate_fidelity(g, g), 1.0, 1e-14);
    for (double phi : {0.3, 1.7, -2.9}) EXPECT_NEAR(gate_fidelity(std::polar(1.0, phi) * g, g), 1.0, 1e-14);
  }
  EXPECT_THROW(gate_fidelity(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)), ValidationError);
}

TEST(Kerr, CnotUnitary)
{
  const FockSpace s(6, 2);
  const CMatrix u = kerr_cnot_unitary(s, kPi);
  const CVector v11 = fock_state(s, 1, 1).amplitudes;
  EXPECT_LT((u * v11 + v11).norm(), 1e-15);
  for (int n = 0; n <= 6; ++n) {
    const Index i = s.index(0, n);
    EXPECT_EQ(u(i, i), Complex(1.0));
  }

  const QulbitCode k = make_code(CodeKind::Kerr, s);
  EXPECT_EQ(cnot_matrix(k), cnot_truth_table());
  const GateReport r = extract_gate(u, k, cnot_truth_table());
  EXPECT_GT(*r.fidelity, 1.0 - 1e-12);
  EXPECT_LT(r.leakage, 1e-12);
  EXPECT_LT((r.extracted - cnot_truth_table()).cwiseAbs().maxCoeff(), 1e-15);
  // Involution at the logical level.
  const GateReport sq = extract_gate(u * u, k, CMatrix(CMatrix::Identity(4, 4)));
  EXPECT_GT(*sq.fidelity, 1.0 - 1e-12);
  // Segment realization with the opposite sign convention agrees on integer spectra.
  const CMatrix seg = segment_unitary(KerrSegment{0.0, 1.0, kPi}, s, 1.0).unitary;
  EXPECT_LT((seg - u).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(QuadratureHadamard, SymplecticRotation)
{
  const QuadratureMap q = quadrature_hadamard_map(1.0);
  EXPECT_NEAR(q.determinant, 1.0, 1e-12);
  EXPECT_NEAR(q.claimed_determinant, -1.0, 1e-12);
  EXPECT_FALSE(q.matches_claim);
  EXPECT_FALSE(q.note.empty());
  const RMatrix twice = q.dimensionless * q.dimensionless;
  RMatrix quarter(2, 2);
  quarter << 0, -1, 1, 0;
  EXPECT_LT((twice - quarter).norm(), 1e-15);
  EXPECT_LT(symplectic_defect(q.physical), 1e-12);

  // The realizing segment's own transfer matrix equals the physical map.
  const QuadratureMap qp = quadrature_hadamard_map(0.9, 1.45, 1.3);
  EXPECT_LT((symplectic_transfer(qp.segment, 1).matrix - qp.physical).norm(), 1e-10);
}

TEST(LieClosure, Examples)
{
  const FockSpace s(6, 2);
  const QulbitCode n7 = make_code(CodeKind::N7, s);
  const JordanSchwinger js = jordan_schwinger(s);
  EXPECT_EQ(lie_closure({js.j_3}, n7).dimension, 1);
  EXPECT_EQ(lie_closure({js.j_3, js.j_x(), js.j_y()}, n7).dimension, 3);
  EXPECT_EQ(lie_closure({js.j_3, js.j_x()}, n7).dimension, 3);
  // Same span, different generators.
  EXPECT_EQ(lie_closure({js.j_x() + js.j_3, 2.0 * js.j_x() - js.j_3}, n7).dimension, 3);

  const QulbitCode n8 = make_code(CodeKind::N8, s);
  const CMatrix total = number_operator(s, 0) + number_operator(s, 1);
  const CMatrix kerr = number_operator(s, 0) * number_operator(s, 1);
  const int quad = lie_closure({total, js.j_3, js.j_x(), js.j_y()}, n8).dimension;
  const int with_kerr = lie_closure({total, js.j_3, js.j_x(), js.j_y(), kerr}, n8).dimension;
  EXPECT_EQ(quad, 4);
  EXPECT_EQ(with_kerr, 16);

  const GeneratorSet g = generator_set(s);
  EXPECT_GT(generator_leakage(g.matrices[5], n8), 1e-3);
  EXPECT_THROW(lie_closure({g.matrices[5]}, n8), ValidationError);
  EXPECT_THROW(lie_closure({js.j_plus}, n7), ValidationError);
}

TEST(LieClosure, BasisIsOrthonormalAndAntiHermitian)
{
  const FockSpace s(6, 2);
  const QulbitCode n8 = make_code(CodeKind::N8, s);
  const JordanSchwinger js = jordan_schwinger(s);
  const LieClosure lc = lie_closure({js.j_3, js.j_x()}, n8);
  ASSERT_EQ(lc.basis.size(), std::size_t(lc.dimension));
  for (std::size_t i = 0; i < lc.basis.size(); ++i) {
    EXPECT_LT((lc.basis[i] + lc.basis[i].adjoint()).norm(), 1e-12);
    for (std::size_t j = 0; j < lc.basis.size(); ++j)
      EXPECT_NEAR((lc.basis[i].adjoint() * lc.basis[j]).trace().real(), i == j ? 1.0 : 0.0, 1e-10);
  }
}
