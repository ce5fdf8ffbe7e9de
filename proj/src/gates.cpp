#include "qlfiber/gates.hpp"

#include <algorithm>
#include <sstream>

namespace qlfiber {

std::string to_string(CodeKind kind)
{
  switch (kind) {
    case CodeKind::N7:
      return "n7";
    case CodeKind::N8:
      return "n8";
    case CodeKind::Kerr:
      return "kerr";
    case CodeKind::Custom:
      return "custom";
  }
  return "custom";
}

CodeKind code_kind_from_string(const std::string& name)
{
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "n7") return CodeKind::N7;
  if (lower == "n8") return CodeKind::N8;
  if (lower == "kerr") return CodeKind::Kerr;
  if (lower == "custom") return CodeKind::Custom;
  throw ValidationError("unknown code kind '" + name + "' (expected n7, n8, kerr)");
}

CMatrix QulbitCode::basis() const
{
  CMatrix p(space.dim(), static_cast<Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) p.col(static_cast<Index>(k)) = states[k].amplitudes;
  return p;
}

namespace {

int max_occupation(const FockSpace& space, const StateVector& s)
{
  int occ = 0;
  for (Index i = 0; i < s.amplitudes.size(); ++i) {
    if (std::abs(s.amplitudes(i)) == 0.0) continue;
    const auto [n1, n2] = space.occupations(i);
    occ = std::max({occ, n1, n2});
  }
  return occ;
}

StateVector superpose(const FockSpace& space, std::initializer_list<std::pair<std::pair<int, int>, Complex>> terms)
{
  StateVector s{CVector::Zero(space.dim()), true};
  for (const auto& [occ, c] : terms) s.amplitudes(space.index(occ.first, occ.second)) += c;
  s.amplitudes.normalize();
  return s;
}

}  // namespace

QulbitCode make_custom_code(const std::string& name, const FockSpace& space, std::vector<StateVector> states,
                            std::vector<std::string> labels)
{
  if (states.empty()) throw ValidationError("code needs at least one state");
  if (labels.size() != states.size()) throw ValidationError("code needs one label per state");
  QulbitCode code{name, space, std::move(states), std::move(labels), 0, false};
  code.logical_dim = static_cast<int>(code.states.size());
  for (const auto& s : code.states)
    if (s.amplitudes.size() != space.dim()) throw ValidationError("code state dimension does not match the space");
  const CMatrix p = code.basis();
  const double defect = (p.adjoint() * p - CMatrix::Identity(code.logical_dim, code.logical_dim)).cwiseAbs().maxCoeff();
  if (defect > 1e-12) {
    std::ostringstream os;
    os << "code states not orthonormal (defect " << defect << ")";
    throw ValidationError(os.str());
  }
  int occ = 0;
  for (const auto& s : code.states) occ = std::max(occ, max_occupation(space, s));
  code.has_headroom = occ <= space.n_max() - 4;
  return code;
}

QulbitCode make_code(CodeKind kind, const FockSpace& space)
{
  if (space.mode_count() != 2) throw ValidationError("qulbit codes live in a two-mode space");
  const int needed = kind == CodeKind::N8 ? 3 : 1;
  if (space.n_max() < needed)
    throw CutoffExceededError("cutoff " + std::to_string(space.n_max()) + " below the code's occupation " +
                              std::to_string(needed));
  const LadderOperators ops = ladder_ops(space);
  const CVector vacuum = fock_state(space, 0, 0).amplitudes;
  switch (kind) {
    case CodeKind::N7:
      return make_custom_code("n7", space, {fock_state(space, 1, 0), fock_state(space, 0, 1)}, {"1", "0"});
    case CodeKind::N8: {
      // a^dag^k b^dag^(3-k) |0>, normalized.
      std::vector<StateVector> states;
      for (int k = 3; k >= 0; --k) {
        CVector v = vacuum;
        for (int i = 0; i < k; ++i) v = ops.a_dag * v;
        for (int i = 0; i < 3 - k; ++i) v = ops.b_dag * v;
        states.push_back(StateVector{v.normalized(), true});
      }
      return make_custom_code("n8", space, std::move(states), {"11", "01", "10", "00"});
    }
    case CodeKind::Kerr: {
      const double r = 1.0 / std::sqrt(2.0);
      auto state = [&](int target, int control) {
        const double sign = target == 1 ? -1.0 : 1.0;
        return superpose(space, {{{0, control}, r}, {{1, control}, sign * r}});
      };
      return make_custom_code("kerr", space, {state(1, 1), state(0, 1), state(1, 0), state(0, 0)},
                              {"11", "01", "10", "00"});
    }
    case CodeKind::Custom:
      break;
  }
  throw ValidationError("custom codes are built with make_custom_code");
}

double gate_fidelity(const CMatrix& achieved, const CMatrix& target)
{
  if (achieved.rows() != target.rows() || achieved.cols() != target.cols())
    throw ValidationError("fidelity: matrix shapes differ");
  return std::abs((achieved.adjoint() * target).trace()) / static_cast<double>(target.rows());
}

double block_leakage(const CMatrix& block)
{
  const double mean_sq = block.squaredNorm() / static_cast<double>(block.cols());
  return std::clamp(1.0 - mean_sq, 0.0, 1.0);
}

GateReport extract_gate(const CMatrix& u_full, const QulbitCode& code, const std::optional<CMatrix>& target)
{
  if (u_full.rows() != code.space.dim() || u_full.cols() != code.space.dim())
    throw ValidationError("operator dimension does not match the code's space");
  const CMatrix p = code.basis();
  GateReport r;
  const CMatrix up = u_full * p;
  r.extracted = p.adjoint() * up;
  r.leakage = block_leakage(r.extracted);
  r.off_block_norm = (up - p * r.extracted).norm();
  if (target) {
    if (target->rows() != code.logical_dim || target->cols() != code.logical_dim)
      throw ValidationError("target dimension does not match the code");
    r.fidelity = std::clamp(gate_fidelity(r.extracted, *target), 0.0, 1.0);
    r.global_phase = std::arg((target->adjoint() * r.extracted).trace());
  } else {
    const Complex det = r.extracted.determinant();
    r.global_phase = std::abs(det) > 0.0 ? std::arg(det) / code.logical_dim : 0.0;
  }
  return r;
}

CMatrix kerr_cnot_unitary(const FockSpace& space, double phase)
{
  if (space.mode_count() != 2) throw ValidationError("Kerr CNOT needs a two-mode space");
  CMatrix u = CMatrix::Zero(space.dim(), space.dim());
  for (Index i = 0; i < space.dim(); ++i) {
    const auto [n1, n2] = space.occupations(i);
    u(i, i) = std::polar(1.0, phase * n1 * n2);
  }
  return u;
}

CMatrix cnot_matrix(const QulbitCode& code)
{
  const Index d = code.logical_dim;
  CMatrix m = CMatrix::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    const std::string& label = code.labels[static_cast<std::size_t>(j)];
    if (label.size() != 2) throw ValidationError("CNOT needs a two-qulbit code (labels \"tc\")");
    std::string image = label;
    if (label[1] == '1') image[0] = label[0] == '1' ? '0' : '1';
    const auto it = std::find(code.labels.begin(), code.labels.end(), image);
    if (it == code.labels.end()) throw ValidationError("code has no state labelled " + image);
    m(it - code.labels.begin(), j) = 1.0;
  }
  return m;
}

QuadratureMap quadrature_hadamard_map(double lambda, double n0, double width)
{
  if (!(lambda > 0.0) || !(n0 > 0.0) || !(width > 0.0)) throw ValidationError("lambda, n0, width must be positive");
  QuadratureMap q;
  const double r = 1.0 / std::sqrt(2.0);
  // exp(-i theta H) x exp(i theta H) with theta = pi/4 and H = (p^2 + x^2)/2:
  // x -> x cos(theta) - p sin(theta), p -> x sin(theta) + p cos(theta).
  q.dimensionless.resize(2, 2);
  q.dimensionless << r, -r, r, r;
  q.claimed.resize(2, 2);
  q.claimed << -r, r, r, r;
  const Eigen::Vector2d scale(width, lambda / width);
  q.physical = scale.asDiagonal() * q.dimensionless * scale.cwiseInverse().asDiagonal();
  q.determinant = q.dimensionless.determinant();
  q.claimed_determinant = q.claimed.determinant();
  q.matches_claim = (q.dimensionless - q.claimed).cwiseAbs().maxCoeff() < 1e-12;
  const double omega = oscillator_frequency(lambda, n0, width);
  q.segment = matched_segment(0.0, 7.0 * kPi / 4.0 / omega, lambda, n0, width);
  std::ostringstream os;
  os << "Heisenberg map of exp(+i(p^2/2 + x^2/2) pi/4) is x' = (x - p)/sqrt2, p' = (x + p)/sqrt2 (det "
     << q.determinant << "); the commonly quoted map (p, x) -> ((p + x)/sqrt2, (p - x)/sqrt2) has det " << q.claimed_determinant
     << " and differs in the sign of x', so it is not generated by a Hamiltonian flow.";
  q.note = os.str();
  return q;
}

double generator_leakage(const CMatrix& generator, const QulbitCode& code)
{
  const CMatrix p = code.basis();
  const CMatrix gp = generator * p;
  return (gp - p * (p.adjoint() * gp)).norm();
}

namespace {

RVector realify(const CMatrix& m)
{
  RVector v(2 * m.size());
  for (Index i = 0; i < m.size(); ++i) {
    v(2 * i) = m.data()[i].real();
    v(2 * i + 1) = m.data()[i].imag();
  }
  return v;
}

CMatrix complexify(const RVector& v, Index d)
{
  CMatrix m(d, d);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = Complex(v(2 * i), v(2 * i + 1));
  return m;
}

// Adds the component of `m` orthogonal to the basis; returns false when it
// lies in the span to within `tol` (relative to the norm of m, or absolute
// for tiny m).
bool extend_basis(std::vector<RVector>& basis, const CMatrix& m, double tol)
{
  RVector v = realify(m);
  const double scale = std::max(1.0, v.norm());
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) v -= b.dot(v) * b;
  const double residual = v.norm();
  if (residual <= tol * scale) return false;
  basis.push_back(v / residual);
  return true;
}

}  // namespace

LieClosure lie_closure(const std::vector<CMatrix>& generators, const QulbitCode& code)
{
  const CMatrix p = code.basis();
  const Index d = code.logical_dim;
  std::vector<RVector> basis;
  constexpr double tol = 1e-9;

  for (std::size_t k = 0; k < generators.size(); ++k) {
    const CMatrix& g = generators[k];
    if (g.rows() != code.space.dim() || g.cols() != code.space.dim())
      throw ValidationError("generator " + std::to_string(k) + ": dimension does not match the code's space");
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if (!is_hermitian(g, 1e-12 * scale)) throw ValidationError("generator " + std::to_string(k) + " is not Hermitian");
    const double leak = generator_leakage(g, code);
    if (leak >= 1e-10) {
      std::ostringstream os;
      os << "generator " << k << " leaks out of the code subspace (off-block norm " << leak << ")";
      throw ValidationError(os.str());
    }
    extend_basis(basis, kI * (p.adjoint() * g * p), tol);
  }

  // Commutators of basis elements until no new direction appears.
  for (std::size_t j = 1; j < basis.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const CMatrix a = complexify(basis[i], d);
      const CMatrix b = complexify(basis[j], d);
      extend_basis(basis, commutator(a, b), tol);
    }
  }

  LieClosure out;
  // Rank of the Gram matrix of the collected elements.
  if (!basis.empty()) {
    RMatrix stacked(basis.front().size(), static_cast<Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) stacked.col(static_cast<Index>(k)) = basis[k];
    const Eigen::SelfAdjointEigenSolver<RMatrix> eig(stacked.transpose() * stacked);
    out.dimension = static_cast<int>((eig.eigenvalues().array() > tol).count());
  }
  for (const auto& b : basis) out.basis.push_back(complexify(b, d));
  return out;
}

}  // namespace qlfiber
