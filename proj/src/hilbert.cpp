#include "qlfiber/hilbert.hpp"

#include <sstream>

namespace qlfiber {

TransverseGrid::TransverseGrid(int dims, double extent, int points)
    : dims_(dims), extent_(extent), points_(points), spacing_(0.0)
{
  if (dims != 1 && dims != 2) throw ValidationError("grid dims must be 1 or 2");
  if (!(extent > 0.0)) throw ValidationError("grid extent must be positive");
  if (points < 2 || (points & (points - 1)) != 0)
    throw ValidationError("grid points must be a power of two, got " + std::to_string(points));
  spacing_ = extent / points;
}

RVector TransverseGrid::axis() const
{
  RVector x(points_);
  for (int j = 0; j < points_; ++j) x(j) = -0.5 * extent_ + j * spacing_;
  return x;
}

RVector TransverseGrid::wavenumbers() const
{
  RVector k(points_);
  const double dk = 2.0 * kPi / extent_;
  for (int j = 0; j < points_; ++j) k(j) = dk * (j < points_ / 2 ? j : j - points_);
  return k;
}

FockSpace::FockSpace(int n_max, int mode_count) : n_max_(n_max), mode_count_(mode_count)
{
  if (n_max < 0) throw ValidationError("cutoff must be non-negative");
  if (mode_count != 1 && mode_count != 2) throw ValidationError("mode_count must be 1 or 2");
}

Index FockSpace::index(int n1, int n2) const
{
  if (n1 < 0 || n2 < 0 || n1 > n_max_ || n2 > n_max_ || (mode_count_ == 1 && n2 != 0)) {
    std::ostringstream os;
    os << "occupation (" << n1 << ", " << n2 << ") outside cutoff n_max=" << n_max_;
    throw CutoffExceededError(os.str());
  }
  return mode_count_ == 1 ? Index(n1) : Index(n1) * (n_max_ + 1) + n2;
}

std::pair<int, int> FockSpace::occupations(Index i) const
{
  if (mode_count_ == 1) return {static_cast<int>(i), 0};
  return {static_cast<int>(i / (n_max_ + 1)), static_cast<int>(i % (n_max_ + 1))};
}

namespace {

CMatrix single_mode_lowering(int n_max)
{
  CMatrix a = CMatrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

}  // namespace

LadderOperators ladder_ops(const FockSpace& space)
{
  const CMatrix lower = single_mode_lowering(space.n_max());
  LadderOperators ops;
  if (space.mode_count() == 1) {
    ops.a = lower;
    ops.a_dag = lower.adjoint();
    return ops;
  }
  const CMatrix id = CMatrix::Identity(space.n_max() + 1, space.n_max() + 1);
  ops.a = kron(lower, id);
  ops.a_dag = ops.a.adjoint();
  ops.b = kron(id, lower);
  ops.b_dag = ops.b.adjoint();
  return ops;
}

CMatrix number_operator(const FockSpace& space, int mode)
{
  if (mode != 0 && !(mode == 1 && space.mode_count() == 2)) throw ValidationError("no such mode");
  CMatrix n = CMatrix::Zero(space.dim(), space.dim());
  for (Index i = 0; i < space.dim(); ++i) {
    const auto [n1, n2] = space.occupations(i);
    n(i, i) = mode == 0 ? n1 : n2;
  }
  return n;
}

StateVector fock_state(const FockSpace& space, int n1, int n2)
{
  StateVector s{CVector::Zero(space.dim()), true};
  s.amplitudes(space.index(n1, n2)) = 1.0;
  return s;
}

JordanSchwinger jordan_schwinger(const FockSpace& space)
{
  if (space.mode_count() != 2) throw ValidationError("Jordan-Schwinger map needs a two-mode space");
  const LadderOperators ops = ladder_ops(space);
  JordanSchwinger js;
  js.j_plus = ops.a_dag * ops.b;
  js.j_minus = ops.b_dag * ops.a;
  js.j_3 = 0.5 * (number_operator(space, 0) - number_operator(space, 1));
  return js;
}

CoherentState coherent_state(const FockSpace& space, const CoherentLabel& label)
{
  if (space.mode_count() == 1 && label.beta != Complex(0.0))
    throw ValidationError("single-mode space cannot carry a second coherent amplitude");

  // Per-mode amplitudes alpha^n / sqrt(n!) built by recurrence.
  auto mode_amplitudes = [&](Complex z) {
    CVector c(space.n_max() + 1);
    c(0) = std::exp(-0.5 * std::norm(z));
    for (int n = 1; n <= space.n_max(); ++n) c(n) = c(n - 1) * z / std::sqrt(static_cast<double>(n));
    return c;
  };
  const CVector ca = mode_amplitudes(label.alpha);
  CoherentState out;
  if (space.mode_count() == 1) {
    out.state.amplitudes = ca;
  } else {
    const CVector cb = mode_amplitudes(label.beta);
    out.state.amplitudes.resize(space.dim());
    for (int n1 = 0; n1 <= space.n_max(); ++n1)
      for (int n2 = 0; n2 <= space.n_max(); ++n2) out.state.amplitudes(space.index(n1, n2)) = ca(n1) * cb(n2);
  }
  out.state.normalized = false;
  out.truncated_norm = out.state.amplitudes.squaredNorm();
  return out;
}

Complex lattice_point(int m, int n)
{
  return Complex(static_cast<double>(n), 2.0 * kPi * m) / std::sqrt(2.0);
}

CoherentLabel lattice_label(const LatticeIndex& index)
{
  return CoherentLabel{lattice_point(index.m1, index.n1), lattice_point(index.m2, index.n2), index};
}

std::vector<CoherentLabel> von_neumann_lattice(int m_range, int n_range, const std::vector<LatticeIndex>& excluded)
{
  if (m_range < 1 || n_range < 1) throw ValidationError("lattice ranges must be >= 1");
  std::vector<CoherentLabel> labels;
  for (int m1 = -m_range; m1 <= m_range; ++m1)
    for (int n1 = -n_range; n1 <= n_range; ++n1)
      for (int m2 = -m_range; m2 <= m_range; ++m2)
        for (int n2 = -n_range; n2 <= n_range; ++n2) {
          const LatticeIndex idx{m1, n1, m2, n2};
          bool skip = false;
          for (const auto& e : excluded) skip = skip || e == idx;
          if (!skip) labels.push_back(lattice_label(idx));
        }
  return labels;
}

std::vector<StateVector> fixed_n_basis(const FockSpace& space, int total)
{
  if (space.mode_count() != 2) throw ValidationError("fixed-N basis needs a two-mode space");
  if (total < 0 || total > space.n_max())
    throw ValidationError("total occupation " + std::to_string(total) + " outside [0, n_max]");
  std::vector<StateVector> basis;
  for (int n1 = total; n1 >= 0; --n1) basis.push_back(fock_state(space, n1, total - n1));
  return basis;
}

ModeSamples hermite_gauss_mode(int n, double width, const TransverseGrid& grid)
{
  if (n < 0) throw ValidationError("mode index must be non-negative");
  if (!(width > 0.0)) throw ValidationError("mode width must be positive");
  ModeSamples out;
  if (grid.extent() < 8.0 * width * std::sqrt(n + 1.0)) {
    std::ostringstream os;
    os << "grid extent " << grid.extent() << " too small for Hermite-Gauss mode " << n << " at width " << width;
    out.warnings.push_back(os.str());
  }
  const RVector x = grid.axis();
  out.values.resize(x.size());
  for (Index j = 0; j < x.size(); ++j) out.values(j) = hermite_function(n, x(j) / width);
  const double norm = std::sqrt(out.values.squaredNorm() * grid.spacing());
  if (norm > 0.0) out.values /= norm;
  return out;
}

}  // namespace qlfiber
