#include "qlfiber/profiles.hpp"

#include <algorithm>
#include <sstream>

#include "qlfiber/expm.hpp"

namespace qlfiber {

double segment_start(const Segment& s)
{
  return std::visit([](const auto& seg) { return seg.z0; }, s);
}

double segment_end(const Segment& s)
{
  return std::visit([](const auto& seg) { return seg.z1; }, s);
}

double segment_n0(const Segment& s)
{
  return std::visit([](const auto& seg) { return seg.n0; }, s);
}

Profile::Profile(std::vector<Segment> segments, double transition_length)
    : segments_(std::move(segments)), transition_length_(transition_length)
{
  if (!(transition_length > 0.0)) throw ValidationError("transition_length must be positive");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const double z0 = segment_start(segments_[i]);
    const double z1 = segment_end(segments_[i]);
    if (!(z1 > z0)) throw ValidationError("segment " + std::to_string(i) + ": z1 must exceed z0");
    if (!(segment_n0(segments_[i]) > 0.0)) throw ValidationError("segment " + std::to_string(i) + ": n0 must be positive");
    if (const auto* q = std::get_if<QuadraticSegment>(&segments_[i]); q && !(q->mode_width > 0.0))
      throw ValidationError("segment " + std::to_string(i) + ": mode_width must be positive");
    if (i > 0) {
      const double prev = segment_end(segments_[i - 1]);
      const double tol = 1e-12 * std::max({1.0, std::abs(prev), std::abs(z0)});
      if (std::abs(prev - z0) > tol) {
        std::ostringstream os;
        os << "segment " << i << ": starts at " << z0 << " but previous segment ends at " << prev
           << (z0 > prev ? " (gap)" : " (overlap)");
        throw ValidationError(os.str());
      }
    }
  }
}

bool Profile::has_kerr() const
{
  return std::any_of(segments_.begin(), segments_.end(),
                     [](const Segment& s) { return std::holds_alternative<KerrSegment>(s); });
}

std::size_t Profile::segment_index_at(double z) const
{
  if (segments_.empty()) throw ValidationError("empty profile has no segments");
  const double tol = 1e-12 * std::max(1.0, std::abs(z));
  if (z < z_start() - tol || z > z_end() + tol) {
    std::ostringstream os;
    os << "z = " << z << " outside profile coverage [" << z_start() << ", " << z_end() << "]";
    throw ValidationError(os.str());
  }
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i)
    if (z < segment_end(segments_[i])) return i;
  return segments_.size() - 1;
}

double Profile::integrated_n0(double z) const
{
  if (segments_.empty()) return 0.0;
  segment_index_at(z);  // coverage check
  double total = 0.0;
  for (const auto& s : segments_) {
    const double lo = segment_start(s);
    const double hi = std::min(segment_end(s), z);
    if (hi <= lo) break;
    total += segment_n0(s) * (hi - lo);
  }
  return total;
}

double matched_curvature(double lambda, double n0, double width)
{
  return lambda * lambda / (4.0 * kPi * n0 * std::pow(width, 4));
}

double oscillator_frequency(double lambda, double n0, double width)
{
  return lambda / (2.0 * kPi * n0 * width * width);
}

QuadraticSegment matched_segment(double z0, double z1, double lambda, double n0, double width)
{
  QuadraticSegment s;
  s.z0 = z0;
  s.z1 = z1;
  s.a = s.b = matched_curvature(lambda, n0, width);
  s.n0 = n0;
  s.mode_width = width;
  return s;
}

GeneratorSet generator_set(const FockSpace& space)
{
  if (space.mode_count() != 2) throw ValidationError("generator set needs a two-mode space");
  const LadderOperators ops = ladder_ops(space);
  const CMatrix xa = ops.a_dag + ops.a;
  const CMatrix xb = ops.b_dag + ops.b;
  GeneratorSet g;
  g.names = {"number", "xa", "xa2", "xb", "xb2", "xaxb"};
  g.matrices = {number_operator(space, 0) + number_operator(space, 1), xa, xa * xa, xb, xb * xb, xa * xb};
  return g;
}

namespace {

struct Quadratures {
  CMatrix x, px, y, py;
};

Quadratures quadratures(const FockSpace& space, double lambda, double width)
{
  const LadderOperators ops = ladder_ops(space);
  const double s = 1.0 / std::sqrt(2.0);
  Quadratures q;
  q.x = (width * s) * (ops.a + ops.a_dag);
  q.px = Complex(0.0, lambda * s / width) * (ops.a_dag - ops.a);
  if (space.mode_count() == 2) {
    q.y = (width * s) * (ops.b + ops.b_dag);
    q.py = Complex(0.0, lambda * s / width) * (ops.b_dag - ops.b);
  }
  return q;
}

CMatrix quadratic_hamiltonian(const QuadraticSegment& seg, const FockSpace& space, double lambda)
{
  const Quadratures q = quadratures(space, lambda, seg.mode_width);
  const double kinetic = 1.0 / (4.0 * kPi * seg.n0);
  CMatrix h = kinetic * (q.px * q.px) + seg.a * (q.x * q.x) + seg.e * q.x;
  if (space.mode_count() == 2) {
    h += kinetic * (q.py * q.py) + seg.b * (q.y * q.y) + seg.d * (q.x * q.y) + seg.f * q.y;
  }
  h.diagonal().array() += seg.l;
  // Remove round-off asymmetry so the result is Hermitian to the last bit.
  return 0.5 * (h + h.adjoint());
}

CMatrix kerr_hamiltonian(const KerrSegment& seg, const FockSpace& space, double lambda)
{
  if (space.mode_count() != 2) throw ValidationError("Kerr segment needs a two-mode space");
  return (seg.eta * lambda) * (number_operator(space, 0) * number_operator(space, 1));
}

CMatrix unitary_in(const Segment& segment, const FockSpace& space, double lambda)
{
  if (const auto* k = std::get_if<KerrSegment>(&segment)) {
    // Diagonal generator: exponentiate entrywise.
    CMatrix u = CMatrix::Zero(space.dim(), space.dim());
    for (Index i = 0; i < space.dim(); ++i) {
      const auto [n1, n2] = space.occupations(i);
      u(i, i) = std::exp(Complex(0.0, -k->eta * k->length() * n1 * n2));
    }
    return u;
  }
  const auto& q = std::get<QuadraticSegment>(segment);
  const CMatrix h = quadratic_hamiltonian(q, space, lambda);
  return expm(Complex(0.0, -q.length() / lambda) * h);
}

}  // namespace

CMatrix hamiltonian_matrix(const Segment& segment, const FockSpace& space, double lambda)
{
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (const auto* k = std::get_if<KerrSegment>(&segment)) return kerr_hamiltonian(*k, space, lambda);
  return quadratic_hamiltonian(std::get<QuadraticSegment>(segment), space, lambda);
}

SegmentUnitary segment_unitary(const Segment& segment, const FockSpace& space, double lambda, bool check_cutoff)
{
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (std::holds_alternative<KerrSegment>(segment) && space.mode_count() != 2)
    throw ValidationError("Kerr segment needs a two-mode space");
  SegmentUnitary out;
  out.unitary = unitary_in(segment, space, lambda);
  if (!check_cutoff) return out;

  const FockSpace wider = space.with_cutoff(space.n_max() + 4);
  const CMatrix u_wide = unitary_in(segment, wider, lambda);
  const int block = std::min(6, space.n_max());
  std::vector<std::pair<Index, Index>> pairs;  // (index in space, index in wider)
  for (Index i = 0; i < space.dim(); ++i) {
    const auto [n1, n2] = space.occupations(i);
    if (n1 + n2 <= block) pairs.emplace_back(i, wider.index(n1, n2));
  }
  double dev = 0.0;
  for (const auto& [i, wi] : pairs)
    for (const auto& [j, wj] : pairs) dev = std::max(dev, std::abs(out.unitary(i, j) - u_wide(wi, wj)));
  out.cutoff_deviation = dev;
  if (dev > 1e-6) {
    std::ostringstream os;
    os << "cutoff robustness: N<=" << block << " block changes by " << dev << " when n_max " << space.n_max()
       << " -> " << wider.n_max();
    out.warnings.push_back(os.str());
  }
  return out;
}

CMatrix compose_profile_unitary(const Profile& profile, const FockSpace& space, double lambda)
{
  CMatrix total = CMatrix::Identity(space.dim(), space.dim());
  std::optional<double> width;
  for (const auto& s : profile.segments()) {
    if (const auto* q = std::get_if<QuadraticSegment>(&s)) {
      if (width && std::abs(*width - q->mode_width) > 1e-12 * *width)
        throw ValidationError("inconsistent mode_width across segments; the Fock basis is fixed per profile");
      width = q->mode_width;
    }
    const CMatrix u = segment_unitary(s, space, lambda, false).unitary;
    total = u * total;
  }
  return total;
}

RMatrix symplectic_form(int dims)
{
  RMatrix omega = RMatrix::Zero(2 * dims, 2 * dims);
  for (int k = 0; k < dims; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

double symplectic_defect(const RMatrix& s)
{
  const RMatrix omega = symplectic_form(static_cast<int>(s.rows() / 2));
  return (s.transpose() * omega * s - omega).cwiseAbs().maxCoeff();
}

SymplecticTransfer symplectic_transfer(const QuadraticSegment& seg, int dims)
{
  if (dims != 1 && dims != 2) throw ValidationError("dims must be 1 or 2");
  // d/dz (x, p_x, y, p_y, 1) = M (x, p_x, y, p_y, 1), from Hamilton's equations
  // dx/dz = p/(2 pi n0), dp/dz = -dU/dx.
  const int n = 2 * dims;
  RMatrix m = RMatrix::Zero(n + 1, n + 1);
  const double inv_mass = 1.0 / (2.0 * kPi * seg.n0);
  m(0, 1) = inv_mass;
  m(1, 0) = -2.0 * seg.a;
  m(1, n) = -seg.e;
  if (dims == 2) {
    m(2, 3) = inv_mass;
    m(3, 2) = -2.0 * seg.b;
    m(1, 2) = -seg.d;
    m(3, 0) = -seg.d;
    m(3, n) = -seg.f;
  }
  const RMatrix flow = expm(seg.length() * m);
  return SymplecticTransfer{flow.topLeftCorner(n, n), flow.topRightCorner(n, 1)};
}

SymplecticTransfer symplectic_transfer(const Profile& profile, int dims)
{
  const int n = 2 * dims;
  SymplecticTransfer total{RMatrix::Identity(n, n), RVector::Zero(n)};
  for (const auto& s : profile.segments()) {
    const auto* q = std::get_if<QuadraticSegment>(&s);
    if (!q) throw ValidationError("symplectic transfer is defined for quadratic segments only");
    const SymplecticTransfer t = symplectic_transfer(*q, dims);
    total.offset = t.matrix * total.offset + t.offset;
    total.matrix = t.matrix * total.matrix;
  }
  return total;
}

double effective_potential(double n0, double n)
{
  return kPi / n0 * (n0 * n0 - n * n);
}

double refractive_index_at(const Profile& profile, double x, double y, double z, bool include_offset)
{
  const Segment& s = profile.segment_at(z);
  const double n0 = segment_n0(s);
  double u = 0.0;
  if (const auto* q = std::get_if<QuadraticSegment>(&s)) u = q->potential(x, y) - (include_offset ? 0.0 : q->l);
  const double n2 = n0 * n0 - n0 * u / kPi;
  if (!(n2 > 0.0)) {
    std::ostringstream os;
    os << "unrealizable index: n^2 = " << n2 << " at (" << x << ", " << y << ", " << z << ")";
    throw RealizabilityError(os.str());
  }
  return std::sqrt(n2);
}

void check_realizability(const Profile& profile, double half_extent, int dims)
{
  for (std::size_t i = 0; i < profile.segments().size(); ++i) {
    const auto* q = std::get_if<QuadraticSegment>(&profile.segments()[i]);
    if (!q) continue;
    // The largest U (smallest n) on the domain lies on its boundary or at the
    // stationary point of the quadratic form.
    const double zmid = 0.5 * (q->z0 + q->z1);
    std::vector<std::pair<double, double>> points;
    constexpr int samples = 257;
    for (int k = 0; k < samples; ++k) {
      const double t = -half_extent + 2.0 * half_extent * k / (samples - 1);
      if (dims == 1) {
        points.emplace_back(t, 0.0);
      } else {
        points.insert(points.end(), {{t, half_extent}, {t, -half_extent}, {half_extent, t}, {-half_extent, t}});
      }
    }
    if (dims == 1) {
      if (q->a != 0.0) points.emplace_back(-q->e / (2.0 * q->a), 0.0);
    } else {
      Eigen::Matrix2d hess;
      hess << 2.0 * q->a, q->d, q->d, 2.0 * q->b;
      if (std::abs(hess.determinant()) > 0.0) {
        const Eigen::Vector2d c = hess.inverse() * Eigen::Vector2d(-q->e, -q->f);
        points.emplace_back(c(0), c(1));
      }
    }
    for (const auto& [x, y] : points) {
      if (std::abs(x) > half_extent || std::abs(y) > half_extent) continue;
      try {
        refractive_index_at(profile, x, y, zmid);
      } catch (const RealizabilityError& err) {
        throw RealizabilityError("segment " + std::to_string(i) + ": " + err.what());
      }
    }
  }
}

}  // namespace qlfiber
