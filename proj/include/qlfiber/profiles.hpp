// Piecewise index profiles and the Hamiltonians they generate.
//
// A quadratic segment carries the effective potential
//   U(x, y) = a x^2 + b y^2 + d x y + e x + f y + l
// and the axial index n0. Evolution along z obeys
//   i lambda d(psi)/dz = H psi,   H = (p_x^2 + p_y^2) / (4 pi n0) + U,
// with p = -i lambda d/dx, so U(z1, z0) = exp(-i H (z1 - z0) / lambda).
// In the Fock basis of oscillator width w:
//   x = w (a + a^dag) / sqrt(2),   p_x = (lambda / w) i (a^dag - a) / sqrt(2).
#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qlfiber/hilbert.hpp"
#include "qlfiber/types.hpp"

namespace qlfiber {

struct QuadraticSegment {
  double z0 = 0.0;
  double z1 = 0.0;
  double a = 0.0, b = 0.0, d = 0.0, e = 0.0, f = 0.0, l = 0.0;
  double n0 = 1.0;
  double mode_width = 1.0;

  double length() const { return z1 - z0; }
  double potential(double x, double y = 0.0) const { return a * x * x + b * y * y + d * x * y + e * x + f * y + l; }
};

// Cross-Kerr segment, H = eta * lambda * (a^dag a)(b^dag b).
struct KerrSegment {
  double z0 = 0.0;
  double z1 = 0.0;
  double eta = 0.0;
  double n0 = 1.0;

  double length() const { return z1 - z0; }
};

using Segment = std::variant<QuadraticSegment, KerrSegment>;

double segment_start(const Segment& s);
double segment_end(const Segment& s);
double segment_n0(const Segment& s);

class Profile {
 public:
  Profile() = default;
  // Segments must be contiguous, ordered and of positive length.
  explicit Profile(std::vector<Segment> segments, double transition_length = 1.0);

  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  double z_start() const { return segments_.empty() ? 0.0 : segment_start(segments_.front()); }
  double z_end() const { return segments_.empty() ? 0.0 : segment_end(segments_.back()); }
  double transition_length() const { return transition_length_; }
  bool has_kerr() const;

  // Segment containing z; a boundary point belongs to the later segment,
  // except z_end which belongs to the last.
  std::size_t segment_index_at(double z) const;
  const Segment& segment_at(double z) const { return segments_[segment_index_at(z)]; }
  double n0_at(double z) const { return segment_n0(segment_at(z)); }
  // Integral of n0 over [z_start, z].
  double integrated_n0(double z) const;

 private:
  std::vector<Segment> segments_;
  double transition_length_ = 1.0;
};

// Potential curvature that matches oscillator width w: a = lambda^2 / (4 pi n0 w^4).
double matched_curvature(double lambda, double n0, double width);
// Oscillator frequency along z for a matched segment: omega = lambda / (2 pi n0 w^2).
double oscillator_frequency(double lambda, double n0, double width);
// Isotropic matched segment on [z0, z1].
QuadraticSegment matched_segment(double z0, double z1, double lambda, double n0, double width);

struct GeneratorSet {
  std::array<std::string, 6> names;
  std::array<CMatrix, 6> matrices;
};

// a^dag a + b^dag b, a^dag + a, (a^dag + a)^2, b^dag + b, (b^dag + b)^2, (a^dag + a)(b^dag + b).
GeneratorSet generator_set(const FockSpace& space);

CMatrix hamiltonian_matrix(const Segment& segment, const FockSpace& space, double lambda);

struct SegmentUnitary {
  CMatrix unitary;
  // Max entry deviation on the N <= 6 block between n_max and n_max + 4.
  double cutoff_deviation = 0.0;
  std::vector<std::string> warnings;
};

SegmentUnitary segment_unitary(const Segment& segment, const FockSpace& space, double lambda,
                               bool check_cutoff = true);

// Later segments act on the left. Empty profiles give the identity.
CMatrix compose_profile_unitary(const Profile& profile, const FockSpace& space, double lambda);

struct SymplecticTransfer {
  RMatrix matrix;  // acts on (x, p_x) or (x, p_x, y, p_y)
  RVector offset;  // affine part from e, f
};

// First-moment transfer over a quadratic segment; dims 1 or 2.
SymplecticTransfer symplectic_transfer(const QuadraticSegment& segment, int dims = 2);
// Transfer over the whole profile (quadratic segments only).
SymplecticTransfer symplectic_transfer(const Profile& profile, int dims = 2);
RMatrix symplectic_form(int dims);
double symplectic_defect(const RMatrix& s);

// Effective potential from indices: U = (pi / n0)(n0^2 - n^2).
double effective_potential(double n0, double n);
// n = sqrt(n0^2 - n0 U / pi) at (x, y, z); l is excluded unless include_offset.
double refractive_index_at(const Profile& profile, double x, double y, double z, bool include_offset = false);
// Throws RealizabilityError when n^2 <= 0 anywhere on |x|, |y| <= half_extent
// (y = 0 only when dims == 1).
void check_realizability(const Profile& profile, double half_extent, int dims = 2);

}  // namespace qlfiber
