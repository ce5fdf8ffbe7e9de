// Truncated one- or two-mode Fock space: ladder operators, Fock, coherent
// and fixed-N bases, the von Neumann coherent lattice, and Hermite-Gauss
// mode functions that connect Fock labels to sampled fields.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qlfiber/grid.hpp"
#include "qlfiber/types.hpp"

namespace qlfiber {

inline constexpr int kDefaultCutoff = 12;

// Basis ordering: state (n1, n2) sits at index n1*(n_max+1) + n2.
// Single-mode spaces use index n1.
class FockSpace {
 public:
  explicit FockSpace(int n_max = kDefaultCutoff, int mode_count = 2);

  int n_max() const { return n_max_; }
  int mode_count() const { return mode_count_; }
  Index dim() const { return mode_count_ == 1 ? Index(n_max_ + 1) : Index(n_max_ + 1) * (n_max_ + 1); }

  Index index(int n1, int n2 = 0) const;
  std::pair<int, int> occupations(Index i) const;
  FockSpace with_cutoff(int n_max) const { return FockSpace(n_max, mode_count_); }

  bool operator==(const FockSpace&) const = default;

 private:
  int n_max_;
  int mode_count_;
};

struct StateVector {
  CVector amplitudes;
  bool normalized = false;
};

struct LadderOperators {
  CMatrix a, a_dag;
  CMatrix b, b_dag;  // empty for single-mode spaces
};

struct JordanSchwinger {
  CMatrix j_plus, j_minus, j_3;

  CMatrix j_x() const { return 0.5 * (j_plus + j_minus); }
  CMatrix j_y() const { return Complex(0.0, -0.5) * (j_plus - j_minus); }
};

struct LatticeIndex {
  int m1 = 0, n1 = 0, m2 = 0, n2 = 0;
  bool operator==(const LatticeIndex&) const = default;
};

struct CoherentLabel {
  Complex alpha{0.0, 0.0};
  Complex beta{0.0, 0.0};
  std::optional<LatticeIndex> lattice_index;
};

struct CoherentState {
  StateVector state;
  // Probability mass retained below the cutoff, sum |c|^2.
  double truncated_norm = 0.0;
};

struct ModeSamples {
  RVector values;
  std::vector<std::string> warnings;
};

LadderOperators ladder_ops(const FockSpace& space);
// a^dag a (mode 0) or b^dag b (mode 1) as a diagonal matrix.
CMatrix number_operator(const FockSpace& space, int mode);

StateVector fock_state(const FockSpace& space, int n1, int n2 = 0);
JordanSchwinger jordan_schwinger(const FockSpace& space);
CoherentState coherent_state(const FockSpace& space, const CoherentLabel& label);

// alpha_{m,n} = (n + i 2 pi m)/sqrt(2).
Complex lattice_point(int m, int n);
CoherentLabel lattice_label(const LatticeIndex& index);

// Labels for m in [-m_range, m_range], n in [-n_range, n_range] on both
// modes, minus the excluded indices (default: the all-zero label).
std::vector<CoherentLabel> von_neumann_lattice(int m_range, int n_range,
                                               const std::vector<LatticeIndex>& excluded = {LatticeIndex{}});

// {|n1, N-n1>, n1 = N..0}.
std::vector<StateVector> fixed_n_basis(const FockSpace& space, int total);

// Normalized Hermite function with unit scale: psi_n(xi).
template <typename Scalar>
Scalar hermite_function(int n, Scalar xi)
{
  using std::exp;
  using std::sqrt;
  const Scalar pi_quarter = Scalar(0.75112554446494248286);  // pi^(-1/4)
  Scalar prev = pi_quarter * exp(-xi * xi / Scalar(2));
  if (n == 0) return prev;
  Scalar cur = sqrt(Scalar(2)) * xi * prev;
  for (int k = 1; k < n; ++k) {
    const Scalar next = sqrt(Scalar(2) / Scalar(k + 1)) * xi * cur - sqrt(Scalar(k) / Scalar(k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// n-th Hermite-Gauss function of scale `width` sampled on the grid's x axis,
// rescaled to unit discrete norm.
ModeSamples hermite_gauss_mode(int n, double width, const TransverseGrid& grid);

}  // namespace qlfiber
