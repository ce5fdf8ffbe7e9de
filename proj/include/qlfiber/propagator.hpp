// Split-step spectral solver for the paraxial envelope equation
//
//   i lambda d(psi)/dz = -lambda^2 / (4 pi n0) (d_x^2 + d_y^2) psi + U(x, y, z) psi
//                        - kappa |psi|^2 psi  (optional intensity-dependent index)
//
// on a periodic transverse grid, plus diagnostics: norm, moments, mode
// projections, paraxial validity and reconstruction of the physical field.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "qlfiber/grid.hpp"
#include "qlfiber/hilbert.hpp"
#include "qlfiber/profiles.hpp"
#include "qlfiber/types.hpp"

namespace qlfiber {

enum class FftPlanning {
  Estimate,  // planner heuristics; bit-identical across runs
  Measure,   // timed planning; faster steps, plan may differ between runs
  Patient,   // wider timed search; seconds of setup on large 2D grids
};

struct PropagationParams {
  double lambda = 1.0;
  double dz = 1e-3;
  int scheme = 2;  // only Strang splitting is provided
  double nonlinear_kappa = 0.0;
  FftPlanning planning = FftPlanning::Estimate;
};

struct Field {
  CVector psi;
  double z = 0.0;
  TransverseGrid grid;
  double initial_norm = 1.0;

  double norm() const { return psi.squaredNorm() * grid.cell(); }
};

struct ModeIndex {
  int n1 = 0;
  int n2 = 0;
  bool operator==(const ModeIndex&) const = default;
};

struct ExplicitSamples {
  CVector psi;
};

using FieldSpec = std::variant<ModeIndex, CoherentLabel, ExplicitSamples>;

// Normalized field at z = 0. Coherent labels use the exact displaced Gaussian
// <x|alpha> with oscillator width `width`.
Field initialize_field(const TransverseGrid& grid, const FieldSpec& spec, double width);

// Max |psi|^2 on the grid boundary relative to the peak.
double edge_intensity_ratio(const Field& field);

// Holds FFT plans, a work buffer and cached phase factors for one grid.
class SplitStepper {
 public:
  SplitStepper(const TransverseGrid& grid, const PropagationParams& params);
  ~SplitStepper();
  SplitStepper(const SplitStepper&) = delete;
  SplitStepper& operator=(const SplitStepper&) = delete;

  // Throws StepSizeError when step h cannot resolve the segment's phases.
  void check_step(const Field& field, const Segment& segment, double h);

  // Unfused V(h/2) K(h) V(h/2) with the potential of `segment`.
  void strang_step(Field& field, const Segment& segment, double h);

  // Propagate `field` through `profile` to z_end with Strang steps; half
  // potential steps between consecutive full steps are fused.
  struct Observer {
    int every = 0;  // call `on_sample` every `every` steps (0: never)
    std::function<void(const Field&)> on_sample;
  };
  long advance(Field& field, const Profile& profile, double z_end, const Observer& observer);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One Strang step of params.dz; the segment is the one holding the step midpoint.
Field split_step(const Field& field, const Profile& profile, const PropagationParams& params);

struct TraceOptions {
  int sample_every = 0;  // steps between trace rows; endpoints are always recorded
  std::vector<ModeIndex> overlaps;
  double mode_width = 1.0;
};

struct TraceRow {
  double z = 0.0;
  double norm = 0.0;
  double mean_x = 0.0, mean_px = 0.0, mean_y = 0.0, mean_py = 0.0;
  std::vector<Complex> overlaps;
};

struct PropagationResult {
  Field field;
  std::vector<TraceRow> trace;
  std::vector<std::string> warnings;
  long steps = 0;
};

PropagationResult propagate(const Field& field, const Profile& profile, const PropagationParams& params,
                            double z_end, const TraceOptions& options = {});

struct ParaxialReport {
  double ratio = 0.0;
  bool flagged = false;
  double z_at_max = 0.0;
};

// max over segment boundaries of (lambda / n0^2) |dn0/dz|, with jumps spread
// over the profile's transition length.
ParaxialReport paraxial_check(const Profile& profile, const PropagationParams& params, double threshold = 0.01);

struct Moments {
  double mean_x = 0.0, mean_px = 0.0, mean_y = 0.0, mean_py = 0.0;
  double mean_x2 = 0.0, mean_px2 = 0.0, mean_y2 = 0.0, mean_py2 = 0.0;

  double rms_width_x() const { return std::sqrt(std::max(0.0, mean_x2 - mean_x * mean_x)); }
};

// Position moments by quadrature; momentum moments spectrally with p = -i lambda d/dx.
Moments field_moments(const Field& field, const PropagationParams& params);

struct ModeTable {
  int max_n = 0;
  int dims = 1;
  // amplitudes(n1, n2) for n1 + n2 <= max_n; n2 = 0 column only in 1D.
  CMatrix amplitudes;
  std::vector<std::string> warnings;

  Complex at(int n1, int n2 = 0) const { return amplitudes(n1, n2); }
  double total_weight() const { return amplitudes.squaredNorm(); }
};

ModeTable project_onto_modes(const Field& field, double width, int max_n);

// E = n0(z)^(-1/2) psi exp(i (2 pi / lambda) int_0^z n0).
CVector reconstruct_field(const Field& field, const Profile& profile, const PropagationParams& params);

}  // namespace qlfiber
