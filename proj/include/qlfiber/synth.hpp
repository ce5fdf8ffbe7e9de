// Synthesis of index profiles that realize target gates on a qulbit code.
//
// ALGEBRAIC backend: sequences of idealized su(2) rotations (optionally with
// cross-Kerr phases) applied directly in Fock space; single-qulbit targets on
// the N7 code are solved exactly by a ZYZ Euler decomposition.
// PHYSICAL backend: piecewise quadratic index segments (full Hamiltonians,
// counter-rotating terms included), optionally interleaved with Kerr
// segments, tuned by seeded simplex search plus finite-difference refinement.
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qlfiber/gates.hpp"
#include "qlfiber/profiles.hpp"
#include "qlfiber/types.hpp"

namespace qlfiber {

enum class Backend { Algebraic, Physical };

std::string to_string(Backend backend);
Backend backend_from_string(const std::string& name);

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct SynthesisProblem {
  CMatrix target;
  CodeKind code = CodeKind::N7;
  int cutoff = kDefaultCutoff;
  Backend backend = Backend::Algebraic;
  double lambda = 1.0;
  int max_segments = 3;
  double leakage_weight = 1.0;
  std::uint64_t seed = 0;
  int restarts = 4;
  bool allow_kerr = false;
  int max_evaluations = 10000;  // shared by all restarts
  // Physical segments: axial index and Fock-basis width.
  double n0 = 1.5;
  double mode_width = 1.0;
  // Per-segment search ranges. PHYSICAL keys: length, a, b, d, e, f, kerr_phase;
  // ALGEBRAIC keys: angle, kerr_phase. Missing keys take defaults (see default_bounds).
  std::map<std::string, Bounds> free_parameters;
};

// One idealized segment: exp(-i (theta_3 J3 + theta_x Jx + theta_y Jy + theta_kerr n_a n_b)).
struct RotationStep {
  double theta_3 = 0.0;
  double theta_x = 0.0;
  double theta_y = 0.0;
  double theta_kerr = 0.0;
};

struct ConvergencePoint {
  int iteration = 0;
  double objective = 0.0;
  double fidelity = 0.0;
  double leakage = 0.0;
};

struct SynthesisResult {
  Backend backend = Backend::Algebraic;
  std::optional<Profile> profile;     // PHYSICAL
  std::vector<RotationStep> rotations;  // ALGEBRAIC
  CMatrix achieved;                   // extracted logical block
  double fidelity = 0.0;
  double leakage = 0.0;
  double objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  int best_restart = -1;
  std::vector<ConvergencePoint> trace;
};

// V = Rz(alpha) Ry(beta) Rz(gamma), Rz(t) = exp(-i t J3), Ry(t) = exp(-i t Jy) on
// the spin-1/2 code in (|1], |0]) order.
struct EulerAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

EulerAngles euler_decompose_su2(const CMatrix& target);
CMatrix su2_from_euler(const EulerAngles& angles);

struct CandidateScore {
  double fidelity = 0.0;
  double leakage = 0.0;
};

CandidateScore evaluate_candidate(const Profile& profile, const QulbitCode& code, const CMatrix& target,
                                  double lambda);

// Full-space unitary of an idealized rotation sequence (first step acts first).
CMatrix rotation_sequence_unitary(const std::vector<RotationStep>& steps, const FockSpace& space);

Bounds default_bounds(const SynthesisProblem& problem, const std::string& key);

// Applies segments to a few state columns without forming the full unitary.
// A quadratic segment is rotated in the transverse plane (generator 2 Jy) so
// that it splits into two one-mode oscillators. Agrees with segment_unitary
// on states well below the cutoff; the truncation errors differ near it.
class SegmentAction {
 public:
  SegmentAction(const FockSpace& space, double lambda);
  CMatrix apply(const Segment& segment, const CMatrix& columns) const;

 private:
  struct Block {
    std::vector<Index> indices;
    RVector eigenvalues;
    CMatrix eigenvectors;
  };
  CMatrix rotate(const CMatrix& columns, double angle) const;
  CMatrix one_mode_unitary(double a, double e, double l, const QuadraticSegment& seg) const;

  FockSpace space_;
  double lambda_;
  CMatrix x_, p_;  // one-mode dimensionless quadratures
  std::vector<Block> blocks_;
};

SynthesisResult synthesize(const SynthesisProblem& problem);

// Box-constrained maximization used by synthesize; exposed for testing.
struct OptimizerOptions {
  int max_evaluations = 10000;
  double stall_tolerance = 1e-9;
  int stall_iterations = 50;
  double initial_step = 0.1;  // fraction of each bound's width
};

struct OptimizerResult {
  RVector best;
  double best_value = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// `objective` is maximized; `on_iteration` sees (iteration, best value so far).
OptimizerResult maximize_in_box(const std::function<double(const RVector&)>& objective, const RVector& start,
                                const std::vector<Bounds>& bounds, const OptimizerOptions& options,
                                const std::function<void(int, double)>& on_iteration = {});

}  // namespace qlfiber
