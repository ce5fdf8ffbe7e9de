#include "qlfiber/synth.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>
#include <random>
#include <sstream>

#include "qlfiber/expm.hpp"

namespace qlfiber {

std::string to_string(Backend backend)
{
  return backend == Backend::Algebraic ? "algebraic" : "physical";
}

Backend backend_from_string(const std::string& name)
{
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "algebraic") return Backend::Algebraic;
  if (lower == "physical") return Backend::Physical;
  throw ValidationError("unknown backend '" + name + "' (expected algebraic or physical)");
}

EulerAngles euler_decompose_su2(const CMatrix& target)
{
  if (target.rows() != 2 || target.cols() != 2) throw ValidationError("Euler decomposition needs a 2x2 matrix");
  if (!is_unitary(target, 1e-10)) throw ValidationError("Euler decomposition needs a unitary matrix");
  if (std::abs(target.determinant() - Complex(1.0)) > 1e-10)
    throw ValidationError("Euler decomposition needs det = 1 (strip the global phase first)");
  // V = [[e^{-i(a+g)/2} c, -e^{-i(a-g)/2} s], [e^{i(a-g)/2} s, e^{i(a+g)/2} c]], c = cos(b/2), s = sin(b/2).
  const Complex v00 = target(0, 0);
  const Complex v10 = target(1, 0);
  EulerAngles e;
  e.beta = 2.0 * std::atan2(std::abs(v10), std::abs(v00));
  constexpr double tiny = 1e-14;
  if (std::abs(v10) < tiny) {
    e.alpha = -2.0 * std::arg(v00);
  } else if (std::abs(v00) < tiny) {
    e.alpha = 2.0 * std::arg(v10);
  } else {
    const double sum = -2.0 * std::arg(v00);
    const double diff = 2.0 * std::arg(v10);
    e.alpha = 0.5 * (sum + diff);
    e.gamma = 0.5 * (sum - diff);
  }
  return e;
}

CMatrix su2_from_euler(const EulerAngles& angles)
{
  auto rz = [](double t) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = std::polar(1.0, -0.5 * t);
    m(1, 1) = std::polar(1.0, 0.5 * t);
    return m;
  };
  CMatrix ry(2, 2);
  const double c = std::cos(0.5 * angles.beta);
  const double s = std::sin(0.5 * angles.beta);
  ry << c, -s, s, c;
  return rz(angles.alpha) * ry * rz(angles.gamma);
}

CandidateScore evaluate_candidate(const Profile& profile, const QulbitCode& code, const CMatrix& target, double lambda)
{
  const CMatrix u = compose_profile_unitary(profile, code.space, lambda);
  const GateReport r = extract_gate(u, code, target);
  return CandidateScore{*r.fidelity, r.leakage};
}

namespace {

// Idealized generators restricted to an invariant index set.
struct RotationGenerators {
  std::vector<Index> indices;  // full-space indices kept
  CMatrix j3, jx, jy, kerr;
};

RotationGenerators rotation_generators(const FockSpace& space, const std::vector<Index>& keep)
{
  const JordanSchwinger js = jordan_schwinger(space);
  const CMatrix kerr = number_operator(space, 0) * number_operator(space, 1);
  RotationGenerators g;
  g.indices = keep;
  const Index n = static_cast<Index>(keep.size());
  auto restrict = [&](const CMatrix& m) {
    CMatrix r(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) r(i, j) = m(keep[i], keep[j]);
    return r;
  };
  g.j3 = restrict(js.j_3);
  g.jx = restrict(js.j_x());
  g.jy = restrict(js.j_y());
  g.kerr = restrict(kerr);
  return g;
}

CMatrix restricted_sequence(const std::vector<RotationStep>& steps, const RotationGenerators& g)
{
  CMatrix u = CMatrix::Identity(g.j3.rows(), g.j3.cols());
  for (const auto& s : steps) {
    const CMatrix h = s.theta_3 * g.j3 + s.theta_x * g.jx + s.theta_y * g.jy + s.theta_kerr * g.kerr;
    u = expm(Complex(0.0, -1.0) * h) * u;
  }
  return u;
}

// Indices of every fixed-N block that the code touches; all rotation
// generators preserve these blocks.
std::vector<Index> touched_blocks(const QulbitCode& code)
{
  std::vector<bool> block(2 * code.space.n_max() + 1, false);
  for (const auto& s : code.states)
    for (Index i = 0; i < s.amplitudes.size(); ++i)
      if (std::abs(s.amplitudes(i)) > 0.0) {
        const auto [n1, n2] = code.space.occupations(i);
        block[n1 + n2] = true;
      }
  std::vector<Index> keep;
  for (Index i = 0; i < code.space.dim(); ++i) {
    const auto [n1, n2] = code.space.occupations(i);
    if (block[n1 + n2]) keep.push_back(i);
  }
  return keep;
}

GateReport score_rotations(const std::vector<RotationStep>& steps, const RotationGenerators& g, const QulbitCode& code,
                           const CMatrix& target)
{
  const CMatrix p_full = code.basis();
  CMatrix p(static_cast<Index>(g.indices.size()), p_full.cols());
  for (Index i = 0; i < p.rows(); ++i) p.row(i) = p_full.row(g.indices[i]);
  const CMatrix u = restricted_sequence(steps, g);
  GateReport r;
  r.extracted = p.adjoint() * u * p;
  r.leakage = block_leakage(r.extracted);
  r.fidelity = std::clamp(gate_fidelity(r.extracted, target), 0.0, 1.0);
  r.global_phase = std::arg((target.adjoint() * r.extracted).trace());
  return r;
}

constexpr std::array<const char*, 6> kPhysicalKeys = {"length", "a", "b", "d", "e", "f"};

struct Layout {
  // Per quadratic segment: indices into the parameter vector (or -1 = fixed).
  std::vector<std::array<int, 6>> slots;
  std::vector<int> kerr_slots;  // one per Kerr segment
  std::vector<Bounds> bounds;
  std::array<double, 6> fixed{};  // defaults for parameters not searched
};

}  // namespace

SegmentAction::SegmentAction(const FockSpace& space, double lambda) : space_(space), lambda_(lambda)
{
  if (space.mode_count() != 2) throw ValidationError("SegmentAction needs a two-mode space");
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  const FockSpace one(space.n_max(), 1);
  const LadderOperators ops = ladder_ops(one);
  const double s = 1.0 / std::sqrt(2.0);
  x_ = s * (ops.a + ops.a_dag);
  p_ = Complex(0.0, s) * (ops.a_dag - ops.a);

  const CMatrix jy = jordan_schwinger(space).j_y();
  for (int total = 0; total <= 2 * space.n_max(); ++total) {
    Block b;
    for (Index i = 0; i < space.dim(); ++i) {
      const auto [n1, n2] = space.occupations(i);
      if (n1 + n2 == total) b.indices.push_back(i);
    }
    const Index m = static_cast<Index>(b.indices.size());
    CMatrix sub(m, m);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) sub(i, j) = 2.0 * jy(b.indices[i], b.indices[j]);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sub);
    b.eigenvalues = es.eigenvalues();
    b.eigenvectors = es.eigenvectors();
    blocks_.push_back(std::move(b));
  }
}

CMatrix SegmentAction::rotate(const CMatrix& columns, double angle) const
{
  CMatrix out(columns.rows(), columns.cols());
  for (const auto& b : blocks_) {
    const Index m = static_cast<Index>(b.indices.size());
    CMatrix sub(m, columns.cols());
    for (Index i = 0; i < m; ++i) sub.row(i) = columns.row(b.indices[i]);
    CVector phases(m);
    for (Index k = 0; k < m; ++k) phases(k) = std::polar(1.0, -angle * b.eigenvalues(k));
    const CMatrix r = b.eigenvectors * phases.asDiagonal() * (b.eigenvectors.adjoint() * sub);
    for (Index i = 0; i < m; ++i) out.row(b.indices[i]) = r.row(i);
  }
  return out;
}

CMatrix SegmentAction::one_mode_unitary(double a, double e, double l, const QuadraticSegment& seg) const
{
  const double w = seg.mode_width;
  const double kin = lambda_ * lambda_ / (w * w) / (4.0 * kPi * seg.n0);
  CMatrix h = kin * (p_ * p_) + (a * w * w) * (x_ * x_) + (e * w) * x_;
  h.diagonal().array() += l;
  h = 0.5 * (h + h.adjoint()).eval();
  return expm(Complex(0.0, -seg.length() / lambda_) * h);
}

CMatrix SegmentAction::apply(const Segment& segment, const CMatrix& columns) const
{
  if (columns.rows() != space_.dim()) throw ValidationError("column count does not match the space");
  const int n = space_.n_max() + 1;
  if (const auto* k = std::get_if<KerrSegment>(&segment)) {
    CMatrix out = columns;
    for (Index i = 0; i < space_.dim(); ++i) {
      const auto [n1, n2] = space_.occupations(i);
      out.row(i) *= std::polar(1.0, -k->eta * k->length() * n1 * n2);
    }
    return out;
  }
  const auto& q = std::get<QuadraticSegment>(segment);
  // Principal axes of a x^2 + b y^2 + d x y: u = c x + s y, v = -s x + c y.
  const double theta = 0.5 * std::atan2(q.d, q.a - q.b);
  const double c = std::cos(theta), s = std::sin(theta);
  const double au = q.a * c * c + q.b * s * s + q.d * s * c;
  const double av = q.a * s * s + q.b * c * c - q.d * s * c;
  const CMatrix ua = one_mode_unitary(au, q.e * c + q.f * s, q.l, q);
  const CMatrix ub = one_mode_unitary(av, -q.e * s + q.f * c, 0.0, q);

  CMatrix work = rotate(columns, -theta);
  for (Index col = 0; col < work.cols(); ++col) {
    Eigen::Map<Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(work.col(col).data(), n, n);
    m = (ua * m * ub.transpose()).eval();
  }
  return rotate(work, theta);
}

CMatrix rotation_sequence_unitary(const std::vector<RotationStep>& steps, const FockSpace& space)
{
  std::vector<Index> all(static_cast<std::size_t>(space.dim()));
  std::iota(all.begin(), all.end(), Index(0));
  return restricted_sequence(steps, rotation_generators(space, all));
}

Bounds default_bounds(const SynthesisProblem& problem, const std::string& key)
{
  static const std::array<const char*, 8> known{"angle", "kerr_phase", "length", "a", "b", "d", "e", "f"};
  if (std::find(known.begin(), known.end(), key) == known.end())
    throw ValidationError("unknown synthesis parameter '" + key + "'");
  const auto it = problem.free_parameters.find(key);
  if (it != problem.free_parameters.end()) {
    if (!(it->second.lo <= it->second.hi)) throw ValidationError("free_parameters." + key + ": lo > hi");
    return it->second;
  }
  const double a0 = matched_curvature(problem.lambda, problem.n0, problem.mode_width);
  const double period = 2.0 * kPi / oscillator_frequency(problem.lambda, problem.n0, problem.mode_width);
  if (key == "angle") return {-2.0 * kPi, 2.0 * kPi};
  if (key == "kerr_phase") return {-kPi, kPi};
  if (key == "length") return {0.05 * period, 2.0 * period};
  if (key == "a" || key == "b") return {0.8 * a0, 1.2 * a0};
  if (key == "d") return {-0.2 * a0, 0.2 * a0};
  if (key == "e" || key == "f") return {0.0, 0.0};
  throw ValidationError("unknown synthesis parameter '" + key + "'");
}

OptimizerResult maximize_in_box(const std::function<double(const RVector&)>& objective, const RVector& start,
                                const std::vector<Bounds>& bounds, const OptimizerOptions& options,
                                const std::function<void(int, double)>& on_iteration)
{
  const Index n = start.size();
  OptimizerResult out;
  auto clamp = [&](RVector x) {
    for (Index i = 0; i < n; ++i) x(i) = std::clamp(x(i), bounds[i].lo, bounds[i].hi);
    return x;
  };
  auto eval = [&](const RVector& x) {
    const RVector c = clamp(x);
    const double v = objective(c);
    ++out.evaluations;
    if (v > out.best_value) {
      out.best_value = v;
      out.best = c;
    }
    return v;
  };
  auto budget_left = [&] { return out.evaluations < options.max_evaluations; };

  RVector x0 = clamp(start);
  if (n == 0) {
    eval(x0);
    out.converged = true;
    return out;
  }

  // Simplex search.
  std::vector<RVector> simplex{x0};
  std::vector<double> values{eval(x0)};
  for (Index i = 0; i < n && budget_left(); ++i) {
    RVector x = x0;
    const double width = bounds[i].hi - bounds[i].lo;
    const double step = width > 0.0 ? options.initial_step * width : 0.0;
    x(i) = x0(i) + step <= bounds[i].hi ? x0(i) + step : x0(i) - step;
    simplex.push_back(x);
    values.push_back(eval(x));
  }
  std::vector<double> history;
  while (budget_left() && static_cast<Index>(simplex.size()) == n + 1) {
    std::vector<std::size_t> order(simplex.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<RVector> s2;
    std::vector<double> v2;
    for (auto k : order) {
      s2.push_back(simplex[k]);
      v2.push_back(values[k]);
    }
    simplex.swap(s2);
    values.swap(v2);

    ++out.iterations;
    history.push_back(out.best_value);
    if (on_iteration) on_iteration(out.iterations, out.best_value);
    const int hist = static_cast<int>(history.size());
    if (hist > options.stall_iterations &&
        history.back() - history[hist - 1 - options.stall_iterations] < options.stall_tolerance) {
      out.converged = true;
      break;
    }

    RVector centroid = RVector::Zero(n);
    for (Index k = 0; k < n; ++k) centroid += simplex[k];
    centroid /= static_cast<double>(n);
    const RVector& worst = simplex[n];
    const RVector xr = clamp(centroid + (centroid - worst));
    const double fr = eval(xr);
    if (fr > values[0] && budget_left()) {
      const RVector xe = clamp(centroid + 2.0 * (centroid - worst));
      const double fe = eval(xe);
      if (fe > fr) {
        simplex[n] = xe;
        values[n] = fe;
      } else {
        simplex[n] = xr;
        values[n] = fr;
      }
    } else if (fr > values[n - 1]) {
      simplex[n] = xr;
      values[n] = fr;
    } else if (budget_left()) {
      const bool outside = fr > values[n];
      const RVector xc = outside ? RVector(centroid + 0.5 * (xr - centroid)) : RVector(centroid + 0.5 * (worst - centroid));
      const double fc = eval(xc);
      if (fc > std::max(values[n], outside ? fr : values[n])) {
        simplex[n] = xc;
        values[n] = fc;
      } else {
        for (Index k = 1; k <= n && budget_left(); ++k) {
          simplex[k] = clamp(simplex[0] + 0.5 * (simplex[k] - simplex[0]));
          values[k] = eval(simplex[k]);
        }
      }
    }
  }

  // Finite-difference gradient refinement from the best point.
  RVector x = out.best;
  double fx = out.best_value;
  RVector h(n);
  for (Index i = 0; i < n; ++i) h(i) = 1e-6 * std::max(bounds[i].hi - bounds[i].lo, 1e-12);
  for (int it = 0; it < 100 && budget_left(); ++it) {
    RVector g = RVector::Zero(n);
    for (Index i = 0; i < n && budget_left(); ++i) {
      if (bounds[i].hi <= bounds[i].lo) continue;
      RVector xp = x, xm = x;
      xp(i) += h(i);
      xm(i) -= h(i);
      g(i) = (eval(xp) - eval(xm)) / (2.0 * h(i));
    }
    const double gnorm = g.norm();
    if (!(gnorm > 0.0)) break;
    double t = 1e-2;
    bool improved = false;
    while (t > 1e-12 && budget_left()) {
      const RVector trial = clamp(x + t * g / gnorm);
      const double ft = eval(trial);
      if (ft > fx + 1e-15) {
        improved = ft - fx >= options.stall_tolerance;
        x = trial;
        fx = ft;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  return out;
}

SynthesisResult synthesize(const SynthesisProblem& problem)
{
  if (problem.max_segments < 1) throw ValidationError("max_segments must be >= 1");
  if (problem.restarts < 1) throw ValidationError("restarts must be >= 1");
  if (!(problem.lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (problem.leakage_weight < 0.0) throw ValidationError("leakage_weight must be non-negative");
  for (const auto& entry : problem.free_parameters) default_bounds(problem, entry.first);
  const FockSpace space(problem.cutoff, 2);
  const QulbitCode code = make_code(problem.code, space);
  const CMatrix& target = problem.target;
  if (target.rows() != code.logical_dim || target.cols() != code.logical_dim)
    throw ValidationError("target dimension does not match the code");
  if (!is_unitary(target, 1e-10)) throw ValidationError("target is not unitary to 1e-10");

  SynthesisResult result;
  result.backend = problem.backend;

  // Identity (up to phase) needs no segments.
  if (gate_fidelity(CMatrix::Identity(code.logical_dim, code.logical_dim), target) > 1.0 - 1e-12) {
    const Profile empty;
    const CandidateScore s = evaluate_candidate(empty, code, target, problem.lambda);
    result.profile = problem.backend == Backend::Physical ? std::optional<Profile>(empty) : std::nullopt;
    result.achieved = extract_gate(CMatrix::Identity(space.dim(), space.dim()), code).extracted;
    result.fidelity = s.fidelity;
    result.leakage = s.leakage;
    result.objective = s.fidelity - problem.leakage_weight * s.leakage;
    result.converged = true;
    result.evaluations = 1;
    result.best_restart = 0;
    return result;
  }

  if (problem.backend == Backend::Algebraic) {
    const RotationGenerators gens = rotation_generators(space, touched_blocks(code));

    if (problem.code == CodeKind::N7 && problem.max_segments >= 3) {
      // Exact route: strip the phase so det = 1, then ZYZ Euler angles.
      const Complex det = target.determinant();
      const CMatrix special = target * std::polar(1.0, -0.5 * std::arg(det));
      const EulerAngles e = euler_decompose_su2(special);
      result.rotations = {RotationStep{e.gamma, 0, 0, 0}, RotationStep{0, 0, e.beta, 0}, RotationStep{e.alpha, 0, 0, 0}};
      const GateReport r = score_rotations(result.rotations, gens, code, target);
      result.achieved = r.extracted;
      result.fidelity = *r.fidelity;
      result.leakage = r.leakage;
      result.objective = result.fidelity - problem.leakage_weight * result.leakage;
      result.converged = true;
      result.evaluations = 1;
      result.best_restart = 0;
      result.trace.push_back({0, result.objective, result.fidelity, result.leakage});
      return result;
    }

    const int per_step = problem.allow_kerr ? 4 : 3;
    const Bounds angle = default_bounds(problem, "angle");
    const Bounds kerr = default_bounds(problem, "kerr_phase");
    std::vector<Bounds> bounds;
    for (int s = 0; s < problem.max_segments; ++s) {
      bounds.insert(bounds.end(), {angle, angle, angle});
      if (problem.allow_kerr) bounds.push_back(kerr);
    }
    auto decode = [&](const RVector& v) {
      std::vector<RotationStep> steps(static_cast<std::size_t>(problem.max_segments));
      for (int s = 0; s < problem.max_segments; ++s) {
        auto& st = steps[static_cast<std::size_t>(s)];
        st.theta_3 = v(s * per_step);
        st.theta_x = v(s * per_step + 1);
        st.theta_y = v(s * per_step + 2);
        if (problem.allow_kerr) st.theta_kerr = v(s * per_step + 3);
      }
      return steps;
    };

    struct Best {
      double objective = -std::numeric_limits<double>::infinity();
      RVector params;
      int restart = -1;
    } best;
    int iteration_base = 0;
    const int budget = std::max(1, problem.max_evaluations / problem.restarts);
    bool any_converged = false;
    for (int r = 0; r < problem.restarts; ++r) {
      std::seed_seq seq{static_cast<std::uint32_t>(problem.seed), static_cast<std::uint32_t>(problem.seed >> 32),
                        static_cast<std::uint32_t>(r)};
      std::mt19937_64 rng(seq);
      RVector start(static_cast<Index>(bounds.size()));
      for (Index i = 0; i < start.size(); ++i)
        start(i) = std::uniform_real_distribution<double>(bounds[i].lo, bounds[i].hi)(rng);
      auto objective = [&](const RVector& v) {
        const GateReport rep = score_rotations(decode(v), gens, code, target);
        return *rep.fidelity - problem.leakage_weight * rep.leakage;
      };
      OptimizerOptions opts;
      opts.max_evaluations = budget;
      const OptimizerResult o = maximize_in_box(objective, start, bounds, opts, [&](int it, double v) {
        const double global = std::max(v, best.objective);
        result.trace.push_back({iteration_base + it, global, 0.0, 0.0});
      });
      iteration_base += o.iterations;
      result.evaluations += o.evaluations;
      any_converged = any_converged || o.converged;
      if (o.best_value > best.objective) {
        best = {o.best_value, o.best, r};
      }
    }
    result.rotations = decode(best.params);
    const GateReport rep = score_rotations(result.rotations, gens, code, target);
    result.achieved = rep.extracted;
    result.fidelity = *rep.fidelity;
    result.leakage = rep.leakage;
    result.objective = best.objective;
    result.iterations = iteration_base;
    result.converged = any_converged;
    result.best_restart = best.restart;
    for (auto& p : result.trace) {
      p.fidelity = std::max(p.fidelity, 0.0);
    }
    return result;
  }

  // PHYSICAL backend.
  const SegmentAction action(space, problem.lambda);
  Layout layout;
  for (std::size_t k = 0; k < kPhysicalKeys.size(); ++k) {
    const Bounds b = default_bounds(problem, kPhysicalKeys[k]);
    if (b.hi < b.lo) throw ValidationError(std::string("infeasible bounds for ") + kPhysicalKeys[k]);
    layout.fixed[k] = 0.5 * (b.lo + b.hi);
  }
  if (default_bounds(problem, "length").lo < 0.0) throw ValidationError("segment length bounds must be non-negative");
  for (int s = 0; s < problem.max_segments; ++s) {
    std::array<int, 6> slots{};
    for (std::size_t k = 0; k < kPhysicalKeys.size(); ++k) {
      const Bounds b = default_bounds(problem, kPhysicalKeys[k]);
      if (b.hi > b.lo) {
        slots[k] = static_cast<int>(layout.bounds.size());
        layout.bounds.push_back(b);
      } else {
        slots[k] = -1;
      }
    }
    layout.slots.push_back(slots);
    if (problem.allow_kerr && s + 1 < problem.max_segments) {
      layout.kerr_slots.push_back(static_cast<int>(layout.bounds.size()));
      layout.bounds.push_back(default_bounds(problem, "kerr_phase"));
    }
  }

  auto value = [&](const RVector& v, int seg, std::size_t key) {
    const int slot = layout.slots[static_cast<std::size_t>(seg)][key];
    return slot >= 0 ? v(slot) : layout.fixed[key];
  };
  // Kerr segments have unit length; eta carries the phase (U = exp(-i eta n_a n_b)).
  auto build_profile = [&](const RVector& v) {
    std::vector<Segment> segs;
    double z = 0.0;
    for (int s = 0; s < problem.max_segments; ++s) {
      const double len = value(v, s, 0);
      if (len > 1e-12) {
        QuadraticSegment q;
        q.z0 = z;
        q.z1 = z + len;
        q.a = value(v, s, 1);
        q.b = value(v, s, 2);
        q.d = value(v, s, 3);
        q.e = value(v, s, 4);
        q.f = value(v, s, 5);
        q.n0 = problem.n0;
        q.mode_width = problem.mode_width;
        segs.emplace_back(q);
        z = q.z1;
      }
      if (problem.allow_kerr && s + 1 < problem.max_segments) {
        KerrSegment k;
        k.z0 = z;
        k.z1 = z + 1.0;
        k.eta = v(layout.kerr_slots[static_cast<std::size_t>(s)]);
        segs.emplace_back(k);
        z = k.z1;
      }
    }
    return Profile(std::move(segs));
  };
  const CMatrix p = code.basis();
  auto apply_profile = [&](const Profile& prof) {
    CMatrix cols = p;
    for (const auto& seg : prof.segments()) cols = action.apply(seg, cols);
    return cols;
  };
  auto score = [&](const RVector& v) {
    const CMatrix block = p.adjoint() * apply_profile(build_profile(v));
    return CandidateScore{std::clamp(gate_fidelity(block, target), 0.0, 1.0), block_leakage(block)};
  };

  struct Best {
    double objective = -std::numeric_limits<double>::infinity();
    RVector params;
    int restart = -1;
  } best;
  int iteration_base = 0;
  const int budget = std::max(1, problem.max_evaluations / problem.restarts);
  bool any_converged = false;
  double best_fid = 0.0, best_leak = 0.0;
  for (int r = 0; r < problem.restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(problem.seed), static_cast<std::uint32_t>(problem.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    RVector start(static_cast<Index>(layout.bounds.size()));
    for (Index i = 0; i < start.size(); ++i)
      start(i) = std::uniform_real_distribution<double>(layout.bounds[i].lo, layout.bounds[i].hi)(rng);
    auto objective = [&](const RVector& v) {
      const CandidateScore s = score(v);
      const double obj = s.fidelity - problem.leakage_weight * s.leakage;
      if (obj > best.objective) {
        best_fid = s.fidelity;
        best_leak = s.leakage;
      }
      return obj;
    };
    OptimizerOptions opts;
    opts.max_evaluations = budget;
    double restart_best = -std::numeric_limits<double>::infinity();
    const OptimizerResult o = maximize_in_box(
        [&](const RVector& v) {
          const double obj = objective(v);
          if (obj > best.objective) best = {obj, v, r};
          restart_best = std::max(restart_best, obj);
          return obj;
        },
        start, layout.bounds, opts,
        [&](int it, double) { result.trace.push_back({iteration_base + it, best.objective, best_fid, best_leak}); });
    iteration_base += o.iterations;
    result.evaluations += o.evaluations;
    any_converged = any_converged || o.converged;
  }

  const Profile prof = build_profile(best.params);
  // Final numbers come from the reference full-space unitaries.
  const GateReport rep = extract_gate(compose_profile_unitary(prof, space, problem.lambda), code, target);
  result.profile = prof;
  result.achieved = rep.extracted;
  result.fidelity = std::clamp(*rep.fidelity, 0.0, 1.0);
  result.leakage = rep.leakage;
  result.objective = best.objective;
  result.iterations = iteration_base;
  result.converged = any_converged;
  result.best_restart = best.restart;
  return result;
}

}  // namespace qlfiber
