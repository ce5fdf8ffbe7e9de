#include "qlfiber/propagator.hpp"

#include <map>
#include <mutex>
#include <sstream>

#include <fftw3.h>

namespace qlfiber {

namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex()
{
  static std::mutex m;
  return m;
}

// In-place forward/backward transforms on an FFTW-aligned buffer. The
// backward transform is unnormalized.
class FftBuffer {
 public:
  FftBuffer(const TransverseGrid& grid, FftPlanning planning) : size_(grid.size())
  {
    data_ = fftw_alloc_complex(static_cast<std::size_t>(size_));
    const unsigned flags = planning == FftPlanning::Patient ? FFTW_PATIENT
                           : planning == FftPlanning::Measure ? FFTW_MEASURE
                                                              : FFTW_ESTIMATE;
    const int n = grid.points();
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (grid.dims() == 1) {
      forward_ = fftw_plan_dft_1d(n, data_, data_, FFTW_FORWARD, flags);
      backward_ = fftw_plan_dft_1d(n, data_, data_, FFTW_BACKWARD, flags);
    } else {
      forward_ = fftw_plan_dft_2d(n, n, data_, data_, FFTW_FORWARD, flags);
      backward_ = fftw_plan_dft_2d(n, n, data_, data_, FFTW_BACKWARD, flags);
    }
  }

  ~FftBuffer()
  {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(backward_);
    }
    fftw_free(data_);
  }

  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  Eigen::Map<CVector> view() { return {reinterpret_cast<Complex*>(data_), size_}; }
  void forward() { fftw_execute(forward_); }
  void backward() { fftw_execute(backward_); }

 private:
  Index size_;
  fftw_complex* data_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

// |k|^2 over the grid in transform order.
RVector squared_wavenumbers(const TransverseGrid& grid)
{
  const RVector k = grid.wavenumbers();
  if (grid.dims() == 1) return k.array().square();
  const Index n = grid.points();
  RVector k2(grid.size());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) k2(i * n + j) = k(i) * k(i) + k(j) * k(j);
  return k2;
}

RVector potential_samples(const TransverseGrid& grid, const QuadraticSegment& seg)
{
  const RVector x = grid.axis();
  if (grid.dims() == 1) {
    RVector u(x.size());
    for (Index i = 0; i < x.size(); ++i) u(i) = seg.potential(x(i), 0.0);
    return u;
  }
  const Index n = grid.points();
  RVector u(grid.size());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) u(i * n + j) = seg.potential(x(i), x(j));
  return u;
}

const QuadraticSegment& require_quadratic(const Segment& segment)
{
  const auto* q = std::get_if<QuadraticSegment>(&segment);
  if (!q)
    throw ValidationError("Kerr segments have no transverse-field realization; use the algebraic layer");
  return *q;
}

double peak_intensity(const CVector& psi)
{
  return psi.size() ? psi.cwiseAbs2().maxCoeff() : 0.0;
}

}  // namespace

Field initialize_field(const TransverseGrid& grid, const FieldSpec& spec, double width)
{
  if (!(width > 0.0)) throw ValidationError("mode width must be positive");
  Field field{CVector(grid.size()), 0.0, grid, 1.0};
  const Index n = grid.points();

  if (const auto* mode = std::get_if<ModeIndex>(&spec)) {
    if (grid.dims() == 1 && mode->n2 != 0) throw ValidationError("1D grid cannot hold a second mode index");
    const RVector hx = hermite_gauss_mode(mode->n1, width, grid).values;
    if (grid.dims() == 1) {
      field.psi = hx.cast<Complex>();
    } else {
      const RVector hy = hermite_gauss_mode(mode->n2, width, grid).values;
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) field.psi(i * n + j) = hx(i) * hy(j);
    }
  } else if (const auto* label = std::get_if<CoherentLabel>(&spec)) {
    if (grid.dims() == 1 && label->beta != Complex(0.0))
      throw ValidationError("1D grid cannot hold a second coherent amplitude");
    const RVector x = grid.axis();
    auto wavefunction = [&](Complex alpha) {
      CVector w(n);
      const double pi_quarter = std::pow(kPi, -0.25);
      for (Index i = 0; i < n; ++i) {
        const double xi = x(i) / width;
        w(i) = pi_quarter / std::sqrt(width) *
               std::exp(-0.5 * xi * xi + std::sqrt(2.0) * alpha * xi - 0.5 * alpha * alpha - 0.5 * std::norm(alpha));
      }
      return w;
    };
    const CVector wx = wavefunction(label->alpha);
    if (grid.dims() == 1) {
      field.psi = wx;
    } else {
      const CVector wy = wavefunction(label->beta);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) field.psi(i * n + j) = wx(i) * wy(j);
    }
  } else {
    const auto& samples = std::get<ExplicitSamples>(spec);
    if (samples.psi.size() != grid.size())
      throw ValidationError("explicit samples: expected " + std::to_string(grid.size()) + " values, got " +
                            std::to_string(samples.psi.size()));
    field.psi = samples.psi;
  }

  const double norm = field.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ValidationError("initial field has zero or non-finite norm");
  field.psi /= std::sqrt(norm);
  field.initial_norm = field.norm();
  return field;
}

double edge_intensity_ratio(const Field& field)
{
  const double peak = peak_intensity(field.psi);
  if (peak == 0.0) return 0.0;
  const Index n = field.grid.points();
  double edge = 0.0;
  if (field.grid.dims() == 1) {
    edge = std::max(std::norm(field.psi(0)), std::norm(field.psi(n - 1)));
  } else {
    for (Index k = 0; k < n; ++k) {
      edge = std::max({edge, std::norm(field.psi(k)), std::norm(field.psi((n - 1) * n + k)),
                       std::norm(field.psi(k * n)), std::norm(field.psi(k * n + n - 1))});
    }
  }
  return edge / peak;
}

struct SplitStepper::Impl {
  Impl(const TransverseGrid& g, const PropagationParams& p)
      : grid(g), params(p), fft(g, p.planning), k(g.wavenumbers()), k2_max(squared_wavenumbers(g).maxCoeff())
  {
  }

  struct SegmentCache {
    RVector potential;
    double max_abs = 0.0;
    std::map<double, CVector> phases;  // keyed by step length
  };

  SegmentCache& cache_for(const QuadraticSegment& seg)
  {
    // Key on the coefficient tuple so equal segments share samples.
    const std::array<double, 6> key{seg.a, seg.b, seg.d, seg.e, seg.f, seg.l};
    auto it = potentials.find(key);
    if (it == potentials.end()) {
      if (potentials.size() > 16) potentials.clear();
      SegmentCache c;
      c.potential = potential_samples(grid, seg);
      c.max_abs = c.potential.cwiseAbs().maxCoeff();
      it = potentials.emplace(key, std::move(c)).first;
    }
    return it->second;
  }

  // psi <- exp(-i (U - kappa |psi|^2) t / lambda) psi on the work buffer.
  void apply_potential(SegmentCache& cache, double t)
  {
    if (t == 0.0) return;
    auto psi = fft.view();
    const double scale = -t / params.lambda;
    if (params.nonlinear_kappa != 0.0) {
      for (Index i = 0; i < psi.size(); ++i) {
        const double u = cache.potential(i) - params.nonlinear_kappa * std::norm(psi(i));
        psi(i) *= std::polar(1.0, scale * u);
      }
      return;
    }
    auto it = cache.phases.find(t);
    if (it == cache.phases.end()) {
      CVector phase(cache.potential.size());
      for (Index i = 0; i < phase.size(); ++i) phase(i) = std::polar(1.0, scale * cache.potential(i));
      if (cache.phases.size() > 8) cache.phases.clear();
      it = cache.phases.emplace(t, std::move(phase)).first;
    }
    psi.array() *= it->second.array();
  }

  // Spectral kinetic factor exp(-i lambda |k|^2 h / (4 pi n0)), including
  // the 1/N of the unnormalized backward transform. The factor separates
  // over axes, so only one axis table is stored; in 2D this saves a full
  // grid-sized read per step.
  void apply_kinetic(double h, double n0)
  {
    const std::pair<double, double> key{h, n0};
    auto it = kinetic.find(key);
    if (it == kinetic.end()) {
      const Index n = grid.points();
      CVector factor(n);
      const double c = -params.lambda * h / (4.0 * kPi * n0);
      for (Index i = 0; i < n; ++i) factor(i) = std::polar(1.0, c * k(i) * k(i));
      if (kinetic.size() > 8) kinetic.clear();
      it = kinetic.emplace(key, std::move(factor)).first;
    }
    const CVector& f = it->second;
    const double inv_n = 1.0 / static_cast<double>(grid.size());
    fft.forward();
    auto psi = fft.view();
    if (grid.dims() == 1) {
      psi.array() *= inv_n * f.array();
    } else {
      const Index n = grid.points();
      for (Index i = 0; i < n; ++i) psi.segment(i * n, n).array() *= (inv_n * f(i)) * f.array();
    }
    fft.backward();
  }

  void check_step(const QuadraticSegment& seg, SegmentCache& cache, double h)
  {
    const double umax = cache.max_abs + std::abs(params.nonlinear_kappa) * peak_intensity(fft.view());
    const double potential_phase = umax * h / params.lambda;
    const double kinetic_phase = params.lambda * k2_max * h / (4.0 * kPi * seg.n0);
    if (!(potential_phase < 0.5) || !(kinetic_phase < kPi)) {
      std::ostringstream os;
      os << "step " << h << " too large: max|U| dz/lambda = " << potential_phase
         << " (limit 0.5), Nyquist kinetic phase = " << kinetic_phase << " (limit pi)";
      throw StepSizeError(os.str());
    }
  }

  void load(const Field& field)
  {
    if (!(field.grid == grid)) throw ValidationError("field grid does not match the stepper grid");
    fft.view() = field.psi;
  }

  TransverseGrid grid;
  PropagationParams params;
  FftBuffer fft;
  RVector k;  // one axis
  double k2_max;
  std::map<std::array<double, 6>, SegmentCache> potentials;
  std::map<std::pair<double, double>, CVector> kinetic;
};

SplitStepper::SplitStepper(const TransverseGrid& grid, const PropagationParams& params)
{
  if (!(params.lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (!(params.dz > 0.0)) throw ValidationError("dz must be positive");
  if (params.scheme != 2) throw ValidationError("only the order-2 (Strang) scheme is available");
  impl_ = std::make_unique<Impl>(grid, params);
}

SplitStepper::~SplitStepper() = default;

void SplitStepper::check_step(const Field& field, const Segment& segment, double h)
{
  const auto& seg = require_quadratic(segment);
  impl_->load(field);
  impl_->check_step(seg, impl_->cache_for(seg), h);
}

void SplitStepper::strang_step(Field& field, const Segment& segment, double h)
{
  const auto& seg = require_quadratic(segment);
  impl_->load(field);
  auto& cache = impl_->cache_for(seg);
  impl_->check_step(seg, cache, h);
  impl_->apply_potential(cache, 0.5 * h);
  impl_->apply_kinetic(h, seg.n0);
  impl_->apply_potential(cache, 0.5 * h);
  field.psi = impl_->fft.view();
  field.z += h;
}

long SplitStepper::advance(Field& field, const Profile& profile, double z_end, const Observer& observer)
{
  const double tol = 1e-12 * std::max(1.0, std::abs(z_end));
  if (z_end < field.z - tol) throw ValidationError("z_end lies before the field's current z");
  if (z_end - field.z <= tol) return 0;
  if (profile.empty() || profile.z_start() > field.z + tol || profile.z_end() < z_end - tol) {
    std::ostringstream os;
    os << "profile gap: coverage [" << profile.z_start() << ", " << profile.z_end() << "] does not contain ["
       << field.z << ", " << z_end << "]";
    throw ValidationError(os.str());
  }
  for (const auto& s : profile.segments())
    if (segment_end(s) > field.z + tol && segment_start(s) < z_end - tol) require_quadratic(s);

  Impl& im = *impl_;
  im.load(field);
  const double dz = im.params.dz;
  long steps = 0;
  double z = field.z;

  for (const auto& s : profile.segments()) {
    const double za = std::max(segment_start(s), z);
    const double zb = std::min(segment_end(s), z_end);
    if (zb - za <= tol) continue;
    const auto& seg = std::get<QuadraticSegment>(s);
    auto& cache = im.cache_for(seg);

    const double len = zb - za;
    long full = static_cast<long>(std::floor(len / dz));
    double rem = len - full * dz;
    if (rem <= 1e-9 * dz) {
      rem = 0.0;
    } else if (dz - rem <= 1e-9 * dz) {
      ++full;
      rem = 0.0;
    }
    if (full > 0) im.check_step(seg, cache, dz);
    if (rem > 0.0) im.check_step(seg, cache, rem);

    double pending = 0.0;
    const long count = full + (rem > 0.0 ? 1 : 0);
    for (long k = 0; k < count; ++k) {
      const bool last = k == count - 1;
      const double h = (k < full) ? dz : rem;
      im.apply_potential(cache, pending + 0.5 * h);
      im.apply_kinetic(h, seg.n0);
      pending = 0.5 * h;
      z = last ? zb : z + h;
      ++steps;
      if (observer.every > 0 && steps % observer.every == 0 && observer.on_sample) {
        im.apply_potential(cache, pending);
        pending = 0.0;
        field.psi = im.fft.view();
        field.z = z;
        observer.on_sample(field);
      }
    }
    im.apply_potential(cache, pending);
  }
  field.psi = im.fft.view();
  field.z = z_end;
  return steps;
}

Field split_step(const Field& field, const Profile& profile, const PropagationParams& params)
{
  SplitStepper stepper(field.grid, params);
  Field out = field;
  stepper.strang_step(out, profile.segment_at(field.z + 0.5 * params.dz), params.dz);
  return out;
}

namespace {

// Moments and mode overlaps share one transform buffer per propagation.
class Diagnostics {
 public:
  Diagnostics(const TransverseGrid& grid, const PropagationParams& params)
      : grid_(grid), params_(params), fft_(grid, FftPlanning::Estimate), x_(grid.axis()), k_(grid.wavenumbers())
  {
    // First-moment derivative drops the unpaired Nyquist component.
    k_odd_ = k_;
    k_odd_(grid.points() / 2) = 0.0;
  }

  Moments moments(const CVector& psi)
  {
    const Index n = grid_.points();
    Moments m;
    const RVector rho = psi.cwiseAbs2();
    const double total = rho.sum();
    auto fill = [&](const RVector& wx, const RVector& wy, double& mx, double& my) {
      if (grid_.dims() == 1) {
        mx = rho.dot(wx) / total;
        return;
      }
      double sx = 0.0, sy = 0.0;
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
          sx += rho(i * n + j) * wx(i);
          sy += rho(i * n + j) * wy(j);
        }
      mx = sx / total;
      my = sy / total;
    };
    fill(x_, x_, m.mean_x, m.mean_y);
    const RVector x2 = x_.array().square();
    fill(x2, x2, m.mean_x2, m.mean_y2);

    fft_.view() = psi;
    fft_.forward();
    const RVector spec = fft_.view().cwiseAbs2();
    const double spec_total = spec.sum();
    // Reuse the same reduction with spectral weights.
    auto fill_spec = [&](const RVector& wx, double& mx, double& my) {
      if (grid_.dims() == 1) {
        mx = spec.dot(wx) / spec_total;
        return;
      }
      double sx = 0.0, sy = 0.0;
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
          sx += spec(i * n + j) * wx(i);
          sy += spec(i * n + j) * wx(j);
        }
      mx = sx / spec_total;
      my = sy / spec_total;
    };
    fill_spec(k_odd_, m.mean_px, m.mean_py);
    const RVector k2 = k_.array().square();
    fill_spec(k2, m.mean_px2, m.mean_py2);
    const double lam = params_.lambda;
    m.mean_px *= lam;
    m.mean_py *= lam;
    m.mean_px2 *= lam * lam;
    m.mean_py2 *= lam * lam;
    return m;
  }

 private:
  TransverseGrid grid_;
  PropagationParams params_;
  FftBuffer fft_;
  RVector x_, k_, k_odd_;
};

// <h_n1 h_n2 | psi> with discrete quadrature.
Complex mode_overlap(const CVector& psi, const TransverseGrid& grid, const RVector& hx, const RVector& hy)
{
  if (grid.dims() == 1) return hx.cast<Complex>().dot(psi) * grid.cell();
  const Index n = grid.points();
  Eigen::Map<const CMatrix> field(psi.data(), n, n);  // field(j, i) = psi(i*n + j)
  return (hy.cast<Complex>().transpose() * field * hx.cast<Complex>())(0, 0) * grid.cell();
}

}  // namespace

PropagationResult propagate(const Field& field, const Profile& profile, const PropagationParams& params, double z_end,
                            const TraceOptions& options)
{
  PropagationResult result{field, {}, {}, 0};
  SplitStepper stepper(field.grid, params);
  Diagnostics diag(field.grid, params);

  std::vector<std::pair<RVector, RVector>> modes;
  for (const auto& m : options.overlaps) {
    if (field.grid.dims() == 1 && m.n2 != 0) throw ValidationError("1D trace overlap with nonzero n2");
    modes.emplace_back(hermite_gauss_mode(m.n1, options.mode_width, field.grid).values,
                       hermite_gauss_mode(m.n2, options.mode_width, field.grid).values);
  }

  auto record = [&](const Field& f) {
    TraceRow row;
    row.z = f.z;
    row.norm = f.norm();
    const Moments m = diag.moments(f.psi);
    row.mean_x = m.mean_x;
    row.mean_px = m.mean_px;
    row.mean_y = m.mean_y;
    row.mean_py = m.mean_py;
    for (const auto& [hx, hy] : modes) row.overlaps.push_back(mode_overlap(f.psi, f.grid, hx, hy));
    result.trace.push_back(std::move(row));
  };

  if (edge_intensity_ratio(field) > 1e-12)
    result.warnings.push_back("initial field reaches the grid edge (edge/peak intensity > 1e-12)");

  record(result.field);
  SplitStepper::Observer observer{options.sample_every, record};
  result.steps = stepper.advance(result.field, profile, z_end, observer);
  if (result.steps > 0 && result.trace.back().z != result.field.z) record(result.field);

  const double ratio = edge_intensity_ratio(result.field);
  if (ratio > 1e-12) {
    std::ostringstream os;
    os << "field reaches the periodic boundary: edge/peak intensity " << ratio;
    result.warnings.push_back(os.str());
  }
  return result;
}

ParaxialReport paraxial_check(const Profile& profile, const PropagationParams& params, double threshold)
{
  ParaxialReport report;
  const auto& segs = profile.segments();
  for (std::size_t i = 1; i < segs.size(); ++i) {
    const double n_a = segment_n0(segs[i - 1]);
    const double n_b = segment_n0(segs[i]);
    const double mean = 0.5 * (n_a + n_b);
    const double slope = std::abs(n_b - n_a) / profile.transition_length();
    const double ratio = params.lambda / (mean * mean) * slope;
    if (ratio > report.ratio) {
      report.ratio = ratio;
      report.z_at_max = segment_start(segs[i]);
    }
  }
  report.flagged = report.ratio > threshold;
  return report;
}

Moments field_moments(const Field& field, const PropagationParams& params)
{
  const double norm = field.norm();
  if (std::abs(norm - 1.0) > 1e-8) {
    std::ostringstream os;
    os << "field_moments needs a normalized field (norm " << norm << ")";
    throw ValidationError(os.str());
  }
  Diagnostics diag(field.grid, params);
  return diag.moments(field.psi);
}

ModeTable project_onto_modes(const Field& field, double width, int max_n)
{
  if (max_n < 0) throw ValidationError("max_N must be non-negative");
  const TransverseGrid& grid = field.grid;
  ModeTable table;
  table.max_n = max_n;
  table.dims = grid.dims();

  RMatrix h(grid.points(), max_n + 1);
  for (int n = 0; n <= max_n; ++n) {
    auto mode = hermite_gauss_mode(n, width, grid);
    h.col(n) = mode.values;
    if (n == max_n) table.warnings.insert(table.warnings.end(), mode.warnings.begin(), mode.warnings.end());
  }
  // Highest mode's local wavenumber should sit well below Nyquist.
  if (std::sqrt(2.0 * max_n + 1.0) / width > 0.5 * grid.nyquist()) {
    std::ostringstream os;
    os << "grid spacing " << grid.spacing() << " under-resolves mode " << max_n << " at width " << width;
    table.warnings.push_back(os.str());
  }

  const CMatrix hc = h.cast<Complex>();
  if (grid.dims() == 1) {
    table.amplitudes = (hc.transpose() * field.psi) * grid.cell();
  } else {
    const Index n = grid.points();
    Eigen::Map<const CMatrix> psi_t(field.psi.data(), n, n);  // psi_t(j, i) = psi(x_i, y_j)
    const CMatrix all = hc.transpose() * psi_t.transpose() * hc * grid.cell();  // (n1, n2)
    table.amplitudes = CMatrix::Zero(max_n + 1, max_n + 1);
    for (int n1 = 0; n1 <= max_n; ++n1)
      for (int n2 = 0; n1 + n2 <= max_n; ++n2) table.amplitudes(n1, n2) = all(n1, n2);
  }
  const double bound = field.norm() + 1e-10;
  if (table.total_weight() > bound) {
    std::ostringstream os;
    os << "mode projection violates the Bessel bound: sum |c|^2 = " << table.total_weight();
    throw NumericalError(os.str());
  }
  return table;
}

CVector reconstruct_field(const Field& field, const Profile& profile, const PropagationParams& params)
{
  if (!(params.lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (profile.z_start() > 1e-12) throw ValidationError("profile must define n0 from z = 0");
  const double n0 = profile.n0_at(field.z);
  const double phase = 2.0 * kPi / params.lambda * profile.integrated_n0(field.z);
  return field.psi * (std::polar(1.0 / std::sqrt(n0), phase));
}

}  // namespace qlfiber
