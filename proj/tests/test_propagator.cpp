#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qlfiber/propagator.hpp"

using namespace qlfiber;

namespace {

Profile flat_profile(double length, double n0 = 1.5, double l = 0.0)
{
  QuadraticSegment q;
  q.z1 = length;
  q.n0 = n0;
  q.l = l;
  return Profile({q});
}

Field gaussian(const TransverseGrid& grid, double x0 = 0.0, double k0 = 0.0)
{
  CVector psi(grid.size());
  const RVector x = grid.axis();
  for (Index i = 0; i < grid.points(); ++i) psi(i) = std::exp(-0.5 * (x(i) - x0) * (x(i) - x0)) * std::polar(1.0, k0 * x(i));
  return initialize_field(grid, ExplicitSamples{psi}, 1.0);
}

}  // namespace

TEST(InitializeField, ModesAndCoherentStates)
{
  const TransverseGrid g2(2, 16.0, 128);
  const Field f = initialize_field(g2, ModeIndex{0, 0}, 1.0);
  EXPECT_NEAR(f.norm(), 1.0, 1e-14);
  const RVector x = g2.axis();
  const double c = 1.0 / std::sqrt(kPi);
  for (Index i = 0; i < 128; i += 9)
    for (Index j = 0; j < 128; j += 11)
      EXPECT_NEAR(f.psi(i * 128 + j).real(), c * std::exp(-0.5 * (x(i) * x(i) + x(j) * x(j))), 1e-12);

  const TransverseGrid g1(1, 32.0, 512);
  const double w = 1.4;
  const Field coh = initialize_field(g1, CoherentLabel{Complex(1.3, 0.0), Complex(0.0)}, w);
  const Moments m = field_moments(coh, PropagationParams{});
  EXPECT_NEAR(m.mean_x, std::sqrt(2.0) * w * 1.3, 1e-10);

  EXPECT_THROW(initialize_field(g1, ExplicitSamples{CVector::Zero(512)}, 1.0), ValidationError);
  EXPECT_THROW(initialize_field(g1, ExplicitSamples{CVector::Ones(100)}, 1.0), ValidationError);
  EXPECT_THROW(initialize_field(g1, ModeIndex{0, 1}, 1.0), ValidationError);
}

TEST(SplitStep, ConstantPotentialIsAUniformPhase)
{
  const TransverseGrid grid(1, 16.0, 512);
  const Field f = gaussian(grid, 0.5);
  PropagationParams params;
  params.dz = 1e-3;
  const double c = 0.8;
  const Field with = split_step(f, flat_profile(1.0, 1.5, c), params);
  const Field without = split_step(f, flat_profile(1.0, 1.5, 0.0), params);
  const Complex phase = std::polar(1.0, -c * params.dz / params.lambda);
  EXPECT_LT((with.psi - phase * without.psi).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(with.z, params.dz, 1e-18);
  EXPECT_LT(std::abs(with.norm() - f.norm()), 1e-14);
}

TEST(SplitStep, FreeDiffractionMatchesAnalyticWidth)
{
  const TransverseGrid grid(1, 64.0, 1024);
  const Field f = gaussian(grid);
  PropagationParams params;
  params.dz = 5e-3;
  const double z = 8.0;
  const PropagationResult r = propagate(f, flat_profile(z), params, z);
  const Moments m = field_moments(r.field, params);
  EXPECT_NEAR(m.rms_width_x(), oracle::free_rms_width(1.0 / std::sqrt(2.0), z, 1.0, 1.5), 1e-6);
}

TEST(SplitStep, StepSizePreconditions)
{
  const TransverseGrid grid(1, 16.0, 512);
  const Field f = gaussian(grid);
  PropagationParams params;
  params.dz = 0.1;  // kinetic phase at Nyquist far above pi
  EXPECT_THROW(split_step(f, flat_profile(1.0), params), StepSizeError);
  params.dz = 1e-3;
  EXPECT_THROW(split_step(f, flat_profile(1.0, 1.5, 1e4), params), StepSizeError);
  const Profile kerr({KerrSegment{0.0, 1.0, 1.0}});
  EXPECT_THROW(split_step(f, kerr, params), ValidationError);
}

TEST(Propagate, IdentityAndExactLanding)
{
  const TransverseGrid grid(1, 16.0, 256);
  const Field f = gaussian(grid, 0.3, 0.2);
  PropagationParams params;
  params.dz = 3e-3;
  const PropagationResult same = propagate(f, flat_profile(1.0), params, 0.0);
  EXPECT_EQ(same.steps, 0);
  EXPECT_EQ(same.field.psi, f.psi);

  QuadraticSegment s0 = matched_segment(0.0, 0.1001, 1.0, 1.5, 1.0);
  QuadraticSegment s1 = matched_segment(0.1001, 0.25, 1.0, 1.5, 1.0);
  s1.e = 0.01;
  const PropagationResult r = propagate(f, Profile({s0, s1}), params, 0.2);
  EXPECT_EQ(r.field.z, 0.2);
  EXPECT_EQ(r.trace.back().z, 0.2);
  EXPECT_EQ(r.trace.front().z, 0.0);
  EXPECT_THROW(propagate(f, Profile({s0, s1}), params, 0.3), ValidationError);
}

TEST(Propagate, NormIsConservedLinearAndNonlinear)
{
  const TransverseGrid grid(1, 16.0, 512);
  const Field f = gaussian(grid, 0.5);
  PropagationParams params;
  params.dz = 2e-3;
  const QuadraticSegment q = matched_segment(0.0, 4.0, 1.0, 1.5, 1.0);
  const PropagationResult lin = propagate(f, Profile({q}), params, 4.0);
  EXPECT_LT(std::abs(lin.field.norm() - f.norm()) / lin.steps, 1e-14);
  params.nonlinear_kappa = 0.5;
  const PropagationResult nl = propagate(f, Profile({q}), params, 4.0);
  EXPECT_LT(std::abs(nl.field.norm() - f.norm()), 1e-12);
  EXPECT_GT((nl.field.psi - lin.field.psi).norm(), 1e-6);
}

TEST(Propagate, MatchedGroundModeIsStationary)
{
  const TransverseGrid grid(1, 16.0, 512);
  const Field f = initialize_field(grid, ModeIndex{0, 0}, 1.0);
  PropagationParams params;
  params.dz = 5e-3;
  const double period = 2.0 * kPi / oscillator_frequency(1.0, 1.5, 1.0);
  const PropagationResult r = propagate(f, Profile({matched_segment(0.0, period, 1.0, 1.5, 1.0)}), params, period);
  const double overlap = std::abs(f.psi.dot(r.field.psi) * grid.cell());
  EXPECT_GE(overlap, 1.0 - 1e-8);
}

TEST(Propagate, TraceSamplingAndOverlaps)
{
  const TransverseGrid grid(1, 16.0, 256);
  const Field f = initialize_field(grid, ModeIndex{1, 0}, 1.0);
  PropagationParams params;
  params.dz = 1e-2;
  TraceOptions opts;
  opts.sample_every = 10;
  opts.overlaps = {ModeIndex{0, 0}, ModeIndex{1, 0}};
  const PropagationResult r = propagate(f, Profile({matched_segment(0.0, 1.0, 1.0, 1.5, 1.0)}), params, 1.0, opts);
  EXPECT_EQ(r.trace.size(), 11u);
  for (const auto& row : r.trace) {
    EXPECT_NEAR(std::abs(row.overlaps[0]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(row.overlaps[1]), 1.0, 1e-8);
  }
}

TEST(Paraxial, RatioAndFlag)
{
  PropagationParams params;
  params.lambda = 1e-3;
  EXPECT_EQ(paraxial_check(flat_profile(2.0), params).ratio, 0.0);
  EXPECT_FALSE(paraxial_check(flat_profile(2.0), params).flagged);

  QuadraticSegment s0, s1;
  s0.z1 = 1.0;
  s0.n0 = 1.4995;
  s1.z0 = 1.0;
  s1.z1 = 2.0;
  s1.n0 = 1.5005;
  const ParaxialReport r = paraxial_check(Profile({s0, s1}, 1.0), params);
  EXPECT_NEAR(r.ratio, 1e-3 / (1.5 * 1.5) * 1e-3, 1e-18);
  EXPECT_NEAR(r.ratio, 4.44e-7, 1e-9);
  EXPECT_FALSE(r.flagged);

  s1.n0 = 3.0;
  params.lambda = 1.0;
  EXPECT_TRUE(paraxial_check(Profile({s0, s1}, 1.0), params).flagged);
}

TEST(Moments, CentroidsAndTilt)
{
  const TransverseGrid grid(1, 32.0, 1024);
  PropagationParams params;
  params.lambda = 0.7;
  const Moments m0 = field_moments(gaussian(grid), params);
  EXPECT_NEAR(m0.mean_x, 0.0, 1e-12);
  EXPECT_NEAR(m0.mean_px, 0.0, 1e-12);
  EXPECT_NEAR(field_moments(gaussian(grid, 1.7), params).mean_x, 1.7, 1e-10);
  const double k0 = 2.3;
  EXPECT_NEAR(field_moments(gaussian(grid, -0.4, k0), params).mean_px, params.lambda * k0, 1e-10);

  Field unnormalized = gaussian(grid);
  unnormalized.psi *= 2.0;
  EXPECT_THROW(field_moments(unnormalized, params), ValidationError);
}

TEST(Modes, ProjectionExamples)
{
  const TransverseGrid grid(1, 16.0, 512);
  const ModeTable g = project_onto_modes(initialize_field(grid, ModeIndex{0, 0}, 1.0), 1.0, 6);
  EXPECT_NEAR(std::abs(g.at(0)), 1.0, 1e-12);
  for (int n = 1; n <= 6; ++n) EXPECT_NEAR(std::abs(g.at(n)), 0.0, 1e-12);

  const CVector sum = initialize_field(grid, ModeIndex{0, 0}, 1.0).psi + initialize_field(grid, ModeIndex{1, 0}, 1.0).psi;
  const ModeTable s = project_onto_modes(initialize_field(grid, ExplicitSamples{sum}, 1.0), 1.0, 4);
  EXPECT_NEAR(s.at(0).real(), 1.0 / std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(s.at(1).real(), 1.0 / std::sqrt(2.0), 1e-10);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  CVector noise(grid.size());
  for (Index i = 0; i < noise.size(); ++i) noise(i) = Complex(n01(rng), n01(rng));
  const ModeTable r = project_onto_modes(initialize_field(grid, ExplicitSamples{noise}, 1.0), 1.0, 10);
  EXPECT_LE(r.total_weight(), 1.0);

  const TransverseGrid g2(2, 16.0, 64);
  const ModeTable t2 = project_onto_modes(initialize_field(g2, ModeIndex{2, 1}, 1.0), 1.0, 4);
  EXPECT_NEAR(std::abs(t2.at(2, 1)), 1.0, 1e-10);
  EXPECT_NEAR(t2.total_weight(), 1.0, 1e-10);
}

TEST(Reconstruct, EnvelopeToPhysicalField)
{
  const TransverseGrid grid(1, 16.0, 128);
  Field f = gaussian(grid);
  PropagationParams params;
  EXPECT_LT((reconstruct_field(f, flat_profile(3.0, 1.0), params) - f.psi).norm(), 1e-15);

  params.lambda = 0.5;
  f.z = 0.5;
  const CVector e = reconstruct_field(f, flat_profile(3.0, 1.5), params);
  const Complex expected = std::polar(1.0 / std::sqrt(1.5), 2.0 * kPi * 1.5);
  EXPECT_LT((e - expected * f.psi).norm(), 1e-13);

  QuadraticSegment s0, s1;
  s0.z1 = 0.3;
  s0.n0 = 1.2;
  s1.z0 = 0.3;
  s1.z1 = 1.0;
  s1.n0 = 1.7;
  f.z = 0.8;
  const CVector pw = reconstruct_field(f, Profile({s0, s1}), params);
  const double phase = 2.0 * kPi / 0.5 * (0.3 * 1.2 + 0.5 * 1.7);
  EXPECT_LT((pw - std::polar(1.0 / std::sqrt(1.7), phase) * f.psi).norm(), 1e-12);
}
