// Uniform periodic transverse sampling grid, 1 or 2 axes.
#pragma once

#include "qlfiber/types.hpp"

namespace qlfiber {

class TransverseGrid {
 public:
  // Axis samples sit at x_j = -extent/2 + j*spacing, j = 0..points-1.
  // Two-axis fields are stored row-major with x as the slow index.
  TransverseGrid(int dims, double extent, int points);

  int dims() const { return dims_; }
  double extent() const { return extent_; }
  int points() const { return points_; }
  double spacing() const { return spacing_; }
  Index size() const { return dims_ == 1 ? Index(points_) : Index(points_) * points_; }
  // Quadrature weight of one sample: spacing^dims.
  double cell() const { return dims_ == 1 ? spacing_ : spacing_ * spacing_; }

  RVector axis() const;
  // Angular wavenumbers in transform order (0, 1, ..., N/2-1, -N/2, ..., -1) * 2pi/extent.
  RVector wavenumbers() const;
  double nyquist() const { return kPi / spacing_; }

  bool operator==(const TransverseGrid&) const = default;

 private:
  int dims_;
  double extent_;
  int points_;
  double spacing_;
};

}  // namespace qlfiber
