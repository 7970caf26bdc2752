#pragma once
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "vp/frame.hpp"
#include "vp/grid.hpp"

namespace vp {

// Field value at a point, optionally decomposed against a boundary frame as
// E = E1 u1 + E2 u2 - Eperp n  (so Eperp = -E.n).
struct FieldSample {
  Vec3 E{};
  bool has_frame = false;
  double E_tan[2] = {0.0, 0.0};
  double E_perp = 0.0;
};

FieldSample decompose_field(const Vec3& E, const BoundaryFrame& frame);

// Anything trajectories can be integrated against.
class FieldSource {
 public:
  virtual ~FieldSource() = default;
  virtual Vec3 field_at(const Vec3& x) const = 0;
  virtual double potential_at(const Vec3& x) const = 0;
};

class ZeroField final : public FieldSource {
 public:
  Vec3 field_at(const Vec3&) const override { return {}; }
  double potential_at(const Vec3&) const override { return 0.0; }
};

class AnalyticField final : public FieldSource {
 public:
  AnalyticField(std::function<Vec3(const Vec3&)> field, std::function<double(const Vec3&)> potential)
      : field_(std::move(field)), potential_(std::move(potential)) {}
  Vec3 field_at(const Vec3& x) const override { return field_(x); }
  double potential_at(const Vec3& x) const override { return potential_(x); }

 private:
  std::function<Vec3(const Vec3&)> field_;
  std::function<double(const Vec3&)> potential_;
};

// Exact solution of the unit-charge problem in a ball of radius R centered at
// the origin: phi = (|x|^2 - R^2)/6, E = grad phi = x/3.
AnalyticField uniform_ball_field(double radius);

// Solved Dirichlet potential on a cut-cell grid: phi = 0 on the boundary,
// one-sided second-order gradients near cut legs (the Dirichlet value is the
// third stencil point; nothing ever reaches across the boundary).
class PotentialField final : public FieldSource {
 public:
  const CutCellGrid& grid() const { return *grid_; }
  std::shared_ptr<const CutCellGrid> grid_ptr() const { return grid_; }

  double solver_residual() const { return residual_; }
  int solver_iterations() const { return iterations_; }
  double min_value() const { return min_phi_; }
  double max_value() const { return max_phi_; }

  double value_at_cell(std::size_t cell) const { return phi_[cell]; }
  const std::vector<double>& values() const { return phi_; }
  Vec3 gradient_at_cell(std::size_t cell) const { return gradient_[cell]; }

  // point evaluation; near the wall a quadratic along the inward normal
  // anchored at the (zero) boundary value replaces the trilinear stencil
  double value(const Vec3& x) const;
  // E = grad phi, trilinear over cell-centered one-sided gradients with the
  // stencil shrunk to interior cells near the boundary
  Vec3 field(const Vec3& x) const;
  FieldSample sample(const Vec3& x, const BoundaryFrame* frame = nullptr) const;

  // field energy integral(|E|^2) over the domain, cut cells volume-weighted
  double field_energy() const;

  Vec3 field_at(const Vec3& x) const override { return field(x); }
  double potential_at(const Vec3& x) const override { return value(x); }

  // Rebuild a field object (values + gradients) from stored interior values;
  // used by the frozen-field iteration's history and by tests.
  static PotentialField from_values(std::shared_ptr<const CutCellGrid> grid,
                                    const std::vector<double>& interior_values);

  friend PotentialField solve_poisson(const DensityGrid& rho, const ConvexDomain& domain,
                                      double tol, const PotentialField* warm_start);

 private:
  void finalize_gradients();
  bool trilinear_value(const Vec3& x, double& out) const;

  std::shared_ptr<const CutCellGrid> grid_;
  std::vector<double> phi_;       // full grid, 0 outside
  std::vector<Vec3> gradient_;    // full grid, valid on interior cells
  double residual_ = 0.0;
  int iterations_ = 0;
  double min_phi_ = 0.0;
  double max_phi_ = 0.0;
};

// Solve  laplace(phi) = rho  with phi = 0 on the domain boundary, to relative
// residual <= tol (default 1e-10). Deterministic; BiCGStab with Jacobi
// preconditioning, iteration cap 20 * cells-per-dimension.
PotentialField solve_poisson(const DensityGrid& rho, const ConvexDomain& domain,
                             double tol = 1e-10, const PotentialField* warm_start = nullptr);

}  // namespace vp
