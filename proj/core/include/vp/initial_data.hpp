#pragma once
#include <cstdint>
#include <functional>
#include <string>

#include "vp/domain.hpp"
#include "vp/vec3.hpp"

namespace vp {

// Analytic phase-space profiles for the initial distribution. Every profile
// is C^1 with compact support in x and v; the library profiles place their
// x-support strictly inside the domain, so they are constant (zero) on a
// neighborhood of the grazing set and satisfy the wall compatibility
// conditions identically.
struct InitialData {
  enum class Profile { zero, uniform_box, maxwellian_bump, ring_bump };

  Profile profile = Profile::maxwellian_bump;
  double amplitude = 1.0;

  // bump profiles: smooth radial bump of radius x_radius about x_center
  Vec3 x_center{};
  double x_radius = 0.5;

  // velocity part
  double v_thermal = 0.35;   // maxwellian temperature scale
  double v_max = 1.05;       // hard support radius in |v| (Q(0) bound)
  double v_ring = 0.5;       // ring profile center speed
  double v_ring_width = 0.1;

  // uniform_box profile
  Vec3 x_box_lo{}, x_box_hi{};
  Vec3 v_box_lo{}, v_box_hi{};

  double flatness_delta = 0.0;  // delta_0: |f0 - flat_value| = 0 on xperp + vperp^2 <= delta_0
  double flat_value = 0.0;      // c_0
  double holder_exponent = 0.5; // metadata only

  double f0(const Vec3& x, const Vec3& v) const;
  double rho0(const Vec3& x) const;     // integral of f0 over v (closed quadrature)
  double q0() const;                    // support radius in |v|
  double max_f0() const;                // sup of f0
  double total_integral() const;        // integral of f0 over phase space
  double velocity_shell_integral() const;  // integral of the v-profile over R^3

  // sampling box of the support
  void support_box(Vec3& x_lo, Vec3& x_hi, Vec3& v_lo, Vec3& v_hi) const;

  static InitialData zero_profile();
  static InitialData maxwellian_bump(const Vec3& x_center, double x_radius, double amplitude,
                                     double v_thermal, double v_max, double flatness_delta);
  static InitialData ring_bump(const Vec3& x_center, double x_radius, double amplitude,
                               double v_ring, double v_ring_width, double v_max,
                               double flatness_delta);
  static InitialData uniform_box(const Vec3& x_lo, const Vec3& x_hi, const Vec3& v_lo,
                                 const Vec3& v_hi, double amplitude);
};

struct ValidationReport {
  bool reflection_symmetry_ok = true;   // f0(x, v) = f0(x, v*) at the wall
  double worst_reflection_violation = 0.0;
  bool gradient_condition_ok = true;    // normal-derivative compatibility at the wall
  double worst_gradient_violation = 0.0;
  bool flatness_ok = true;              // f0 constant on the near-grazing band
  double worst_flatness_violation = 0.0;
  bool nonnegative_ok = true;
  double min_f0 = 0.0;
  bool pass() const {
    return reflection_symmetry_ok && gradient_condition_ok && flatness_ok && nonnegative_ok;
  }
};

// Report-only validation of an arbitrary profile against the wall
// compatibility conditions, the near-grazing flatness band, and positivity.
// The gradient condition needs the initial self-consistent field, so one
// Poisson solve runs internally (skipped for identically-zero data).
ValidationReport validate_initial(const std::function<double(const Vec3&, const Vec3&)>& f0,
                                  double v_support, double flatness_delta, double flat_value,
                                  const ConvexDomain& domain,
                                  const std::function<double(const Vec3&)>& rho0,
                                  int wall_samples = 64, int velocity_samples = 32,
                                  int grid_cells = 32, uint64_t seed = 12345);

ValidationReport validate_initial(const InitialData& data, const ConvexDomain& domain,
                                  int wall_samples = 64, int velocity_samples = 32,
                                  int grid_cells = 32, uint64_t seed = 12345);

}  // namespace vp
