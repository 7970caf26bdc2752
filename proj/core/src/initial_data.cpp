#include "vp/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "vp/dynamics.hpp"
#include "vp/errors.hpp"
#include "vp/frame.hpp"
#include "vp/poisson.hpp"
#include "vp/util.hpp"

namespace vp {

namespace {

// C^2 compact radial bump on [0, 1).
double bump(double s) {
  if (s >= 1.0) return 0.0;
  const double t = 1.0 - s * s;
  return t * t * t;
}

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

double InitialData::f0(const Vec3& x, const Vec3& v) const {
  switch (profile) {
    case Profile::zero:
      return 0.0;
    case Profile::uniform_box: {
      for (int a = 0; a < 3; ++a) {
        if (x[a] < x_box_lo[a] || x[a] > x_box_hi[a]) return 0.0;
        if (v[a] < v_box_lo[a] || v[a] > v_box_hi[a]) return 0.0;
      }
      return amplitude;
    }
    case Profile::maxwellian_bump: {
      const double sx = norm(x - x_center) / x_radius;
      if (sx >= 1.0) return 0.0;
      const double sv = norm(v);
      if (sv >= v_max) return 0.0;
      return amplitude * bump(sx) * std::exp(-0.5 * sv * sv / (v_thermal * v_thermal)) *
             bump(sv / v_max);
    }
    case Profile::ring_bump: {
      const double sx = norm(x - x_center) / x_radius;
      if (sx >= 1.0) return 0.0;
      const double sv = norm(v);
      if (sv >= v_max) return 0.0;
      const double dr = (sv - v_ring) / v_ring_width;
      return amplitude * bump(sx) * std::exp(-0.5 * dr * dr) * bump(sv / v_max);
    }
  }
  return 0.0;
}

double InitialData::q0() const {
  switch (profile) {
    case Profile::zero:
      return 0.0;
    case Profile::uniform_box: {
      double m = 0.0;
      for (int a = 0; a < 3; ++a)
        m = std::max({m, std::abs(v_box_lo[a]), std::abs(v_box_hi[a])});
      return m * std::sqrt(3.0);
    }
    default:
      return v_max;
  }
}

double InitialData::max_f0() const {
  switch (profile) {
    case Profile::zero:
      return 0.0;
    case Profile::uniform_box:
    case Profile::maxwellian_bump:
      return amplitude;  // radial factors peak at 1
    case Profile::ring_bump: {
      double m = 0.0;
      for (int i = 0; i <= 2000; ++i) {
        const double s = v_max * i / 2000.0;
        const double dr = (s - v_ring) / v_ring_width;
        m = std::max(m, std::exp(-0.5 * dr * dr) * bump(s / v_max));
      }
      return amplitude * m;
    }
  }
  return 0.0;
}

double InitialData::rho0(const Vec3& x) const {
  switch (profile) {
    case Profile::zero:
      return 0.0;
    case Profile::uniform_box: {
      for (int a = 0; a < 3; ++a)
        if (x[a] < x_box_lo[a] || x[a] > x_box_hi[a]) return 0.0;
      double vol = 1.0;
      for (int a = 0; a < 3; ++a) vol *= (v_box_hi[a] - v_box_lo[a]);
      return amplitude * vol;
    }
    default: {
      const double sx = norm(x - x_center) / x_radius;
      if (sx >= 1.0) return 0.0;
      return amplitude * bump(sx) * velocity_shell_integral();
    }
  }
}

double InitialData::velocity_shell_integral() const {
  const auto radial = [this](double s) -> double {
    if (profile == Profile::maxwellian_bump)
      return std::exp(-0.5 * s * s / (v_thermal * v_thermal)) * bump(s / v_max) * s * s;
    const double dr = (s - v_ring) / v_ring_width;
    return std::exp(-0.5 * dr * dr) * bump(s / v_max) * s * s;
  };
  return 4.0 * M_PI * simpson(radial, 0.0, v_max, 1024);
}

double InitialData::total_integral() const {
  switch (profile) {
    case Profile::zero:
      return 0.0;
    case Profile::uniform_box: {
      double vol = 1.0;
      for (int a = 0; a < 3; ++a)
        vol *= (x_box_hi[a] - x_box_lo[a]) * (v_box_hi[a] - v_box_lo[a]);
      return amplitude * vol;
    }
    default: {
      const double xi =
          4.0 * M_PI * simpson([](double s) { return bump(s) * s * s; }, 0.0, 1.0, 1024) *
          x_radius * x_radius * x_radius;
      return amplitude * xi * velocity_shell_integral();
    }
  }
}

void InitialData::support_box(Vec3& x_lo, Vec3& x_hi, Vec3& v_lo, Vec3& v_hi) const {
  if (profile == Profile::uniform_box) {
    x_lo = x_box_lo;
    x_hi = x_box_hi;
    v_lo = v_box_lo;
    v_hi = v_box_hi;
    return;
  }
  const Vec3 xr{x_radius, x_radius, x_radius};
  const Vec3 vr{v_max, v_max, v_max};
  x_lo = x_center - xr;
  x_hi = x_center + xr;
  v_lo = -vr;
  v_hi = vr;
}

InitialData InitialData::zero_profile() {
  InitialData d;
  d.profile = Profile::zero;
  d.amplitude = 0.0;
  return d;
}

InitialData InitialData::maxwellian_bump(const Vec3& x_center, double x_radius, double amplitude,
                                         double v_thermal, double v_max, double flatness_delta) {
  InitialData d;
  d.profile = Profile::maxwellian_bump;
  d.x_center = x_center;
  d.x_radius = x_radius;
  d.amplitude = amplitude;
  d.v_thermal = v_thermal;
  d.v_max = v_max;
  d.flatness_delta = flatness_delta;
  return d;
}

InitialData InitialData::ring_bump(const Vec3& x_center, double x_radius, double amplitude,
                                   double v_ring, double v_ring_width, double v_max,
                                   double flatness_delta) {
  InitialData d;
  d.profile = Profile::ring_bump;
  d.x_center = x_center;
  d.x_radius = x_radius;
  d.amplitude = amplitude;
  d.v_ring = v_ring;
  d.v_ring_width = v_ring_width;
  d.v_max = v_max;
  d.flatness_delta = flatness_delta;
  return d;
}

InitialData InitialData::uniform_box(const Vec3& x_lo, const Vec3& x_hi, const Vec3& v_lo,
                                     const Vec3& v_hi, double amplitude) {
  InitialData d;
  d.profile = Profile::uniform_box;
  d.x_box_lo = x_lo;
  d.x_box_hi = x_hi;
  d.v_box_lo = v_lo;
  d.v_box_hi = v_hi;
  d.amplitude = amplitude;
  return d;
}

ValidationReport validate_initial(const std::function<double(const Vec3&, const Vec3&)>& f0,
                                  double v_support, double flatness_delta, double flat_value,
                                  const ConvexDomain& domain,
                                  const std::function<double(const Vec3&)>& rho0,
                                  int wall_samples, int velocity_samples, int grid_cells,
                                  uint64_t seed) {
  ValidationReport rep;
  const double L = domain.diameter();
  const double eps_x = 1e-5 * L;
  const double eps_v = 1e-5 * std::max(v_support, 1.0);

  // initial field, needed by the normal-gradient condition
  std::optional<PotentialField> field;
  {
    const auto grid = make_grid(domain, GridSpec::cover_cells(domain, grid_cells));
    DensityGrid rho = DensityGrid::from_function(grid, rho0);
    if (rho.total_mass > 0.0) field.emplace(solve_poisson(rho, domain, 1e-10));
  }

  uint64_t rng = seed;
  const auto uniform = [&rng]() { return splitmix64(rng) * 0x1.0p-64; };

  double scale = 1e-300;
  for (int i = 0; i < wall_samples; ++i) {
    const Vec3 bp = domain.boundary_point(fibonacci_sphere(i, wall_samples));
    const Vec3 n = normalized(domain.grad(bp));
    double e_perp = 0.0;
    if (field) e_perp = -dot(field->field(bp), n);

    for (int j = 0; j < velocity_samples; ++j) {
      const Vec3 v{v_support * (2.0 * uniform() - 1.0), v_support * (2.0 * uniform() - 1.0),
                   v_support * (2.0 * uniform() - 1.0)};
      const Vec3 vr = specular_reflect(v, n);
      const double f = f0(bp, v);
      const double fr = f0(bp, vr);
      scale = std::max({scale, std::abs(f), std::abs(fr)});
      if (f < 0.0) {
        rep.nonnegative_ok = false;
        rep.min_f0 = std::min(rep.min_f0, f);
      }

      rep.worst_reflection_violation =
          std::max(rep.worst_reflection_violation, std::abs(f - fr));

      // one-sided inward normal derivative in x, central in v
      const auto ddx_perp = [&](const Vec3& vel) {
        return (f0(bp, vel) - f0(bp - n * eps_x, vel)) / eps_x;
      };
      const double dfv = (f0(bp, v + n * eps_v) - f0(bp, v - n * eps_v)) / (2.0 * eps_v);
      const double vperp = -dot(v, n);
      const double cond = vperp * (ddx_perp(vr) + ddx_perp(v)) + 2.0 * e_perp * dfv;
      rep.worst_gradient_violation = std::max(rep.worst_gradient_violation, std::abs(cond));
    }
  }

  // flatness: sample the band xperp + vperp^2 <= delta_0 (tangential speed free)
  if (flatness_delta > 0.0) {
    for (int i = 0; i < wall_samples; ++i) {
      const Vec3 bp = domain.boundary_point(fibonacci_sphere(i, wall_samples));
      const BoundaryFrame fr = surface_frame(bp, domain);
      for (int j = 0; j < velocity_samples; ++j) {
        const double u = uniform();
        const double xperp = flatness_delta * u * uniform();
        const double vperp_max = std::sqrt(std::max(flatness_delta - xperp, 0.0));
        const double vperp = vperp_max * (2.0 * uniform() - 1.0);
        const double wmag = v_support * uniform();
        const double ang = 2.0 * M_PI * uniform();
        const Vec3 x = bp - fr.normal * xperp;
        const Vec3 v = fr.tangent[0] * (wmag * std::cos(ang)) +
                       fr.tangent[1] * (wmag * std::sin(ang)) - fr.normal * vperp;
        rep.worst_flatness_violation =
            std::max(rep.worst_flatness_violation, std::abs(f0(x, v) - flat_value));
      }
    }
  }

  const double tol = 1e-6 * std::max(scale * std::max(1.0, v_support), 1e-300);
  rep.reflection_symmetry_ok = rep.worst_reflection_violation <= tol;
  rep.gradient_condition_ok = rep.worst_gradient_violation <= tol;
  rep.flatness_ok = rep.worst_flatness_violation <= tol;
  return rep;
}

ValidationReport validate_initial(const InitialData& data, const ConvexDomain& domain,
                                  int wall_samples, int velocity_samples, int grid_cells,
                                  uint64_t seed) {
  return validate_initial(
      [&data](const Vec3& x, const Vec3& v) { return data.f0(x, v); }, data.q0(),
      data.flatness_delta > 0.0 ? data.flatness_delta : 0.02 * domain.diameter(),
      data.flat_value, domain, [&data](const Vec3& x) { return data.rho0(x); }, wall_samples,
      velocity_samples, grid_cells, seed);
}

}  // namespace vp
