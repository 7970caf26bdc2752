#include "vp/field_diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "vp/errors.hpp"
#include "vp/util.hpp"

namespace vp {

HopfMargin hopf_margin(const PotentialField& field, const ConvexDomain& domain, double band,
                       int directions, int depths) {
  if (band <= 0.0 || band > domain.tubular_width())
    throw LadderExitsGrid("hopf_margin: band outside the tubular neighborhood");

  HopfMargin m;
  m.band = band;
  m.eps0 = 1e300;
  for (int i = 0; i < directions; ++i) {
    const Vec3 bp = domain.boundary_point(fibonacci_sphere(i, directions));
    const Vec3 n = normalized(domain.grad(bp));
    for (int j = 1; j <= depths; ++j) {
      const double d = band * j / depths;
      const Vec3 x = bp - n * d;
      const double phi = field.value(x);
      const double ratio = -phi / d;
      if (ratio < m.eps0) {
        m.eps0 = ratio;
        m.worst_point = x;
      }
      ++m.samples;
    }
  }
  if (!(m.eps0 > 0.0))
    throw NonpositiveMargin("hopf_margin: potential does not dominate the wall distance");
  return m;
}

namespace {

double envelope_g(double d) { return d * (1.0 + std::abs(std::log(d))); }

DecayFit fit_envelope(const std::vector<double>& d, const std::vector<double>& y) {
  DecayFit fit;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double g = envelope_g(d[i]);
    num += y[i] * g;
    den += g * g;
  }
  fit.C = den > 0.0 ? num / den : 0.0;

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= std::max<std::size_t>(y.size(), 1);
  double ss_res = 0.0, ss_tot = 0.0, env = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double pred = fit.C * envelope_g(d[i]);
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean) * (y[i] - mean);
    if (pred > 0.0) env = std::max(env, y[i] / pred);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.envelope = env;
  return fit;
}

}  // namespace

DecayScan boundary_decay_scan(const DecayScanRequest& req, const ConvexDomain& domain) {
  if (req.d0 > domain.tubular_width())
    throw LadderExitsGrid("decay scan: ladder start outside the tubular neighborhood");

  DecayScan scan;

  const DensityGrid rho0 = req.rho_at(req.t0);
  const PotentialField phi0 = solve_poisson(rho0, domain, req.solver_tol);

  PotentialField phi_minus, phi_plus;
  if (req.time_derivative) {
    const DensityGrid rm = req.rho_at(req.t0 - req.dt_fd);
    const DensityGrid rp = req.rho_at(req.t0 + req.dt_fd);
    // discrete continuity implies the snapshots carry the same total mass
    const double scale = std::max(std::abs(rho0.total_mass), 1e-30);
    if (std::abs(rm.total_mass - rho0.total_mass) > 1e-6 * scale ||
        std::abs(rp.total_mass - rho0.total_mass) > 1e-6 * scale)
      scan.continuity_ok = false;
    phi_minus = solve_poisson(rm, domain, req.solver_tol, &phi0);
    phi_plus = solve_poisson(rp, domain, req.solver_tol, &phi0);
  }

  const Vec3 anchor = domain.boundary_point(req.direction);
  const BoundaryFrame fr = surface_frame(anchor, domain);
  scan.anchor_point = anchor;

  // The potential vanishes identically on the wall, so every tangential
  // component of grad(phi) vanishes there too. Measure it at two full-stencil
  // depths along the inward normal and carry the wall-anchored quadratic
  // a s + b s^2 down the ladder: probe error then scales with d like the
  // signal does, instead of being swamped by interpolation noise at d << h.
  const double h = rho0.grid->spec().h;
  double s2 = std::min(5.0 * h, 0.8 * domain.tubular_width());
  double s1 = 0.5 * s2;
  if (s1 < 2.2 * h) {
    s1 = 2.2 * h;
    s2 = std::min(2.0 * s1, 0.95 * domain.tubular_width());
  }
  if (!(s2 > s1))
    throw LadderExitsGrid("decay scan: tubular neighborhood too thin for the grid");

  double a_tan[2], b_tan[2];
  for (int tdir = 0; tdir < 2; ++tdir) {
    const double g1 = dot(phi0.field(anchor - fr.normal * s1), fr.tangent[tdir]);
    const double g2 = dot(phi0.field(anchor - fr.normal * s2), fr.tangent[tdir]);
    const double det = s1 * s2 * (s2 - s1);
    a_tan[tdir] = (s2 * s2 * g1 - s1 * s1 * g2) / det;
    b_tan[tdir] = (s1 * g2 - s2 * g1) / det;
  }

  std::vector<double> ds, ytan, ytime;
  for (int m = 0; m <= req.m_max; ++m) {
    const double d = req.d0 * std::pow(2.0, -m);
    DecayRung rung;
    rung.d = d;
    for (int tdir = 0; tdir < 2; ++tdir) {
      if (d >= s1) {
        rung.dphi_dtau[tdir] = dot(phi0.field(anchor - fr.normal * d), fr.tangent[tdir]);
      } else {
        rung.dphi_dtau[tdir] = a_tan[tdir] * d + b_tan[tdir] * d * d;
      }
    }
    if (req.time_derivative) {
      const Vec3 x = anchor - fr.normal * d;
      rung.dphi_dt = (phi_plus.value(x) - phi_minus.value(x)) / (2.0 * req.dt_fd);
      ytime.push_back(std::abs(rung.dphi_dt));
    }
    ds.push_back(d);
    ytan.push_back(std::max(std::abs(rung.dphi_dtau[0]), std::abs(rung.dphi_dtau[1])));
    scan.rungs.push_back(rung);
  }

  scan.tangential_fit = fit_envelope(ds, ytan);
  if (req.time_derivative) scan.time_fit = fit_envelope(ds, ytime);
  return scan;
}

}  // namespace vp
