#include "vp/poisson.hpp"

#include <algorithm>
#include <cmath>

#include "vp/errors.hpp"
#include "vp/util.hpp"

namespace vp {

FieldSample decompose_field(const Vec3& E, const BoundaryFrame& frame) {
  FieldSample s;
  s.E = E;
  s.has_frame = true;
  s.E_tan[0] = dot(E, frame.tangent[0]);
  s.E_tan[1] = dot(E, frame.tangent[1]);
  s.E_perp = -dot(E, frame.normal);
  return s;
}

AnalyticField uniform_ball_field(double radius) {
  const double R2 = radius * radius;
  return AnalyticField([](const Vec3& x) { return x / 3.0; },
                       [R2](const Vec3& x) { return (norm2(x) - R2) / 6.0; });
}

namespace {

double dot_vec(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_vec(const std::vector<double>& a) { return std::sqrt(dot_vec(a, a)); }

// Derivative at the center point of a nonuniform 3-point stencil
// (-sm, fm), (0, f0), (+sp, fp); exact through quadratics.
double three_point_derivative(double sm, double fm, double f0, double sp, double fp) {
  return (sm * sm * fp - sp * sp * fm + (sp * sp - sm * sm) * f0) / (sp * sm * (sp + sm));
}

}  // namespace

PotentialField solve_poisson(const DensityGrid& rho, const ConvexDomain& domain, double tol,
                             const PotentialField* warm_start) {
  static_cast<void>(domain);  // geometry lives on the classified grid
  const auto grid = rho.grid;
  const CutCellGrid& g = *grid;
  const std::size_t n = g.n_interior();

  // negativity of the density would silently break the maximum-principle
  // checks downstream, catch it here
  for (std::size_t u = 0; u < n; ++u) {
    if (rho.rho[g.interior_cells()[u]] < 0.0)
      throw SolverDivergence("solve_poisson: negative density on an interior cell");
  }

  std::vector<double> b(n);
  for (std::size_t u = 0; u < n; ++u) b[u] = rho.rho[g.interior_cells()[u]];

  PotentialField out;
  out.grid_ = grid;
  out.phi_.assign(g.spec().size(), 0.0);

  std::vector<double> x(n, 0.0);
  const double normb = norm_vec(b);

  if (normb > 0.0) {
    if (warm_start && warm_start->grid_ == grid) {
      for (std::size_t u = 0; u < n; ++u) x[u] = warm_start->phi_[g.interior_cells()[u]];
    }

    std::vector<double> inv_diag(n);
    for (std::size_t u = 0; u < n; ++u) inv_diag[u] = 1.0 / g.stencil_diag(static_cast<int32_t>(u));

    const int cap = 20 * std::max({g.spec().n[0], g.spec().n[1], g.spec().n[2]});

    std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);
    g.apply_laplacian(x, r);
    for (std::size_t u = 0; u < n; ++u) r[u] = b[u] - r[u];
    r0 = r;

    double rho_k = 1.0, alpha = 1.0, omega = 1.0;
    double resid = norm_vec(r) / normb;
    int it = 0;
    while (resid > tol && it < cap) {
      ++it;
      const double rho_k1 = dot_vec(r0, r);
      if (std::abs(rho_k1) < 1e-300) {
        // shadow residual collapse: restart against the current residual
        r0 = r;
        rho_k = 1.0;
        alpha = 1.0;
        omega = 1.0;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        continue;
      }
      const double beta = (rho_k1 / rho_k) * (alpha / omega);
      for (std::size_t u = 0; u < n; ++u) p[u] = r[u] + beta * (p[u] - omega * v[u]);
      for (std::size_t u = 0; u < n; ++u) phat[u] = p[u] * inv_diag[u];
      g.apply_laplacian(phat, v);
      alpha = rho_k1 / dot_vec(r0, v);
      for (std::size_t u = 0; u < n; ++u) s[u] = r[u] - alpha * v[u];
      if (norm_vec(s) / normb <= tol) {
        for (std::size_t u = 0; u < n; ++u) x[u] += alpha * phat[u];
        r = s;
        resid = norm_vec(r) / normb;
        break;
      }
      for (std::size_t u = 0; u < n; ++u) shat[u] = s[u] * inv_diag[u];
      g.apply_laplacian(shat, t);
      const double tt = dot_vec(t, t);
      if (tt < 1e-300) throw SolverDivergence("solve_poisson: BiCGStab breakdown");
      omega = dot_vec(t, s) / tt;
      for (std::size_t u = 0; u < n; ++u) {
        x[u] += alpha * phat[u] + omega * shat[u];
        r[u] = s[u] - omega * t[u];
      }
      rho_k = rho_k1;
      resid = norm_vec(r) / normb;
    }

    // true residual, not the recurrence's estimate
    g.apply_laplacian(x, t);
    for (std::size_t u = 0; u < n; ++u) t[u] = b[u] - t[u];
    resid = norm_vec(t) / normb;
    if (resid > 8.0 * tol)
      throw SolverDivergence("solve_poisson: residual " + std::to_string(resid) +
                             " above tolerance after iteration cap");
    out.residual_ = resid;
    out.iterations_ = it;
  }

  double mn = 0.0, mx = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    out.phi_[g.interior_cells()[u]] = x[u];
    mn = std::min(mn, x[u]);
    mx = std::max(mx, x[u]);
  }
  out.min_phi_ = mn;
  out.max_phi_ = mx;

  // maximum principle: nonnegative charge must give a nonpositive potential
  const double scale = std::max(std::abs(mn), 1e-300);
  if (mx > 1e-7 * scale + 64.0 * tol * scale)
    throw SolverDivergence("solve_poisson: maximum principle violated (max phi > 0)");

  out.finalize_gradients();
  return out;
}

PotentialField PotentialField::from_values(std::shared_ptr<const CutCellGrid> grid,
                                           const std::vector<double>& interior_values) {
  PotentialField out;
  out.grid_ = std::move(grid);
  const CutCellGrid& g = *out.grid_;
  out.phi_.assign(g.spec().size(), 0.0);
  double mn = 0.0, mx = 0.0;
  for (std::size_t u = 0; u < g.n_interior(); ++u) {
    out.phi_[g.interior_cells()[u]] = interior_values[u];
    mn = std::min(mn, interior_values[u]);
    mx = std::max(mx, interior_values[u]);
  }
  out.min_phi_ = mn;
  out.max_phi_ = mx;
  out.finalize_gradients();
  return out;
}

void PotentialField::finalize_gradients() {
  const CutCellGrid& g = *grid_;
  const GridSpec& sp = g.spec();
  gradient_.assign(sp.size(), Vec3{});
  const double h = sp.h;

  for (std::size_t u = 0; u < g.n_interior(); ++u) {
    const std::size_t c = g.interior_cells()[u];
    const double f0 = phi_[c];
    Vec3 grad{};
    for (int axis = 0; axis < 3; ++axis) {
      const double tm = g.leg(static_cast<int32_t>(u), 2 * axis);
      const double tp = g.leg(static_cast<int32_t>(u), 2 * axis + 1);
      const int32_t nbm = g.neighbor(static_cast<int32_t>(u), 2 * axis);
      const int32_t nbp = g.neighbor(static_cast<int32_t>(u), 2 * axis + 1);
      const double fm = nbm >= 0 ? phi_[g.cell_of(nbm)] : 0.0;
      const double fp = nbp >= 0 ? phi_[g.cell_of(nbp)] : 0.0;
      grad[axis] = three_point_derivative(tm * h, fm, f0, tp * h, fp);
    }
    gradient_[c] = grad;
  }
}

bool PotentialField::trilinear_value(const Vec3& p, double& out) const {
  const GridSpec& sp = grid_->spec();
  const double ux = (p.x - sp.origin.x) / sp.h - 0.5;
  const double uy = (p.y - sp.origin.y) / sp.h - 0.5;
  const double uz = (p.z - sp.origin.z) / sp.h - 0.5;
  const int i0 = static_cast<int>(std::floor(ux));
  const int j0 = static_cast<int>(std::floor(uy));
  const int k0 = static_cast<int>(std::floor(uz));
  const double fx = ux - i0, fy = uy - j0, fz = uz - k0;

  double acc = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        if (!grid_->interior(i0 + a, j0 + b, k0 + c)) return false;
        const double w = (a ? fx : 1.0 - fx) * (b ? fy : 1.0 - fy) * (c ? fz : 1.0 - fz);
        acc += w * phi_[sp.index(i0 + a, j0 + b, k0 + c)];
      }
  out = acc;
  return true;
}

double PotentialField::value(const Vec3& x) const {
  const ConvexDomain& dom = grid_->domain();
  if (dom.phi(x) > 0.0 && !dom.on_boundary(x, 1e-9))
    throw OutsideDomain("potential evaluation outside the domain");

  // Trilinear interpolation of phi carries an O(h^2) absolute error, which
  // overwhelms the value near the Dirichlet wall where phi itself is O(d).
  // Within a few cells of the wall, switch to the anchored reconstruction.
  const double h_grid = grid_->spec().h;
  const Vec3 gx = dom.grad(x);
  const double dist_est = -dom.phi(x) / std::max(norm(gx), 1e-300);
  double v;
  if (dist_est > 2.6 * h_grid && trilinear_value(x, v)) return v;

  // Near the wall the value is reconstructed from the Dirichlet datum:
  // phi(0) = 0 along the inward normal, and the normal derivative measured
  // at two interior depths (cell-gradient interpolation, which stays
  // second-order without the 1/s amplification a value-anchored fit has).
  BoundaryFrame fr;
  try {
    fr = project_to_boundary(x, dom);
  } catch (const AmbiguousProjection&) {
    throw FieldEvalFailure("potential evaluation: no interior stencil and no unique projection");
  }
  const double h = grid_->spec().h;
  const double width = dom.tubular_width();
  const double s2 = std::min(5.0 * h, 0.9 * width);
  const double s1 = 0.5 * s2;
  if (!(s2 > 1.2 * h))
    throw FieldEvalFailure("potential evaluation: tubular neighborhood unresolved by the grid");

  // d(phi)/ds along s -> point - s n equals -n . grad(phi)
  const double g1 = -dot(field(fr.point - fr.normal * s1), fr.normal);
  const double g2 = -dot(field(fr.point - fr.normal * s2), fr.normal);
  const double b = (g2 - g1) / (s2 - s1);
  const double a = g1 - b * s1;
  const double d = fr.wall_distance;
  return a * d + 0.5 * b * d * d;
}

Vec3 PotentialField::field(const Vec3& p) const {
  const ConvexDomain& dom = grid_->domain();
  Vec3 x = p;
  const double phix = dom.phi(x);
  if (phix > 0.0) {
    // tolerate event-location overshoot by pulling back along the gradient
    const Vec3 g = dom.grad(x);
    const double g2 = norm2(g);
    if (g2 < 1e-300 || phix / std::sqrt(g2) > 1e-9 * dom.diameter())
      throw OutsideDomain("field evaluation outside the domain");
    x -= g * (phix / g2) * 1.0000001;
  }

  const GridSpec& sp = grid_->spec();
  const double ux = (x.x - sp.origin.x) / sp.h - 0.5;
  const double uy = (x.y - sp.origin.y) / sp.h - 0.5;
  const double uz = (x.z - sp.origin.z) / sp.h - 0.5;
  const int i0 = static_cast<int>(std::floor(ux));
  const int j0 = static_cast<int>(std::floor(uy));
  const int k0 = static_cast<int>(std::floor(uz));
  const double fx = ux - i0, fy = uy - j0, fz = uz - k0;

  Vec3 acc{};
  double wsum = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        if (!grid_->interior(i0 + a, j0 + b, k0 + c)) continue;  // shrink at the wall
        const double w = (a ? fx : 1.0 - fx) * (b ? fy : 1.0 - fy) * (c ? fz : 1.0 - fz);
        acc += gradient_[sp.index(i0 + a, j0 + b, k0 + c)] * w;
        wsum += w;
      }
  if (wsum <= 1e-14) throw FieldEvalFailure("field evaluation: empty interpolation stencil");
  return acc / wsum;
}

FieldSample PotentialField::sample(const Vec3& x, const BoundaryFrame* frame) const {
  const Vec3 E = field(x);
  if (frame) return decompose_field(E, *frame);
  FieldSample s;
  s.E = E;
  return s;
}

double PotentialField::field_energy() const {
  const CutCellGrid& g = *grid_;
  KahanSum sum;
  for (std::size_t u = 0; u < g.n_interior(); ++u) {
    const std::size_t c = g.interior_cells()[u];
    sum.add(norm2(gradient_[c]) * g.cell_volume(static_cast<int32_t>(u)));
  }
  return sum.value();
}

}  // namespace vp
