#include "vp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "vp/errors.hpp"
#include "vp/util.hpp"

namespace vp {

namespace {
constexpr double kThetaMin = 1e-8;
constexpr int kFaceAxis[6] = {0, 0, 1, 1, 2, 2};
constexpr int kFaceSign[6] = {-1, +1, -1, +1, -1, +1};
}  // namespace

GridSpec GridSpec::cover(const ConvexDomain& domain, double h, int pad_cells) {
  const auto bbox = domain.bounding_box();
  GridSpec s;
  s.h = h;
  for (int a = 0; a < 3; ++a) {
    const double extent = bbox[1][a] - bbox[0][a];
    s.n[a] = static_cast<int>(std::ceil(extent / h)) + 2 * pad_cells;
    // center the box inside the padded grid
    const double slack = s.n[a] * h - extent;
    Vec3& o = s.origin;
    o[a] = bbox[0][a] - 0.5 * slack;
  }
  return s;
}

GridSpec GridSpec::cover_cells(const ConvexDomain& domain, int cells, int pad_cells) {
  const auto bbox = domain.bounding_box();
  double extent_max = 0.0;
  for (int a = 0; a < 3; ++a) extent_max = std::max(extent_max, bbox[1][a] - bbox[0][a]);
  return cover(domain, extent_max / cells, pad_cells);
}

CutCellGrid::CutCellGrid(const ConvexDomain& domain, const GridSpec& spec)
    : domain_(&domain), spec_(spec) {
  classify();
  assemble();
}

void CutCellGrid::classify() {
  const double min_extent = [&] {
    const auto bbox = domain_->bounding_box();
    double m = 1e300;
    for (int a = 0; a < 3; ++a) m = std::min(m, bbox[1][a] - bbox[0][a]);
    return m;
  }();
  if (min_extent / spec_.h < 16.0)
    throw GridTooCoarse("grid does not resolve the domain (< 16 cells across min diameter)");

  const std::size_t ncells = spec_.size();
  interior_.assign(ncells, 0);
  unknown_.assign(ncells, -1);

  for (int k = 0; k < spec_.n[2]; ++k)
    for (int j = 0; j < spec_.n[1]; ++j)
      for (int i = 0; i < spec_.n[0]; ++i) {
        const std::size_t c = spec_.index(i, j, k);
        if (domain_->phi(spec_.cell_center(i, j, k)) < 0.0) {
          interior_[c] = 1;
          unknown_[c] = static_cast<int32_t>(interior_cells_.size());
          interior_cells_.push_back(c);
        }
      }
  if (interior_cells_.empty()) throw GridTooCoarse("no interior cells");

  // cut legs: bisect the boundary crossing along each axis leg that leaves
  // the interior set
  legs_.assign(interior_cells_.size() * 6, 1.0);
  neighbors_.assign(interior_cells_.size() * 6, -1);

  for (std::size_t u = 0; u < interior_cells_.size(); ++u) {
    const std::size_t c = interior_cells_[u];
    const int i = static_cast<int>(c % spec_.n[0]);
    const int j = static_cast<int>((c / spec_.n[0]) % spec_.n[1]);
    const int k = static_cast<int>(c / (std::size_t(spec_.n[0]) * spec_.n[1]));
    const Vec3 xc = spec_.cell_center(i, j, k);

    for (int f = 0; f < 6; ++f) {
      const int axis = kFaceAxis[f];
      int ni = i, nj = j, nk = k;
      (axis == 0 ? ni : axis == 1 ? nj : nk) += kFaceSign[f];
      if (interior(ni, nj, nk)) {
        neighbors_[u * 6 + f] = unknown_[spec_.index(ni, nj, nk)];
        continue;
      }
      // leg crosses the boundary: find theta in (0,1] with phi = 0
      Vec3 dir{};
      dir[axis] = kFaceSign[f] * spec_.h;
      double lo = 0.0, hi = 1.0;
      if (domain_->phi(xc + dir) < 0.0) {
        // neighbor center outside the grid but still inside the domain can
        // not happen with padding >= 2; treat defensively as theta = 1
        legs_[u * 6 + f] = 1.0;
        neighbors_[u * 6 + f] = -1;
        continue;
      }
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (domain_->phi(xc + dir * mid) < 0.0 ? lo : hi) = mid;
      }
      legs_[u * 6 + f] = std::max(0.5 * (lo + hi), kThetaMin);
    }
  }

  // the interior must be a single connected component
  std::vector<uint8_t> seen(interior_cells_.size(), 0);
  const Vec3 c0 = domain_->center();
  const int ci = static_cast<int>(std::floor((c0.x - spec_.origin.x) / spec_.h));
  const int cj = static_cast<int>(std::floor((c0.y - spec_.origin.y) / spec_.h));
  const int ck = static_cast<int>(std::floor((c0.z - spec_.origin.z) / spec_.h));
  if (!interior(ci, cj, ck)) throw GridTooCoarse("center cell not interior");
  std::queue<int32_t> q;
  q.push(unknown_[spec_.index(ci, cj, ck)]);
  seen[q.front()] = 1;
  std::size_t reached = 0;
  while (!q.empty()) {
    const int32_t u = q.front();
    q.pop();
    ++reached;
    for (int f = 0; f < 6; ++f) {
      const int32_t nb = neighbors_[std::size_t(u) * 6 + f];
      if (nb >= 0 && !seen[nb]) {
        seen[nb] = 1;
        q.push(nb);
      }
    }
  }
  if (reached != interior_cells_.size())
    throw GridTooCoarse("interior classification is disconnected");
}

void CutCellGrid::assemble() {
  const double h2 = spec_.h * spec_.h;
  coef_.assign(interior_cells_.size() * 7, 0.0);
  for (std::size_t u = 0; u < interior_cells_.size(); ++u) {
    double diag = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      const double tm = legs_[u * 6 + 2 * axis];
      const double tp = legs_[u * 6 + 2 * axis + 1];
      coef_[u * 7 + 2 * axis] = 2.0 / (h2 * tm * (tm + tp));
      coef_[u * 7 + 2 * axis + 1] = 2.0 / (h2 * tp * (tm + tp));
      diag -= 2.0 / (h2 * tm * tp);
    }
    coef_[u * 7 + 6] = diag;
  }
}

bool CutCellGrid::has_cut_leg(int32_t u) const {
  for (int f = 0; f < 6; ++f)
    if (legs_[std::size_t(u) * 6 + f] < 1.0) return true;
  return false;
}

double CutCellGrid::volume_weight(int32_t u) const {
  double w = 1.0;
  for (int axis = 0; axis < 3; ++axis)
    w *= 0.5 * (legs_[std::size_t(u) * 6 + 2 * axis] + legs_[std::size_t(u) * 6 + 2 * axis + 1]);
  return w;
}

double CutCellGrid::cell_volume(int32_t u) const {
  return volume_weight(u) * spec_.h * spec_.h * spec_.h;
}

void CutCellGrid::apply_laplacian(const std::vector<double>& x, std::vector<double>& out) const {
  const std::size_t nu = interior_cells_.size();
  out.resize(nu);
  for (std::size_t u = 0; u < nu; ++u) {
    double s = coef_[u * 7 + 6] * x[u];
    for (int f = 0; f < 6; ++f) {
      const int32_t nb = neighbors_[u * 6 + f];
      if (nb >= 0) s += coef_[u * 7 + f] * x[nb];
      // boundary legs carry the Dirichlet value 0
    }
    out[u] = s;
  }
}

std::shared_ptr<const CutCellGrid> make_grid(const ConvexDomain& domain, const GridSpec& spec) {
  return std::make_shared<const CutCellGrid>(domain, spec);
}

DensityGrid DensityGrid::from_function(std::shared_ptr<const CutCellGrid> grid,
                                       const std::function<double(const Vec3&)>& f) {
  DensityGrid d;
  d.grid = std::move(grid);
  const auto& g = *d.grid;
  d.rho.assign(g.spec().size(), 0.0);
  d.mass.assign(g.spec().size(), 0.0);
  KahanSum total;
  for (std::size_t u = 0; u < g.n_interior(); ++u) {
    const std::size_t c = g.interior_cells()[u];
    const int i = static_cast<int>(c % g.spec().n[0]);
    const int j = static_cast<int>((c / g.spec().n[0]) % g.spec().n[1]);
    const int k = static_cast<int>(c / (std::size_t(g.spec().n[0]) * g.spec().n[1]));
    const double v = f(g.spec().cell_center(i, j, k));
    d.rho[c] = v;
    d.mass[c] = v * g.cell_volume(static_cast<int32_t>(u));
    total.add(d.mass[c]);
  }
  d.total_mass = total.value();
  return d;
}

DensityGrid DensityGrid::zero(std::shared_ptr<const CutCellGrid> grid) {
  DensityGrid d;
  d.grid = std::move(grid);
  d.rho.assign(d.grid->spec().size(), 0.0);
  d.mass.assign(d.grid->spec().size(), 0.0);
  d.total_mass = 0.0;
  return d;
}

}  // namespace vp
