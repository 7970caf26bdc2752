#pragma once
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "vp/domain.hpp"
#include "vp/vec3.hpp"

namespace vp {

// Uniform cell-centered Cartesian grid covering the domain's bounding box
// with a small halo of padding cells.
struct GridSpec {
  Vec3 origin{};       // corner of cell (0,0,0)
  double h = 0.0;      // spacing
  int n[3] = {0, 0, 0};

  static GridSpec cover(const ConvexDomain& domain, double h, int pad_cells = 2);
  // cells counted across the longest bounding-box extent
  static GridSpec cover_cells(const ConvexDomain& domain, int cells, int pad_cells = 2);

  std::size_t size() const { return std::size_t(n[0]) * n[1] * n[2]; }
  std::size_t index(int i, int j, int k) const {
    return std::size_t(i) + std::size_t(n[0]) * (std::size_t(j) + std::size_t(n[1]) * k);
  }
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < n[0] && j < n[1] && k < n[2];
  }
  Vec3 cell_center(int i, int j, int k) const {
    return {origin.x + (i + 0.5) * h, origin.y + (j + 0.5) * h, origin.z + (k + 0.5) * h};
  }
};

// Classification of the grid against the domain plus the cut-leg data the
// 7-point stencil needs: for each interior cell, the fraction theta in (0,1]
// of each axis leg that lies inside the domain (1 when the neighbor cell
// center is interior too; the Dirichlet surface sits at theta*h otherwise).
//
// By convexity a leg between two interior cell centers is never cut, so cut
// legs always end on the boundary and carry the Dirichlet value.
class CutCellGrid {
 public:
  CutCellGrid(const ConvexDomain& domain, const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  const ConvexDomain& domain() const { return *domain_; }

  bool interior(std::size_t cell) const { return interior_[cell] != 0; }
  bool interior(int i, int j, int k) const {
    return spec_.contains(i, j, k) && interior_[spec_.index(i, j, k)] != 0;
  }
  // unknown index of an interior cell, -1 otherwise
  int32_t unknown_of(std::size_t cell) const { return unknown_[cell]; }
  std::size_t cell_of(int32_t unknown) const { return interior_cells_[unknown]; }
  std::size_t n_interior() const { return interior_cells_.size(); }
  const std::vector<std::size_t>& interior_cells() const { return interior_cells_; }

  // legs ordered -x,+x,-y,+y,-z,+z
  double leg(int32_t unknown, int face) const { return legs_[std::size_t(unknown) * 6 + face]; }
  bool has_cut_leg(int32_t unknown) const;

  // Shortley-Weller volume weight: prod_axis (theta_- + theta_+)/2.
  // Exactly 1 on uncut cells.
  double volume_weight(int32_t unknown) const;
  double cell_volume(int32_t unknown) const;  // weight * h^3

  // Discrete Laplacian with boundary value 0 on cut legs, acting on a vector
  // of interior unknowns.
  void apply_laplacian(const std::vector<double>& u, std::vector<double>& out) const;

  // neighbor unknown on each face (-1 when the leg ends on the boundary)
  int32_t neighbor(int32_t unknown, int face) const {
    return neighbors_[std::size_t(unknown) * 6 + face];
  }
  double stencil_coef(int32_t unknown, int face) const {
    return coef_[std::size_t(unknown) * 7 + face];
  }
  double stencil_diag(int32_t unknown) const { return coef_[std::size_t(unknown) * 7 + 6]; }

 private:
  void classify();
  void assemble();

  const ConvexDomain* domain_;
  GridSpec spec_;
  std::vector<uint8_t> interior_;
  std::vector<int32_t> unknown_;
  std::vector<std::size_t> interior_cells_;
  std::vector<double> legs_;       // 6 per unknown
  std::vector<int32_t> neighbors_; // 6 per unknown
  std::vector<double> coef_;       // 6 off-diagonal + diagonal per unknown
};

std::shared_ptr<const CutCellGrid> make_grid(const ConvexDomain& domain, const GridSpec& spec);

// Cell-centered charge density on a classified grid. rho is zero on exterior
// cells; `mass` holds the integral contribution per cell so the total is
// conserved independently of the volume weighting.
struct DensityGrid {
  std::shared_ptr<const CutCellGrid> grid;
  std::vector<double> rho;
  std::vector<double> mass;
  double total_mass = 0.0;

  static DensityGrid from_function(std::shared_ptr<const CutCellGrid> grid,
                                   const std::function<double(const Vec3&)>& f);
  static DensityGrid zero(std::shared_ptr<const CutCellGrid> grid);
};

}  // namespace vp
