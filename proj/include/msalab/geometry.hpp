#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "msalab/errors.hpp"

namespace msalab {

/// Lattice site; unused trailing coordinates stay zero.
using Site = std::array<std::int64_t, 3>;

inline Site make_site(std::int64_t x, std::int64_t y = 0, std::int64_t z = 0) { return {x, y, z}; }

std::int64_t chebyshev(const Site& a, const Site& b, int dim);

/// Open lattice box of even side L centered at a site: sites with |y - center|_inf <= L/2 - 1.
struct BoxSpec {
    Site center{};
    int side = 0;
    int dim = 1;

    BoxSpec() = default;
    BoxSpec(Site c, int side_, int dim_);

    std::int64_t half() const { return side / 2 - 1; } // site-set radius
    std::int64_t site_count() const;
    std::int64_t belt_count() const; // outermost ring |y - center| = side/2 - 1
};

/// Largest multiple of 6 not exceeding K. Requires K >= 6.
int snap_6n(double k);

/// All sites of the box in lexicographic order; this order defines every matrix index.
std::vector<Site> sites(const BoxSpec& box);

/// Index of a site in the canonical order; the site must belong to the box.
std::int64_t site_index(const BoxSpec& box, const Site& s);

bool contains_site(const BoxSpec& box, const Site& s);

/// Indices (canonical order) of the belt sites |y - center| = side/2 - 1.
std::vector<std::int64_t> belt_indices(const BoxSpec& box);

/// Concentric sub-box of the given side.
BoxSpec core_box(const BoxSpec& box, int core_side);

/// Indices of an inner box's sites within an enclosing box's canonical order.
std::vector<std::int64_t> subbox_indices(const BoxSpec& outer, const BoxSpec& inner);

/// Thick boundary belt: box sites outside the open concentric box of side L/3,
/// i.e. |y - center| >= L/6. Requires side in 6N.
std::vector<std::int64_t> thick_belt_indices(const BoxSpec& box);

/// Lambda_ell inside-with-margin relation: inner box contained in Lambda_{L-3}(outer center).
/// On sites this is |centers' difference|_inf <= floor((L - 3 - ell)/2).
bool is_inside_thick(const BoxSpec& inner, const BoxSpec& outer);

struct Separation {
    std::int64_t rho = 0;
};

/// Boxes are rho-nonoverlapping iff |x - x'|_inf > (L + L')/2 + rho (strict).
bool nonoverlapping(const BoxSpec& a, const BoxSpec& b, const Separation& sep);

/// Cell grid Xi_{L,ell}(x): pitch-ell/3 lattice points within the closed parent box,
/// plus the family of ell-boxes centered on grid points that sit inside the parent
/// with the 3-unit margin. Construction fails if the closed cells of side ell/3 do
/// not cover every parent site (only pathological (L, ell) pairs; never the pairs a
/// valid scale schedule produces).
class CellGrid {
  public:
    CellGrid(const BoxSpec& parent, int ell);

    const BoxSpec& parent() const { return parent_; }
    int ell() const { return ell_; }
    int cell_side() const { return ell_ / 3; }

    const std::vector<Site>& centers() const { return centers_; }
    /// Centers y with Lambda_ell(y) inside-thick the parent.
    std::vector<Site> covering_family() const;

    /// Closed cell membership: |s - center| <= ell/6.
    bool closed_cell_contains(const Site& cell_center, const Site& s) const;
    /// Every parent site lies in at least one closed cell.
    bool covers_parent() const;

  private:
    BoxSpec parent_;
    int ell_ = 0;
    std::vector<Site> centers_;
};

} // namespace msalab
