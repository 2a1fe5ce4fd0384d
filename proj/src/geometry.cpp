#include "msalab/geometry.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace msalab {

std::int64_t chebyshev(const Site& a, const Site& b, int dim) {
    std::int64_t m = 0;
    for (int i = 0; i < dim; ++i) m = std::max<std::int64_t>(m, std::abs(a[i] - b[i]));
    return m;
}

BoxSpec::BoxSpec(Site c, int side_, int dim_) : center(c), side(side_), dim(dim_) {
    if (dim < 1 || dim > 3) throw validation_error("BoxSpec: dim must be 1, 2 or 3");
    if (side < 2 || side % 2 != 0) throw validation_error("BoxSpec: side must be a positive even integer");
    for (int i = dim; i < 3; ++i)
        if (center[i] != 0) throw validation_error("BoxSpec: unused center coordinates must be zero");
}

std::int64_t BoxSpec::site_count() const {
    std::int64_t n = 1;
    for (int i = 0; i < dim; ++i) n *= side - 1;
    return n;
}

std::int64_t BoxSpec::belt_count() const {
    if (side == 2) return 1;
    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < dim; ++i) {
        outer *= side - 1;
        inner *= side - 3;
    }
    return outer - inner;
}

int snap_6n(double k) {
    if (!(k >= 6.0)) throw validation_error("snap_6n: argument must be >= 6");
    // guard against K being a hair under an exact multiple of 6
    auto q = static_cast<std::int64_t>(std::floor(k / 6.0 + 1e-12));
    return static_cast<int>(6 * q);
}

std::vector<Site> sites(const BoxSpec& box) {
    const std::int64_t h = box.half();
    std::vector<Site> out;
    out.reserve(static_cast<std::size_t>(box.site_count()));
    if (box.dim == 1) {
        for (std::int64_t x = box.center[0] - h; x <= box.center[0] + h; ++x) out.push_back({x, 0, 0});
    } else if (box.dim == 2) {
        for (std::int64_t x = box.center[0] - h; x <= box.center[0] + h; ++x)
            for (std::int64_t y = box.center[1] - h; y <= box.center[1] + h; ++y) out.push_back({x, y, 0});
    } else {
        for (std::int64_t x = box.center[0] - h; x <= box.center[0] + h; ++x)
            for (std::int64_t y = box.center[1] - h; y <= box.center[1] + h; ++y)
                for (std::int64_t z = box.center[2] - h; z <= box.center[2] + h; ++z) out.push_back({x, y, z});
    }
    return out;
}

bool contains_site(const BoxSpec& box, const Site& s) {
    return chebyshev(s, box.center, box.dim) <= box.half();
}

std::int64_t site_index(const BoxSpec& box, const Site& s) {
    const std::int64_t h = box.half();
    const std::int64_t w = box.side - 1;
    std::int64_t idx = 0;
    for (int i = 0; i < box.dim; ++i) {
        const std::int64_t off = s[i] - (box.center[i] - h);
        if (off < 0 || off >= w) throw validation_error("site_index: site outside box");
        idx = idx * w + off;
    }
    return idx;
}

std::vector<std::int64_t> belt_indices(const BoxSpec& box) {
    const std::int64_t h = box.half();
    std::vector<std::int64_t> out;
    const auto all = sites(box);
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(all.size()); ++i)
        if (chebyshev(all[static_cast<std::size_t>(i)], box.center, box.dim) == h) out.push_back(i);
    return out;
}

BoxSpec core_box(const BoxSpec& box, int core_side) {
    if (core_side >= box.side) throw validation_error("core_box: core side must be smaller than box side");
    return BoxSpec(box.center, core_side, box.dim);
}

std::vector<std::int64_t> subbox_indices(const BoxSpec& outer, const BoxSpec& inner) {
    std::vector<std::int64_t> out;
    for (const auto& s : sites(inner)) {
        if (!contains_site(outer, s)) throw validation_error("subbox_indices: inner site outside outer box");
        out.push_back(site_index(outer, s));
    }
    return out;
}

std::vector<std::int64_t> thick_belt_indices(const BoxSpec& box) {
    if (box.side % 6 != 0) throw validation_error("thick_belt_indices: side must be in 6N");
    const std::int64_t rin = box.side / 6; // sites with |y-c| >= L/6, complement of the open core
    std::vector<std::int64_t> out;
    const auto all = sites(box);
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(all.size()); ++i)
        if (chebyshev(all[static_cast<std::size_t>(i)], box.center, box.dim) >= rin) out.push_back(i);
    return out;
}

bool is_inside_thick(const BoxSpec& inner, const BoxSpec& outer) {
    if (inner.dim != outer.dim) throw validation_error("is_inside_thick: dimension mismatch");
    if (outer.side <= inner.side + 3)
        throw validation_error("is_inside_thick: outer side must exceed inner side + 3");
    const std::int64_t margin = (outer.side - 3 - inner.side) / 2;
    return chebyshev(inner.center, outer.center, inner.dim) <= margin;
}

bool nonoverlapping(const BoxSpec& a, const BoxSpec& b, const Separation& sep) {
    if (a.dim != b.dim) throw validation_error("nonoverlapping: dimension mismatch");
    return chebyshev(a.center, b.center, a.dim) > (a.side + b.side) / 2 + sep.rho;
}

CellGrid::CellGrid(const BoxSpec& parent, int ell) : parent_(parent), ell_(ell) {
    if (ell < 6 || ell % 6 != 0) throw validation_error("CellGrid: ell must be in 6N");
    const std::int64_t pitch = ell / 3;
    const std::int64_t kmax = (parent.side / 2) / pitch; // closed-box membership |y-x| <= L/2
    // worst site sits at L/2 - 1; the last grid point must reach within ell/6 of it
    const std::int64_t gap = parent.half() - kmax * pitch;
    if (gap > ell / 6)
        throw validation_error("CellGrid: cells of side ell/3 on the ell/3 pitch do not cover the box (L=" +
                               std::to_string(parent.side) + ", ell=" + std::to_string(ell) + ")");
    std::vector<std::int64_t> ks;
    for (std::int64_t k = -kmax; k <= kmax; ++k) ks.push_back(k * pitch);
    if (parent.dim == 1) {
        for (auto x : ks) centers_.push_back({parent.center[0] + x, 0, 0});
    } else if (parent.dim == 2) {
        for (auto x : ks)
            for (auto y : ks) centers_.push_back({parent.center[0] + x, parent.center[1] + y, 0});
    } else {
        for (auto x : ks)
            for (auto y : ks)
                for (auto z : ks)
                    centers_.push_back({parent.center[0] + x, parent.center[1] + y, parent.center[2] + z});
    }
}

std::vector<Site> CellGrid::covering_family() const {
    std::vector<Site> out;
    const std::int64_t margin = (parent_.side - 3 - ell_) / 2;
    if (parent_.side <= ell_ + 3) return out;
    for (const auto& c : centers_)
        if (chebyshev(c, parent_.center, parent_.dim) <= margin) out.push_back(c);
    return out;
}

bool CellGrid::closed_cell_contains(const Site& cell_center, const Site& s) const {
    return chebyshev(cell_center, s, parent_.dim) <= ell_ / 6;
}

bool CellGrid::covers_parent() const {
    for (const auto& s : sites(parent_)) {
        bool hit = false;
        for (const auto& c : centers_)
            if (closed_cell_contains(c, s)) {
                hit = true;
                break;
            }
        if (!hit) return false;
    }
    return true;
}

} // namespace msalab
