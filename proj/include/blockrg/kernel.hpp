#pragma once

#include <cmath>
#include <vector>

#include "blockrg/lattice.hpp"
#include "blockrg/spin.hpp"

namespace blockrg {

enum class KernelKind { decimation, kadanoff, majority, trivial };

struct Kernel {
    KernelKind kind = KernelKind::decimation;
    double kappa = 1.0;  // Kadanoff parameter
};

// RG block geometry: a partition of the original volume into blocks, one
// image spin per block. The image lattice's site ordering equals the block
// ordering.
struct Blocking {
    std::vector<std::vector<int>> blocks;  // sites per block, canonical order
    std::vector<int> kept;                 // decimation representative per block
    Lattice image;

    int n_blocks() const { return static_cast<int>(blocks.size()); }
};

// Square / chain blocking with spacing b: block (X,Y) covers the b-cell with
// corner (bX, bY); the kept site is the corner.
inline Blocking make_block_geometry(const Lattice& lat, int b) {
    if (b < 1) throw config_error("block spacing must be >= 1");
    for (int k = 0; k < lat.dim(); ++k)
        if (lat.extent(k) % b != 0) throw config_error("block spacing must divide extent");
    Blocking out;
    int bx = lat.extent(0) / b;
    int by = lat.dim() == 2 ? lat.extent(1) / b : 1;
    LatticeSpec ispec = lat.spec();
    ispec.extent[0] = bx;
    if (lat.dim() == 2) ispec.extent[1] = by;
    out.image = Lattice(ispec);
    out.blocks.resize(std::size_t(bx) * by);
    out.kept.resize(out.blocks.size());
    for (int s = 0; s < lat.size(); ++s) {
        Coord c = lat.coord(s);
        int blk = (c[0] / b) + bx * (c[1] / b);
        out.blocks[blk].push_back(s);
        if (c[0] % b == 0 && c[1] % b == 0) out.kept[blk] = s;
    }
    return out;
}

// Triangular lattice partitioned into upward 3-site triangles anchored on the
// sublattice (x + 2y) % 3 == 0: block = {(x,y), (x+1,y), (x,y+1)}. Extents
// must be multiples of 3. The image volume is reported as a chain of block
// spins in anchor order (the anchors do not form a rectangular grid).
inline Blocking make_triangle_blocking(const Lattice& lat) {
    if (lat.spec().geometry != Geometry::triangular_2d)
        throw config_error("triangle blocking requires a triangular lattice");
    if (!lat.periodic()) throw config_error("triangle blocking requires periodic boundary");
    for (int k = 0; k < 2; ++k)
        if (lat.extent(k) % 3 != 0) throw config_error("triangle blocking needs extents % 3 == 0");
    Blocking out;
    for (int s = 0; s < lat.size(); ++s) {
        Coord c = lat.coord(s);
        if (Lattice::mod(c[0] + 2 * c[1], 3) != 0) continue;
        out.blocks.push_back({s, lat.index({c[0] + 1, c[1]}), lat.index({c[0], c[1] + 1})});
        out.kept.push_back(s);
    }
    LatticeSpec ispec;
    ispec.geometry = Geometry::square_1d;
    ispec.extent = {static_cast<int>(out.blocks.size())};
    ispec.boundary = Boundary::periodic;
    out.image = Lattice(ispec);
    return out;
}

// Trivial kernel: empty image volume, T == 1.
inline Blocking make_trivial_blocking() {
    Blocking out;
    LatticeSpec ispec;
    ispec.geometry = Geometry::square_1d;
    ispec.extent = {1};          // placeholder: image has one block-free "site" slot
    ispec.boundary = Boundary::free_;
    out.image = Lattice(ispec);  // unused; n_blocks() == 0 is what matters
    return out;
}

inline int block_spin_sum(const std::vector<int>& block, Config sigma) {
    int s = 0;
    for (int site : block) s += spin_at(sigma, site);
    return s;
}

// T(sigma, sigma') as a product over RG blocks.
inline double kernel_eval(const Kernel& T, const Blocking& blocking, Config sigma,
                          Config sigma_prime) {
    if (T.kind == KernelKind::trivial) return 1.0;
    double t = 1.0;
    for (int j = 0; j < blocking.n_blocks(); ++j) {
        int sp = spin_at(sigma_prime, j);
        switch (T.kind) {
            case KernelKind::decimation:
                if (spin_at(sigma, blocking.kept[j]) != sp) return 0.0;
                break;
            case KernelKind::kadanoff: {
                int S = block_spin_sum(blocking.blocks[j], sigma);
                t *= std::exp(T.kappa * sp * S) / (2.0 * std::cosh(T.kappa * S));
                break;
            }
            case KernelKind::majority: {
                int S = block_spin_sum(blocking.blocks[j], sigma);
                if (S == 0)
                    t *= 0.5;  // even block tie: split evenly, keeps normalization
                else if ((S > 0 ? +1 : -1) != sp)
                    return 0.0;
                break;
            }
            case KernelKind::trivial:
                break;
        }
    }
    return t;
}

}  // namespace blockrg
