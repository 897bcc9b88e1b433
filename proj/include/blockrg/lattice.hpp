#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "blockrg/errors.hpp"

namespace blockrg {

enum class Geometry { square_1d, square_2d, triangular_2d };
enum class Boundary { free_, periodic, fixed };

using Coord = std::array<int, 2>;  // 1d lattices use y = 0

inline int dimension_of(Geometry g) { return g == Geometry::square_1d ? 1 : 2; }

struct LatticeSpec {
    Geometry geometry = Geometry::square_1d;
    std::vector<int> extent;  // one entry per dimension
    Boundary boundary = Boundary::periodic;
    // For fixed boundaries: spins on sites outside the volume, keyed by coordinate.
    std::map<Coord, int> boundary_spins;
};

// Finite lattice: canonical row-major site enumeration plus the Euclidean
// metric (minimal periodic image when applicable).
class Lattice {
  public:
    Lattice() = default;

    explicit Lattice(LatticeSpec spec) : spec_(std::move(spec)) {
        dim_ = dimension_of(spec_.geometry);
        if (static_cast<int>(spec_.extent.size()) != dim_)
            throw config_error("lattice extent rank does not match geometry");
        for (int e : spec_.extent)
            if (e < 1) throw config_error("lattice extent must be >= 1");
        ex_ = spec_.extent[0];
        ey_ = dim_ == 2 ? spec_.extent[1] : 1;
        n_ = ex_ * ey_;
    }

    const LatticeSpec& spec() const { return spec_; }
    int dim() const { return dim_; }
    int size() const { return n_; }
    int extent(int k) const { return k == 0 ? ex_ : ey_; }
    bool periodic() const { return spec_.boundary == Boundary::periodic; }

    Coord coord(int site) const { return {site % ex_, site / ex_}; }

    int index(Coord c) const {
        if (periodic()) {
            c[0] = mod(c[0], ex_);
            c[1] = mod(c[1], ey_);
        }
        if (c[0] < 0 || c[0] >= ex_ || c[1] < 0 || c[1] >= ey_)
            throw config_error("site outside volume");
        return c[0] + ex_ * c[1];
    }

    bool inside(Coord c) const {
        return c[0] >= 0 && c[0] < ex_ && c[1] >= 0 && c[1] < ey_;
    }

    // Coordinate difference, wrapped to the minimal periodic image.
    Coord delta(Coord a, Coord b) const {
        Coord d{a[0] - b[0], a[1] - b[1]};
        if (periodic()) {
            d[0] = min_image(d[0], ex_);
            d[1] = min_image(d[1], ey_);
        }
        return d;
    }

    double dist(int i, int j) const {
        Coord d = delta(coord(i), coord(j));
        return std::sqrt(double(d[0]) * d[0] + double(d[1]) * d[1]);
    }

    // Chebyshev (sup-norm) distance; used by the long-range/short-range split.
    int cheb_dist(int i, int j) const {
        Coord d = delta(coord(i), coord(j));
        return std::max(std::abs(d[0]), std::abs(d[1]));
    }

    std::vector<int> neighbors(int site) const {
        static const Coord sq2[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        static const Coord tri[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}};
        std::vector<int> out;
        Coord c = coord(site);
        auto push = [&](Coord d) {
            Coord q{c[0] + d[0], c[1] + d[1]};
            if (periodic() || inside(q)) out.push_back(index(q));
        };
        switch (spec_.geometry) {
            case Geometry::square_1d:
                push({1, 0});
                push({-1, 0});
                break;
            case Geometry::square_2d:
                for (auto d : sq2) push(d);
                break;
            case Geometry::triangular_2d:
                for (auto d : tri) push(d);
                break;
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    static int mod(int a, int m) { return ((a % m) + m) % m; }

    static int min_image(int d, int m) {
        d = mod(d, m);
        if (2 * d > m) d -= m;
        return d;
    }

  private:
    LatticeSpec spec_;
    int dim_ = 1, ex_ = 1, ey_ = 1, n_ = 1;
};

inline Lattice build_lattice(const LatticeSpec& spec) { return Lattice(spec); }

// Canonically ordered, duplicate-free set of site indices.
using SiteSet = std::vector<int>;

inline SiteSet canonical(SiteSet s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

// RG block spacing b, L-block side L, bar-lattice connectivity distance a.
struct BlockScheme {
    int b = 2;
    int L = 2;
    int a = 3;

    void validate(const Lattice& lat) const {
        if (b < 1 || L < 1 || a < 1) throw config_error("block scheme parameters must be >= 1");
        if (L % b != 0) throw config_error("RG block spacing b must divide L-block side L");
        for (int k = 0; k < lat.dim(); ++k)
            if (lat.extent(k) % L != 0) throw config_error("L must divide each lattice extent");
    }

    int p(int dim) const { return dim == 1 ? 3 : 9; }  // 3^d
};

// The lattice of L-blocks.
class BarLattice {
  public:
    BarLattice() = default;
    BarLattice(const Lattice& lat, const BlockScheme& scheme)
        : L_(scheme.L), periodic_(lat.periodic()) {
        scheme.validate(lat);
        ex_ = lat.extent(0) / L_;
        ey_ = lat.dim() == 2 ? lat.extent(1) / L_ : 1;
        dim_ = lat.dim();
    }

    int size() const { return ex_ * ey_; }
    int extent(int k) const { return k == 0 ? ex_ : ey_; }
    int dim() const { return dim_; }
    int block_side() const { return L_; }

    Coord coord(int blk) const { return {blk % ex_, blk / ex_}; }
    int index(Coord c) const {
        if (periodic_) {
            c[0] = Lattice::mod(c[0], ex_);
            c[1] = Lattice::mod(c[1], ey_);
        }
        return c[0] + ex_ * c[1];
    }

    int block_of_site(Coord site_coord) const {
        return index({site_coord[0] / L_, site_coord[1] / L_});
    }

    double dist(int b1, int b2) const {
        Coord a = coord(b1), b = coord(b2);
        int dx = a[0] - b[0], dy = a[1] - b[1];
        if (periodic_) {
            dx = Lattice::min_image(dx, ex_);
            dy = Lattice::min_image(dy, ey_);
        }
        return std::sqrt(double(dx) * dx + double(dy) * dy);
    }

    double set_dist(const SiteSet& A, const SiteSet& B) const {
        double best = std::numeric_limits<double>::infinity();
        for (int x : A)
            for (int y : B) best = std::min(best, dist(x, y));
        return best;
    }

  private:
    int L_ = 1, ex_ = 1, ey_ = 1, dim_ = 1;
    bool periodic_ = true;
};

using BlockSet = SiteSet;  // canonically ordered block indices in the bar lattice

// L-blocks meeting X.
inline BlockSet bar_map(const SiteSet& X, const Lattice& lat, const BarLattice& bar) {
    BlockSet out;
    out.reserve(X.size());
    for (int s : X) out.push_back(bar.block_of_site(lat.coord(s)));
    return canonical(std::move(out));
}

// Checkerboard type in 1..2^d from the parity of block coordinates.
inline int block_type(Coord block_coord, int dim) {
    int t = 1 + Lattice::mod(block_coord[0], 2);
    if (dim == 2) t += 2 * Lattice::mod(block_coord[1], 2);
    return t;
}

// inf{dist(w, z) : w in W-bar, z in Z-bar}, both sets of original-lattice sites.
inline double l_distance(const SiteSet& W, const SiteSet& Z, const Lattice& lat,
                         const BarLattice& bar) {
    if (W.empty() || Z.empty()) throw config_error("l_distance: empty site set");
    return bar.set_dist(bar_map(W, lat, bar), bar_map(Z, lat, bar));
}

// Two links are L-connected iff their bar sets are within a-distance.
inline bool l_connected_pair(const BlockSet& A, const BlockSet& B, const BarLattice& bar,
                             int a) {
    return bar.set_dist(A, B) <= double(a) + 1e-12;
}

// Partition a list of links into L-connected components (transitive closure).
// Components are returned in canonical order: sorted by least member index.
inline std::vector<std::vector<int>> l_connected_components(
    const std::vector<SiteSet>& links, const Lattice& lat, const BarLattice& bar, int a) {
    int n = static_cast<int>(links.size());
    std::vector<BlockSet> bars(n);
    for (int i = 0; i < n; ++i) bars[i] = bar_map(links[i], lat, bar);
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (l_connected_pair(bars[i], bars[j], bar, a)) {
                int a_ = find(i), b_ = find(j);
                if (a_ != b_) parent[std::max(a_, b_)] = std::min(a_, b_);
            }
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
    std::vector<std::vector<int>> out;
    out.reserve(groups.size());
    for (auto& [root, members] : groups) out.push_back(members);
    return out;
}

}  // namespace blockrg
