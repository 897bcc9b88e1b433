#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "blockrg/lattice.hpp"

namespace blockrg {

// A spin configuration on up to 32 sites, packed. Bit k set means site k
// carries spin -1; cleared means +1. Site order is the lattice's canonical
// (row-major) order.
using Config = std::uint32_t;

inline int spin_at(Config c, int site) { return (c >> site) & 1u ? -1 : +1; }

inline std::uint32_t mask_of(const SiteSet& X) {
    std::uint32_t m = 0;
    for (int s : X) m |= (1u << s);
    return m;
}

// Character sigma_X = prod_{i in X} sigma_i. sigma_emptyset = +1.
inline int character(Config c, std::uint32_t xmask) {
    return (std::popcount(c & xmask) & 1) ? -1 : +1;
}

// Sparse map from finite site sets to real couplings; may include the empty
// set (constant term). Keys are canonical site sets on a concrete lattice.
struct Interaction {
    std::map<SiteSet, double> couplings;

    double constant() const {
        auto it = couplings.find(SiteSet{});
        return it == couplings.end() ? 0.0 : it->second;
    }

    Interaction& add(const SiteSet& X, double j) {
        couplings[canonical(X)] += j;
        return *this;
    }

    Interaction operator+(const Interaction& o) const {
        Interaction r = *this;
        for (auto& [X, j] : o.couplings) r.couplings[X] += j;
        return r;
    }
};

// Translation-invariant generator: shapes are coordinate offset sets
// containing the origin, one representative per translation class.
struct InteractionGenerator {
    struct Shape {
        std::vector<Coord> offsets;  // must contain {0,0}
        double coupling = 0.0;
    };
    std::vector<Shape> shapes;

    InteractionGenerator& add(std::vector<Coord> offsets, double j) {
        shapes.push_back({std::move(offsets), j});
        return *this;
    }

    int range() const {
        int r = 0;
        for (const auto& sh : shapes)
            for (const auto& o : sh.offsets)
                r = std::max({r, std::abs(o[0]), std::abs(o[1])});
        return r;
    }
};

inline InteractionGenerator nearest_neighbor(Geometry g, double beta, double field = 0.0) {
    InteractionGenerator gen;
    if (g == Geometry::square_1d) {
        gen.add({{0, 0}, {1, 0}}, beta);
    } else {
        gen.add({{0, 0}, {1, 0}}, beta);
        gen.add({{0, 0}, {0, 1}}, beta);
        if (g == Geometry::triangular_2d) gen.add({{0, 0}, {1, -1}}, beta);
    }
    if (field != 0.0) gen.add({{0, 0}}, field);
    return gen;
}

// Banach norm ||J|| = sum_{X ni 0} |J(X)|. Each translation class of size |X|
// contains the origin exactly |X| times, so the sum over generator shapes is
// weighted by the shape cardinality.
inline double interaction_norm(const InteractionGenerator& gen) {
    double n = 0.0;
    for (const auto& sh : gen.shapes) n += std::abs(sh.coupling) * double(sh.offsets.size());
    return n;
}

// Instantiate a translation-invariant generator on a finite volume.
// periodic: all translates (range must stay below extent/2 so a wrapped set
// is unambiguous); free: translates fully inside; fixed: boundary spins
// substituted, producing lower-order interior terms.
inline Interaction instantiate(const InteractionGenerator& gen, const Lattice& lat) {
    Interaction out;
    const auto& spec = lat.spec();
    if (spec.boundary == Boundary::periodic) {
        for (int k = 0; k < lat.dim(); ++k)
            if (2 * gen.range() > lat.extent(k))
                throw config_error("interaction range too large for periodic wraparound");
    }
    // Fixed boundaries: translates based outside the volume still contribute
    // when part of the set lands inside (boundary bonds), so the base ranges
    // over a box enlarged by the interaction range.
    std::vector<Coord> bases;
    if (spec.boundary == Boundary::fixed) {
        int R = gen.range();
        int ylo = lat.dim() == 2 ? -R : 0, yhi = lat.dim() == 2 ? lat.extent(1) + R : 1;
        for (int x = -R; x < lat.extent(0) + R; ++x)
            for (int y = ylo; y < yhi; ++y) bases.push_back({x, y});
    } else {
        for (int t = 0; t < lat.size(); ++t) bases.push_back(lat.coord(t));
    }
    for (const auto& sh : gen.shapes) {
        for (const Coord& base : bases) {
            bool any_inside = false;
            for (const auto& o : sh.offsets)
                if (spec.boundary == Boundary::periodic ||
                    lat.inside({base[0] + o[0], base[1] + o[1]}))
                    any_inside = true;
            if (!any_inside) continue;
            SiteSet inside;
            double factor = sh.coupling;
            bool ok = true;
            for (const auto& o : sh.offsets) {
                Coord c{base[0] + o[0], base[1] + o[1]};
                if (spec.boundary == Boundary::periodic || lat.inside(c)) {
                    inside.push_back(lat.index(c));
                } else if (spec.boundary == Boundary::fixed) {
                    auto it = spec.boundary_spins.find(c);
                    if (it == spec.boundary_spins.end())
                        throw config_error("fixed boundary is missing a spin");
                    factor *= it->second;
                } else {
                    ok = false;  // free boundary: translate must lie fully inside
                    break;
                }
            }
            if (!ok || inside.empty()) continue;
            out.add(inside, factor);
        }
    }
    // Duplicate translates (e.g. wrapped rings of extent 2) accumulate; drop
    // exact zeros produced by cancellation.
    for (auto it = out.couplings.begin(); it != out.couplings.end();)
        it = (it->second == 0.0) ? out.couplings.erase(it) : std::next(it);
    return out;
}

// Interaction compiled to bitmasks for fast energy evaluation.
struct CompiledInteraction {
    std::vector<std::uint32_t> masks;
    std::vector<double> j;
    double c0 = 0.0;  // empty-set coupling

    explicit CompiledInteraction(const Interaction& J) {
        for (const auto& [X, v] : J.couplings) {
            if (X.empty()) {
                c0 += v;
                continue;
            }
            masks.push_back(mask_of(X));
            j.push_back(v);
        }
    }

    // H(sigma) = -sum_X J(X) sigma_X
    double energy(Config c) const {
        double h = -c0;
        for (std::size_t k = 0; k < masks.size(); ++k)
            h -= j[k] * character(c, masks[k]);
        return h;
    }
};

inline double energy(const Interaction& J, Config c, const Lattice& lat) {
    for (const auto& [X, v] : J.couplings)
        for (int s : X)
            if (s < 0 || s >= lat.size()) throw config_error("interaction set outside volume");
    return CompiledInteraction(J).energy(c);
}

// In-place Walsh-Hadamard transform: a[A] <- sum_m a[m] * sigma_A(m).
inline void walsh_hadamard(std::vector<double>& a) {
    const std::size_t n = a.size();
    for (std::size_t h = 1; h < n; h <<= 1)
        for (std::size_t i = 0; i < n; i += h << 1)
            for (std::size_t k = i; k < i + h; ++k) {
                double x = a[k], y = a[k + h];
                a[k] = x + y;
                a[k + h] = x - y;
            }
}

// Function on spin configurations of a finite support set, stored in the
// character basis: f(sigma) = sum_{A subset S} coeff[A] sigma_A.
struct SpinFunction {
    SiteSet sites;               // global site indices, canonical order
    std::vector<double> coeff;   // indexed by subset mask over local positions

    double eval_local(Config local) const {
        double v = 0.0;
        for (std::uint32_t A = 0; A < coeff.size(); ++A)
            v += coeff[A] * character(local, A);
        return v;
    }

    // Evaluate at a global configuration by gathering the local bits.
    double eval_global(Config global) const {
        Config local = 0;
        for (std::size_t k = 0; k < sites.size(); ++k)
            if ((global >> sites[k]) & 1u) local |= (1u << k);
        return eval_local(local);
    }
};

// Exact character inversion f_hat(A) = 2^{-|S|} sum_sigma f(sigma) sigma_A.
inline SpinFunction character_expand(const SiteSet& S,
                                     const std::function<double(Config)>& f_local,
                                     int max_support = 20) {
    if (static_cast<int>(S.size()) > max_support)
        throw cap_exceeded("character_expand: support exceeds enumeration cap");
    SpinFunction out;
    out.sites = S;
    std::size_t n = std::size_t(1) << S.size();
    out.coeff.resize(n);
    for (std::size_t m = 0; m < n; ++m) out.coeff[m] = f_local(static_cast<Config>(m));
    walsh_hadamard(out.coeff);
    for (auto& c : out.coeff) c /= double(n);
    return out;
}

}  // namespace blockrg
