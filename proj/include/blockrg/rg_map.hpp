#pragma once

#include <cmath>
#include <vector>

#include "blockrg/kernel.hpp"
#include "blockrg/lattice.hpp"
#include "blockrg/spin.hpp"

namespace blockrg {

struct Caps {
    int max_spins = 24;        // enumeration cap on the original volume
    int max_image_spins = 16;  // cap on the image volume
};

namespace detail {

// Enumerate configurations of the free sites around fixed clamped bits.
// free_sites lists global site indices; local bit k of the counter maps to
// free_sites[k].
struct FreeEnumerator {
    std::vector<int> free_sites;
    Config clamped = 0;

    std::size_t count() const { return std::size_t(1) << free_sites.size(); }

    Config assemble(std::size_t local) const {
        Config c = clamped;
        for (std::size_t k = 0; k < free_sites.size(); ++k)
            if ((local >> k) & 1u) c |= (Config(1) << free_sites[k]);
        return c;
    }
};

}  // namespace detail

// log sum_sigma T(sigma, sigma') e^{-H(sigma)} for every image configuration,
// max-shifted for stability. Indexed by the image configuration mask.
inline std::vector<double> renormalized_logz(const Interaction& J, const Kernel& T,
                                             const Blocking& blocking, const Lattice& lat,
                                             const Caps& caps = {}) {
    if (lat.size() > caps.max_spins) throw cap_exceeded("renormalized_logz: volume above cap");
    int nb = T.kind == KernelKind::trivial ? 0 : blocking.n_blocks();
    if (nb > caps.max_image_spins) throw cap_exceeded("renormalized_logz: image above cap");
    CompiledInteraction H(J);
    std::size_t n_image = std::size_t(1) << nb;

    // Stability shift: ground the exponent at the maximum of -H.
    double shift = -std::numeric_limits<double>::infinity();
    std::size_t n_total = std::size_t(1) << lat.size();
    for (std::size_t c = 0; c < n_total; ++c) shift = std::max(shift, -H.energy(Config(c)));

    std::vector<double> acc(n_image, 0.0);
    if (T.kind == KernelKind::decimation) {
        // Sum restricted to configurations consistent with sigma'.
        detail::FreeEnumerator en;
        std::vector<bool> is_kept(lat.size(), false);
        for (int k : blocking.kept) is_kept[k] = true;
        for (int s = 0; s < lat.size(); ++s)
            if (!is_kept[s]) en.free_sites.push_back(s);
        for (std::size_t sp = 0; sp < n_image; ++sp) {
            en.clamped = 0;
            for (int j = 0; j < nb; ++j)
                if ((sp >> j) & 1u) en.clamped |= (Config(1) << blocking.kept[j]);
            double sum = 0.0;
            for (std::size_t m = 0; m < en.count(); ++m)
                sum += std::exp(-H.energy(en.assemble(m)) - shift);
            acc[sp] = sum;
        }
    } else {
        for (std::size_t c = 0; c < n_total; ++c) {
            double w = std::exp(-H.energy(Config(c)) - shift);
            if (T.kind == KernelKind::trivial) {
                acc[0] += w;
                continue;
            }
            // Per-block factors for sigma'_j = +1 / -1.
            for (std::size_t sp = 0; sp < n_image; ++sp) {
                double t = kernel_eval(T, blocking, Config(c), Config(sp));
                if (t != 0.0) acc[sp] += w * t;
            }
        }
    }
    std::vector<double> out(n_image);
    for (std::size_t sp = 0; sp < n_image; ++sp) {
        if (!(acc[sp] > 0.0)) throw std::runtime_error("renormalized_logz: zero total weight");
        out[sp] = std::log(acc[sp]) + shift;
    }
    return out;
}

// Character inversion of -H' = logZ: J'(Z) = 2^{-|image|} sum_{sigma'}
// sigma'_Z logZ(sigma'). The 2^{-|image|} orthogonality normalization makes
// the extraction the exact inverse of the Hamiltonian rebuild.
inline Interaction extract_couplings(std::vector<double> logz, const Lattice& image,
                                     double drop_tol = 0.0) {
    std::size_t n = logz.size();
    int nbits = std::countr_zero(n);
    walsh_hadamard(logz);
    Interaction out;
    for (std::size_t A = 0; A < n; ++A) {
        double v = logz[A] / double(n);
        if (A != 0 && std::abs(v) <= drop_tol) continue;
        SiteSet Z;
        for (int k = 0; k < nbits; ++k)
            if ((A >> k) & 1u) Z.push_back(k);
        if (v != 0.0 || A == 0) out.couplings[Z] = v;
    }
    (void)image;
    return out;
}

struct RenormalizedResult {
    Interaction j_prime;
    Lattice image;
    std::vector<double> logz;
};

inline RenormalizedResult renormalize(const Interaction& J, const Kernel& T,
                                      const Blocking& blocking, const Lattice& lat,
                                      const Caps& caps = {}) {
    RenormalizedResult r;
    r.logz = renormalized_logz(J, T, blocking, lat, caps);
    r.image = blocking.image;
    r.j_prime = extract_couplings(r.logz, r.image);
    return r;
}

// Coupling per translation class: on tiny periodic volumes distinct
// translates of a shape can wrap onto the same site set, so the set coupling
// is the class coupling times that multiplicity.
inline double translation_class_coupling(const Interaction& J, const Lattice& lat,
                                         const std::vector<Coord>& offsets) {
    SiteSet set;
    for (const auto& o : offsets) set.push_back(lat.index(o));
    set = canonical(std::move(set));
    int multiplicity = 0;
    for (int t = 0; t < lat.size(); ++t) {
        Coord base = lat.coord(t);
        SiteSet trans;
        for (const auto& o : offsets) trans.push_back(lat.index({base[0] + o[0], base[1] + o[1]}));
        if (canonical(std::move(trans)) == set) ++multiplicity;
    }
    auto it = J.couplings.find(set);
    double v = it == J.couplings.end() ? 0.0 : it->second;
    return v / double(multiplicity);
}

struct FlowStep {
    Interaction j;
    Lattice lattice;
    double norm_proxy = 0.0;       // sum_{X ni site0} |J(X)| on the periodic volume
    double truncation_residual = 0.0;  // largest coupling dropped before this step
};

// Iterated RG flow. Each step's image lattice becomes the next original
// lattice; couplings below drop_tol are removed (their maximum is reported).
inline std::vector<FlowStep> rg_flow(const Interaction& J0, const Kernel& T, int b, int steps,
                                     const Lattice& lat0, const Caps& caps = {},
                                     double drop_tol = 0.0) {
    std::vector<FlowStep> out;
    Interaction J = J0;
    Lattice lat = lat0;
    auto norm_proxy = [](const Interaction& j) {
        double n = 0.0;
        for (const auto& [X, v] : j.couplings)
            if (!X.empty() && std::find(X.begin(), X.end(), 0) != X.end()) n += std::abs(v);
        return n;
    };
    out.push_back({J, lat, norm_proxy(J), 0.0});
    for (int s = 0; s < steps; ++s) {
        Blocking blocking = make_block_geometry(lat, b);
        RenormalizedResult r = renormalize(J, T, blocking, lat, caps);
        double dropped = 0.0;
        if (drop_tol > 0.0)
            for (auto it = r.j_prime.couplings.begin(); it != r.j_prime.couplings.end();)
                if (!it->first.empty() && std::abs(it->second) < drop_tol) {
                    dropped = std::max(dropped, std::abs(it->second));
                    it = r.j_prime.couplings.erase(it);
                } else {
                    ++it;
                }
        J = r.j_prime;
        lat = r.image;
        out.push_back({J, lat, norm_proxy(J), dropped});
    }
    return out;
}

}  // namespace blockrg
