#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <thread>
#include <vector>

#include "blockrg/constrained.hpp"
#include "blockrg/kernel.hpp"
#include "blockrg/lattice.hpp"
#include "blockrg/rg_map.hpp"
#include "blockrg/transfer.hpp"

namespace blockrg {

// Lift an image-lattice site set to the original lattice (decimation kept
// sites): image coordinate y maps to b*y.
inline SiteSet lift_image_set(const SiteSet& Z, const Lattice& image, const Lattice& lat,
                              int b) {
    SiteSet out;
    for (int s : Z) {
        Coord c = image.coord(s);
        out.push_back(lat.index({b * c[0], b * c[1]}));
    }
    return canonical(std::move(out));
}

// dJ'(Z)/dJ(W) = 2^{-|image|} sum_{sigma'} sigma'_Z mu_{sigma'}(sigma_W).
// The normalization matches extract_couplings, so this is the exact
// derivative of the implemented RG map.
inline double partial_derivative(const Interaction& J, const Kernel& T,
                                 const Blocking& blocking, const Lattice& lat,
                                 const SiteSet& Z, const SiteSet& W, const Caps& caps = {}) {
    int nb = T.kind == KernelKind::trivial ? 0 : blocking.n_blocks();
    if (nb > caps.max_image_spins) throw cap_exceeded("partial_derivative: image above cap");
    std::uint32_t zmask = mask_of(Z);
    double acc = 0.0;
    std::size_t n_image = std::size_t(1) << nb;
    for (std::size_t sp = 0; sp < n_image; ++sp) {
        ConstrainedMeasure mu{&J, &T, &blocking, &lat, static_cast<Config>(sp), caps};
        acc += character(static_cast<Config>(sp), zmask) * mu.spin_expectation(W);
    }
    return acc / double(n_image);
}

// Central-difference oracle through the full RG map: perturb J by +-h on W,
// renormalize, and difference the extracted coupling at Z.
inline double finite_difference_oracle(const Interaction& J, const Kernel& T,
                                       const Blocking& blocking, const Lattice& lat,
                                       const SiteSet& Z, const SiteSet& W, double h,
                                       const Caps& caps = {}) {
    if (!(h > 0.0)) throw config_error("finite_difference_oracle: h must be positive");
    auto value = [&](double eps) {
        Interaction Jp = J;
        Jp.add(W, eps);
        RenormalizedResult r = renormalize(Jp, T, blocking, lat, caps);
        auto it = r.j_prime.couplings.find(canonical(Z));
        return it == r.j_prime.couplings.end() ? 0.0 : it->second;
    };
    return (value(+h) - value(-h)) / (2.0 * h);
}

struct JacobianEntry {
    SiteSet Z;  // image lattice
    SiteSet W;  // original lattice
    double l_dist = 0.0;
    double value = 0.0;
};

struct JacobianMatrix {
    std::vector<JacobianEntry> entries;
};

inline JacobianMatrix jacobian_matrix(const Interaction& J, const Kernel& T,
                                      const Blocking& blocking, const Lattice& lat,
                                      const std::vector<SiteSet>& z_family,
                                      const std::vector<SiteSet>& w_family,
                                      const BlockScheme& scheme, int b,
                                      const Caps& caps = {}) {
    BarLattice bar(lat, scheme);
    JacobianMatrix out;
    for (const auto& Z : z_family)
        for (const auto& W : w_family) {
            JacobianEntry e;
            e.Z = canonical(Z);
            e.W = canonical(W);
            e.value = partial_derivative(J, T, blocking, lat, e.Z, e.W, caps);
            e.l_dist = l_distance(e.W, lift_image_set(e.Z, blocking.image, lat, b), lat, bar);
            out.entries.push_back(std::move(e));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Transfer-matrix band scan: decimation b=2 on a periodic square lattice with
// uniform NN coupling, W family = all NN bonds, fixed Z. Exact in sigma'
// (full enumeration) with translation/spin-flip orbit caching: mu_{t.sigma'}
// (sigma_{W+bt}) = mu_{sigma'}(sigma_W) on a periodic volume, so one solve
// per orbit representative serves the whole orbit.
// ---------------------------------------------------------------------------
struct BandScanConfig {
    int width = 8, height = 8;
    double beta = 0.35;
    int b = 2;
    BlockScheme scheme{2, 2, 3};
    SiteSet z_bond;  // image-lattice set; default: horizontal image NN bond at origin
    int threads = 1;
};

inline JacobianMatrix band_scan_decimation_2d(const BandScanConfig& cfg) {
    const int W = cfg.width, H = cfg.height, b = cfg.b;
    if (b != 2) throw config_error("band scan supports decimation spacing b = 2");
    LatticeSpec spec{Geometry::square_2d, {W, H}, Boundary::periodic, {}};
    Lattice lat(spec);
    Blocking blocking = make_block_geometry(lat, b);
    const Lattice& image = blocking.image;
    const int iw = image.extent(0), ih = image.extent(1);
    const int n_image = iw * ih;
    if (n_image > 20) throw cap_exceeded("band scan: image volume above cap");

    SiteSet zb = cfg.z_bond.empty() ? SiteSet{0, 1} : cfg.z_bond;
    std::uint32_t zmask = mask_of(zb);

    // W family: horizontal bonds (idx = r*W + c), then vertical bonds; this
    // matches TransferEngine2D::all_bond_expectations ordering.
    const int n_bonds = 2 * W * H;
    auto bond_sites = [&](int k) -> std::pair<int, int> {
        if (k < W * H) {
            int r = k / W, c = k % W;
            return {r * W + c, r * W + (c + 1) % W};
        }
        int k2 = k - W * H;
        int r = k2 / W, c = k2 % W;
        return {r * W + c, ((r + 1) % H) * W + c};
    };
    auto bond_translate = [&](int k, int dx, int dy) {
        if (k < W * H) {
            int r = k / W, c = k % W;
            return (Lattice::mod(r + dy, H)) * W + Lattice::mod(c + dx, W);
        }
        int k2 = k - W * H;
        int r = k2 / W, c = k2 % W;
        return W * H + (Lattice::mod(r + dy, H)) * W + Lattice::mod(c + dx, W);
    };

    // Orbit representatives under image translations and global flip (valid
    // for even interactions and even W sets, which NN bonds are).
    const std::uint32_t image_full = (n_image == 32) ? 0xFFFFFFFFu
                                                     : ((std::uint32_t(1) << n_image) - 1u);
    auto translate_sp = [&](std::uint32_t sp, int tx, int ty) {
        std::uint32_t out = 0;
        for (int s = 0; s < n_image; ++s)
            if ((sp >> s) & 1u) {
                int x = s % iw, y = s / iw;
                out |= 1u << (Lattice::mod(x + tx, iw) + iw * Lattice::mod(y + ty, ih));
            }
        return out;
    };
    std::size_t n_sp = std::size_t(1) << n_image;
    std::vector<std::uint32_t> rep(n_sp);
    std::vector<std::pair<int, int>> rep_shift(n_sp);  // image translation mapping rep -> sp
    for (std::size_t sp = 0; sp < n_sp; ++sp) {
        std::uint32_t best = image_full;
        int bx = 0, by = 0;
        for (int ty = 0; ty < ih; ++ty)
            for (int tx = 0; tx < iw; ++tx) {
                std::uint32_t t = translate_sp(std::uint32_t(sp), -tx, -ty);
                if (t < best) { best = t; bx = tx; by = ty; }
                std::uint32_t tf = t ^ image_full;  // global spin flip
                if (tf < best) { best = tf; bx = tx; by = ty; }
            }
        rep[sp] = best;
        rep_shift[sp] = {bx, by};
    }

    // Solve each distinct representative once.
    std::vector<std::uint32_t> reps;
    {
        std::vector<bool> seen(n_sp, false);
        for (std::size_t sp = 0; sp < n_sp; ++sp)
            if (!seen[rep[sp]]) { seen[rep[sp]] = true; reps.push_back(rep[sp]); }
    }
    std::map<std::uint32_t, std::vector<double>> solved;
    for (auto r : reps) solved[r] = {};
    auto solve_one = [&](std::uint32_t sp) {
        std::vector<std::int8_t> clamp(lat.size(), 0);
        for (int j = 0; j < n_image; ++j)
            clamp[blocking.kept[j]] = ((sp >> j) & 1u) ? -1 : +1;
        TransferEngine2D eng(W, H, cfg.beta, clamp);
        return eng.all_bond_expectations();
    };
    int nthreads = std::max(1, cfg.threads);
    if (nthreads == 1) {
        for (auto r : reps) solved[r] = solve_one(r);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&]() {
                for (;;) {
                    std::size_t k = next.fetch_add(1);
                    if (k >= reps.size()) return;
                    solved[reps[k]] = solve_one(reps[k]);  // distinct keys: no data race
                }
            });
        for (auto& th : pool) th.join();
    }

    // Accumulate entry(Z, W_k) = 2^{-n} sum_sp sigma'_Z mu_sp(sigma_{W_k}).
    // Deterministic: sigma' in canonical order regardless of thread count.
    std::vector<double> acc(n_bonds, 0.0);
    for (std::size_t sp = 0; sp < n_sp; ++sp) {
        const auto& ex = solved[rep[sp]];
        auto [tx, ty] = rep_shift[sp];
        int sgn = character(static_cast<Config>(sp), zmask);
        // mu_sp(sigma_{W_k}) = mu_rep(sigma_{W_k - b t}); flips leave even
        // bond expectations unchanged.
        for (int k = 0; k < n_bonds; ++k)
            acc[k] += sgn * ex[bond_translate(k, -b * tx, -b * ty)];
    }

    BarLattice bar(lat, cfg.scheme);
    JacobianMatrix out;
    for (int k = 0; k < n_bonds; ++k) {
        auto [s1, s2] = bond_sites(k);
        JacobianEntry e;
        e.Z = canonical(zb);
        e.W = canonical({s1, s2});
        e.value = acc[k] / double(n_sp);
        e.l_dist = l_distance(e.W, lift_image_set(e.Z, image, lat, b), lat, bar);
        out.entries.push_back(std::move(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Band profile: max |entry| per unit-width bin of l-distance, and a
// least-squares fit log(max_n) ~ c - lambda * n^alpha over nonzero bins.
// Max (not mean) per bin: the band theorem bounds the supremum.
// ---------------------------------------------------------------------------
struct BandProfile {
    std::map<int, double> bins;  // n -> max{|entry| : n <= l < n+1}
    double alpha = 0.0;
    double lambda = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    bool reliable = false;  // needs >= 3 nonzero bins
};

inline BandProfile band_profile(const JacobianMatrix& m) {
    BandProfile out;
    for (const auto& e : m.entries) {
        int bin = static_cast<int>(std::floor(e.l_dist));
        auto [it, fresh] = out.bins.try_emplace(bin, std::abs(e.value));
        if (!fresh) it->second = std::max(it->second, std::abs(e.value));
    }
    std::vector<std::pair<double, double>> pts;  // (n, log max)
    for (auto& [n, v] : out.bins)
        if (v > 1e-300) pts.push_back({double(n), std::log(v)});
    out.reliable = pts.size() >= 3;
    if (pts.size() < 2) return out;
    // 1-D search over alpha; linear least squares in (c, lambda) at each alpha.
    double best_alpha = 0.0, best_res = std::numeric_limits<double>::infinity();
    double best_c = 0.0, best_l = 0.0;
    for (double alpha = 0.05; alpha <= 3.0 + 1e-9; alpha += 0.005) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [n, y] : pts) {
            double x = std::pow(n, alpha);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double nn = double(pts.size());
        double denom = nn * sxx - sx * sx;
        if (std::abs(denom) < 1e-30) continue;
        double slope = (nn * sxy - sx * sy) / denom;
        double c = (sy - slope * sx) / nn;
        if (slope > 0.0) continue;  // demand decay
        double res = 0.0;
        for (auto [n, y] : pts) {
            double d = y - (c + slope * std::pow(n, alpha));
            res += d * d;
        }
        if (res < best_res) {
            best_res = res;
            best_alpha = alpha;
            best_c = c;
            best_l = -slope;
        }
    }
    out.alpha = best_alpha;
    out.lambda = best_l;
    out.intercept = best_c;
    out.residual = best_res;
    return out;
}

// n(E) = #{W in the translation family : l(W, Z) <= E}.
inline int neighborhood_count(const SiteSet& Z_lifted, double E,
                              const std::vector<std::vector<Coord>>& w_shapes,
                              const Lattice& lat, const BarLattice& bar) {
    int count = 0;
    for (const auto& shape : w_shapes)
        for (int t = 0; t < lat.size(); ++t) {
            Coord base = lat.coord(t);
            SiteSet w;
            bool ok = true;
            for (const auto& o : shape) {
                Coord c{base[0] + o[0], base[1] + o[1]};
                if (!lat.periodic() && !lat.inside(c)) { ok = false; break; }
                w.push_back(lat.index(c));
            }
            if (!ok) continue;
            w = canonical(std::move(w));
            if (l_distance(w, Z_lifted, lat, bar) <= E + 1e-12) ++count;
        }
    return count;
}

// sum_W entry(Z, W) K(W) restricted to l(W, Z) <= cutoff.
inline double linearize_apply(const JacobianMatrix& m, const Interaction& K,
                              const SiteSet& Z, double cutoff) {
    double acc = 0.0;
    for (const auto& e : m.entries) {
        if (e.Z != Z || e.l_dist > cutoff) continue;
        auto it = K.couplings.find(e.W);
        if (it != K.couplings.end()) acc += e.value * it->second;
    }
    return acc;
}

struct LinearizationBound {
    double value = 0.0;
    double series = 0.0;   // sum_n exp(-lambda n^alpha) (n+1)^d, with tail majorant
    double tail = 0.0;
    bool defined = false;
};

// ||K||_inf * C * sum_{n>=0} exp(-lambda n^alpha)(n+1)^d. Truncated when the
// term drops below 1e-16 of the partial sum; the geometric-majorant remainder
// is added.
inline LinearizationBound linearization_bound(const BandProfile& profile, double k_inf,
                                              int d) {
    LinearizationBound out;
    if (!(profile.alpha > 0.0) || !(profile.lambda > 0.0)) return out;
    double c = std::exp(profile.intercept);
    auto term = [&](double n) {
        return std::exp(-profile.lambda * std::pow(n, profile.alpha)) * std::pow(n + 1.0, d);
    };
    double sum = term(0);
    double n = 1;
    for (; n < 1e7; ++n) {
        double t = term(n);
        sum += t;
        if (t < 1e-16 * sum) break;
    }
    double q = term(n + 1) / term(n);
    out.tail = q < 1.0 ? term(n) * q / (1.0 - q) : std::numeric_limits<double>::infinity();
    out.series = sum + out.tail;
    out.value = k_inf * c * out.series;
    out.defined = std::isfinite(out.series);
    return out;
}

// ---------------------------------------------------------------------------
// Band-theorem right-hand side:
//   M^p (1+log M)^p (delta(S)/log M + (delta(Q)+delta(K_cut)) p(1+S) M^{p(1+S)})
// with delta supplied by the counting module.
// ---------------------------------------------------------------------------
struct BandBoundParams {
    double S = 4, Q = 4, K_cut = 4;
    double M = 2.0;
    int p = 2;
    std::function<double(double)> delta;  // P -> delta(P)
};

inline double band_bound_rhs(const BandBoundParams& prm) {
    if (!(prm.M > 1.0)) throw config_error("band_bound_rhs: M must exceed 1");
    double lm = std::log(prm.M);
    double lead = std::pow(prm.M, prm.p) * std::pow(1.0 + lm, prm.p);
    double case1 = prm.delta(prm.S) / lm;
    double case2 = (prm.delta(prm.Q) + prm.delta(prm.K_cut)) * prm.p * (1.0 + prm.S) *
                   std::pow(prm.M, prm.p * (1.0 + prm.S));
    return lead * (case1 + case2);
}

}  // namespace blockrg
