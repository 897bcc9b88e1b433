#pragma once

#include <bit>
#include <cmath>
#include <map>
#include <vector>

#include "blockrg/kernel.hpp"
#include "blockrg/lattice.hpp"
#include "blockrg/rg_map.hpp"
#include "blockrg/spin.hpp"

namespace blockrg {

// ---------------------------------------------------------------------------
// Iterated type-ordered block summation. Stage i sums the spins in type-i
// L-blocks of exp(-F^{i-1}_SR); long-range terms (character support of
// Chebyshev diameter > L) are split off before the next stage so the sums
// keep factorizing. The kernel is folded into the base weight; decimation
// clamps its kept sites, so every partial sum stays positive.
// ---------------------------------------------------------------------------

struct ExpansionConfig {
    int max_spins = 20;
    double coeff_tol = 1e-12;  // character coefficients below this are dropped
    int n_max_links = 12;      // hypergraph link budget (full enumeration below it)
};

struct StageTerm {
    SiteSet B;        // global site indices
    double coeff;     // character coefficient of sigma_B
    bool long_range;  // Chebyshev diameter > L
    int stage;        // 1-based
};

struct IteratedSumResult {
    Lattice lat;
    BlockScheme scheme;
    BarLattice bar;
    std::vector<StageTerm> terms;      // all stages, LR and SR
    double f_final = 0.0;              // F^{2^d}; e^{-F^{2^d}} = final scalar
    double final_scalar = 0.0;         // e^{-f_final}
    double direct_sum = 0.0;           // sum_sigma T e^{-H}
    std::vector<int> free_sites;       // enumeration order of free spins
    std::vector<double> rho;           // T e^{-H} exp(sum F^i_LR) over free configs
    double rho_sum = 0.0;              // = final_scalar when E(1) = 1 holds

    std::vector<const StageTerm*> long_range_terms() const {
        std::vector<const StageTerm*> out;
        for (const auto& t : terms)
            if (t.long_range) out.push_back(&t);
        return out;
    }
};

namespace detail {

// Sum an array indexed by configurations of `sites` over the positions in
// `summed` (a subset of sites); result indexed by configurations of the
// remaining sites in their original relative order.
inline std::vector<double> sum_out(const std::vector<double>& arr,
                                   const std::vector<int>& sites,
                                   const std::vector<bool>& summed_pos,
                                   std::vector<int>& remaining_sites) {
    int n = static_cast<int>(sites.size());
    remaining_sites.clear();
    std::vector<int> keep_pos;
    for (int k = 0; k < n; ++k)
        if (!summed_pos[k]) {
            keep_pos.push_back(k);
            remaining_sites.push_back(sites[k]);
        }
    std::vector<double> out(std::size_t(1) << keep_pos.size(), 0.0);
    for (std::size_t m = 0; m < arr.size(); ++m) {
        std::size_t r = 0;
        for (std::size_t k = 0; k < keep_pos.size(); ++k)
            if ((m >> keep_pos[k]) & 1u) r |= (std::size_t(1) << k);
        out[r] += arr[m];
    }
    return out;
}

inline int cheb_diameter(const SiteSet& B, const Lattice& lat) {
    int d = 0;
    for (std::size_t i = 0; i < B.size(); ++i)
        for (std::size_t j = i + 1; j < B.size(); ++j)
            d = std::max(d, lat.cheb_dist(B[i], B[j]));
    return d;
}

}  // namespace detail

// Run the full iterated block sum for one (J, T, sigma') instance.
inline IteratedSumResult iterated_block_sum(const Interaction& J, const Kernel& T,
                                            const Blocking& blocking, const Lattice& lat,
                                            const BlockScheme& scheme, Config sigma_prime,
                                            const ExpansionConfig& cfg = {}) {
    if (T.kind == KernelKind::majority)
        throw config_error("iterated_block_sum: majority kernel has zero-weight sectors");
    scheme.validate(lat);
    IteratedSumResult res;
    res.lat = lat;
    res.scheme = scheme;
    res.bar = BarLattice(lat, scheme);

    // Free sites and base weight T e^{-H} (decimation: kept sites clamped).
    Config clamped = 0;
    std::vector<bool> is_clamped(lat.size(), false);
    if (T.kind == KernelKind::decimation) {
        for (int j = 0; j < blocking.n_blocks(); ++j) {
            is_clamped[blocking.kept[j]] = true;
            if ((sigma_prime >> j) & 1u) clamped |= (Config(1) << blocking.kept[j]);
        }
    }
    for (int s = 0; s < lat.size(); ++s)
        if (!is_clamped[s]) res.free_sites.push_back(s);
    if (static_cast<int>(res.free_sites.size()) > cfg.max_spins)
        throw cap_exceeded("iterated_block_sum: free spin count above cap");

    CompiledInteraction H(J);
    std::size_t n_free = std::size_t(1) << res.free_sites.size();
    std::vector<double> base(n_free);
    for (std::size_t m = 0; m < n_free; ++m) {
        Config c = clamped;
        for (std::size_t k = 0; k < res.free_sites.size(); ++k)
            if ((m >> k) & 1u) c |= (Config(1) << res.free_sites[k]);
        double w = std::exp(-H.energy(c));
        if (T.kind == KernelKind::kadanoff) w *= kernel_eval(T, blocking, c, sigma_prime);
        base[m] = w;
        res.direct_sum += w;
    }

    // Stage sums in type order 1..2^d.
    int n_types = 1 << lat.dim();
    std::vector<double> cur = base;
    std::vector<int> cur_sites = res.free_sites;
    for (int type = 1; type <= n_types; ++type) {
        std::vector<bool> summed(cur_sites.size(), false);
        for (std::size_t k = 0; k < cur_sites.size(); ++k) {
            Coord c = lat.coord(cur_sites[k]);
            Coord blk{c[0] / scheme.L, c[1] / scheme.L};
            if (block_type(blk, lat.dim()) == type) summed[k] = true;
        }
        std::vector<int> rest;
        std::vector<double> summed_arr = detail::sum_out(cur, cur_sites, summed, rest);
        if (type == n_types) {
            // All spins are gone; F^{2^d} is the remaining constant.
            res.final_scalar = summed_arr[0];
            res.f_final = -std::log(summed_arr[0]);
            cur = std::move(summed_arr);
            cur_sites = rest;
            break;
        }
        // F^type in the character basis over the remaining sites.
        std::vector<double> f(summed_arr.size());
        for (std::size_t m = 0; m < f.size(); ++m) {
            if (!(summed_arr[m] > 0.0))
                throw std::runtime_error("iterated_block_sum: non-positive stage sum");
            f[m] = -std::log(summed_arr[m]);
        }
        std::vector<double> coeffs = f;
        walsh_hadamard(coeffs);
        for (auto& c : coeffs) c /= double(coeffs.size());
        // Record terms; subtract long-range ones pointwise before exponentiating.
        std::vector<double> f_sr = f;
        for (std::size_t A = 0; A < coeffs.size(); ++A) {
            if (std::abs(coeffs[A]) <= cfg.coeff_tol) continue;
            SiteSet B;
            for (std::size_t k = 0; k < rest.size(); ++k)
                if ((A >> k) & 1u) B.push_back(rest[k]);
            bool lr = !B.empty() && detail::cheb_diameter(B, lat) > scheme.L;
            res.terms.push_back({B, coeffs[A], lr, type});
            if (lr)
                for (std::size_t m = 0; m < f_sr.size(); ++m)
                    f_sr[m] -= coeffs[A] * character(Config(m), std::uint32_t(A));
        }
        cur.assign(f_sr.size(), 0.0);
        for (std::size_t m = 0; m < f_sr.size(); ++m) cur[m] = std::exp(-f_sr[m]);
        cur_sites = rest;
    }

    // rho = T e^{-H} exp(F^1_LR + ... + F^{2^d-1}_LR) over free configs.
    std::vector<std::pair<std::uint32_t, double>> lr_local;  // masks over free positions
    std::map<int, int> free_pos;
    for (std::size_t k = 0; k < res.free_sites.size(); ++k) free_pos[res.free_sites[k]] = int(k);
    for (const auto& t : res.terms) {
        if (!t.long_range) continue;
        std::uint32_t m = 0;
        for (int s : t.B) m |= (1u << free_pos.at(s));
        lr_local.push_back({m, t.coeff});
    }
    res.rho.resize(n_free);
    for (std::size_t m = 0; m < n_free; ++m) {
        double flr = 0.0;
        for (auto [mask, c] : lr_local) flr += c * character(Config(m), mask);
        res.rho[m] = base[m] * std::exp(flr);
        res.rho_sum += res.rho[m];
    }
    return res;
}

// Modified expectation E f = exp(F^{2^d}) sum_sigma rho f. E(1) = 1 by the
// telescoping of the stage sums; verified in tests.
inline double modified_expectation(const IteratedSumResult& res,
                                   const std::function<double(Config)>& f) {
    double acc = 0.0;
    for (std::size_t m = 0; m < res.rho.size(); ++m) {
        Config c = 0;
        for (std::size_t k = 0; k < res.free_sites.size(); ++k)
            if ((m >> k) & 1u) c |= (Config(1) << res.free_sites[k]);
        acc += res.rho[m] * f(c);
    }
    return acc / res.final_scalar;
}

// ---------------------------------------------------------------------------
// Polymer activities K(B) = exp(-F^1_B - F^2_B - F^3_B) - 1 and weights.
// In the character basis F^i_B is the single term c^i_B sigma_B, so K(B) is
// two-valued with sup norm e^{|c_B|} - 1.
// ---------------------------------------------------------------------------

struct PolymerActivity {
    SiteSet B;
    BlockSet bbar;
    double coeff = 0.0;  // summed over stages
    double sup_norm = 0.0;
    bool allowable = true;

    double eval(Config global) const {
        return std::exp(-coeff * character(global, mask_of(B))) - 1.0;
    }
};

// B-bar must fit in an axis-aligned box of 3x3 L-blocks (|B-bar| <= p = 3^d).
inline bool allowable_support(const BlockSet& bbar, const BarLattice& bar) {
    if (bbar.empty()) return false;
    int p = bar.dim() == 1 ? 3 : 9;
    if (static_cast<int>(bbar.size()) > p) return false;
    for (int k = 0; k < bar.dim(); ++k) {
        // Smallest periodic interval covering the k-coordinates.
        std::vector<int> xs;
        for (int b : bbar) xs.push_back(bar.coord(b)[k]);
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        int ext = bar.extent(k);
        int best = ext;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            int span = xs[(i + xs.size() - 1) % xs.size()] - xs[i];
            span = i == 0 ? xs.back() - xs.front() : Lattice::mod(span, ext);
            best = std::min(best, span);
        }
        if (best > 2) return false;  // more than 3 blocks across
    }
    return true;
}

inline std::vector<PolymerActivity> polymer_activities(const IteratedSumResult& res) {
    std::map<SiteSet, double> merged;
    for (const auto& t : res.terms)
        if (t.long_range) merged[t.B] += t.coeff;
    std::vector<PolymerActivity> out;
    for (auto& [B, c] : merged) {
        PolymerActivity a;
        a.B = B;
        a.bbar = bar_map(B, res.lat, res.bar);
        a.coeff = c;
        a.sup_norm = std::exp(std::abs(c)) - 1.0;
        a.allowable = allowable_support(a.bbar, res.bar);
        out.push_back(std::move(a));
    }
    return out;
}

inline double epsilon_L(const std::vector<PolymerActivity>& activities) {
    double e = 0.0;
    for (const auto& a : activities) e = std::max(e, a.sup_norm);
    return e;
}

struct PolymerWeights {
    std::vector<BlockSet> supports;           // distinct N, canonical order
    std::map<BlockSet, double> w;             // w_N
    std::map<BlockSet, double> v;             // v_N >= |w_N|
    double truncation_tail = 0.0;             // sup-norm bound on dropped hypergraphs
};

// w_N = sum_{Gamma_C* = N} E(prod K(B)) over L-connected hypergraphs (sets of
// distinct links) with at most n_max links; v_N the same sum of sup norms.
inline PolymerWeights polymer_weights(const IteratedSumResult& res,
                                      const std::vector<PolymerActivity>& activities,
                                      int n_max) {
    if (activities.size() > 20)
        throw cap_exceeded("polymer_weights: link budget exceeded");
    for (const auto& a : activities)
        if (!a.allowable) throw config_error("polymer_weights: non-allowable long-range B");
    PolymerWeights out;
    int n_links = static_cast<int>(activities.size());
    std::vector<BlockSet> bars(n_links);
    std::vector<SiteSet> link_sets(n_links);
    for (int i = 0; i < n_links; ++i) {
        bars[i] = activities[i].bbar;
        link_sets[i] = activities[i].B;
    }
    for (std::uint32_t sub = 1; sub < (1u << n_links); ++sub) {
        std::vector<int> idx;
        for (int i = 0; i < n_links; ++i)
            if ((sub >> i) & 1u) idx.push_back(i);
        double vprod = 1.0;
        for (int i : idx) vprod *= activities[i].sup_norm;
        if (static_cast<int>(idx.size()) > n_max) {
            out.truncation_tail += vprod;
            continue;
        }
        std::vector<SiteSet> chosen;
        for (int i : idx) chosen.push_back(link_sets[i]);
        if (l_connected_components(chosen, res.lat, res.bar, res.scheme.a).size() != 1)
            continue;
        BlockSet N;
        for (int i : idx)
            for (int b : bars[i]) N.push_back(b);
        N = canonical(std::move(N));
        double e = modified_expectation(res, [&](Config c) {
            double prod = 1.0;
            for (int i : idx) prod *= activities[i].eval(c);
            return prod;
        });
        out.w[N] += e;
        out.v[N] += vprod;
    }
    for (auto& [N, _] : out.w) out.supports.push_back(N);
    return out;
}

// sum over hard-core collections Delta (supports pairwise farther than a
// apart in the bar lattice) of prod w_N.
inline double partition_over_collections(const std::vector<BlockSet>& supports,
                                         const std::map<BlockSet, double>& w,
                                         const BarLattice& bar, int a,
                                         const std::vector<BlockSet>& avoid = {}) {
    int n = static_cast<int>(supports.size());
    if (n > 20) throw cap_exceeded("partition_over_collections: too many polymers");
    std::vector<std::vector<bool>> compat(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            compat[i][j] = bar.set_dist(supports[i], supports[j]) > double(a) + 1e-12;
    std::vector<bool> allowed(n, true);
    for (int i = 0; i < n; ++i)
        for (const auto& Y : avoid)
            if (!Y.empty() && bar.set_dist(supports[i], Y) <= double(a) + 1e-12)
                allowed[i] = false;
    double total = 0.0;
    for (std::uint32_t sub = 0; sub < (1u << n); ++sub) {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            if (!((sub >> i) & 1u)) continue;
            if (!allowed[i]) { ok = false; break; }
            for (int j = i + 1; j < n && ok; ++j)
                if (((sub >> j) & 1u) && !compat[i][j]) ok = false;
        }
        if (!ok) continue;
        double prod = 1.0;
        for (int i = 0; i < n; ++i)
            if ((sub >> i) & 1u) prod *= w.at(supports[i]);
        total += prod;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Ursell coefficients C(N_1,...,N_n) = sum over connected graphs of
// prod (-c(N_i,N_j)), computed by Moebius inversion over the root component:
// for S containing its least element m, conn(S) = g(S) - sum over proper
// subsets S' of S containing m of conn(S') g(S \ S').
// ---------------------------------------------------------------------------
inline double ursell(const std::vector<std::vector<double>>& c) {
    int n = static_cast<int>(c.size());
    if (n < 1 || n > 16) throw cap_exceeded("ursell: n in 1..16");
    std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1u);
    std::vector<double> g(full + 1, 1.0);  // sum over all graphs on S
    for (std::uint32_t S = 0; S <= full; ++S)
        for (int i = 0; i < n; ++i) {
            if (!((S >> i) & 1u)) continue;
            for (int j = i + 1; j < n; ++j)
                if ((S >> j) & 1u) g[S] *= (1.0 - c[i][j]);
        }
    std::vector<double> conn(full + 1, 0.0);
    for (std::uint32_t S = 1; S <= full; ++S) {
        int m = std::countr_zero(S);
        double acc = g[S];
        std::uint32_t rest = S & ~(1u << m);
        // Proper sub-subsets of S containing m.
        for (std::uint32_t sub = rest; sub > 0; sub = (sub - 1) & rest) {
            std::uint32_t Sp = S & ~sub;  // contains m, proper since sub nonempty
            acc -= conn[Sp] * g[sub];
        }
        conn[S] = acc;
    }
    return conn[full];
}

// ---------------------------------------------------------------------------
// Kotecky-Preiss condition and the avoidance-probability oracle.
// ---------------------------------------------------------------------------

struct KpSiteReport {
    int site = 0;
    double lhs = 0.0;    // sum_{N: dist(y,N) <= a} v_N M^{|N|}
    double margin = 0.0; // log M - lhs
    bool pass = false;
};

struct KpReport {
    std::vector<KpSiteReport> sites;
    bool pass = true;
};

inline KpReport kp_condition_check(const std::vector<BlockSet>& supports,
                                   const std::map<BlockSet, double>& v, double M,
                                   const BarLattice& bar, int a) {
    if (!(M > 1.0)) throw config_error("kp_condition_check: M must exceed 1");
    KpReport rep;
    double lm = std::log(M);
    for (int y = 0; y < bar.size(); ++y) {
        KpSiteReport sr;
        sr.site = y;
        for (const auto& N : supports) {
            if (bar.set_dist({y}, N) > double(a) + 1e-12) continue;
            sr.lhs += v.at(N) * std::pow(M, double(N.size()));
        }
        sr.margin = lm - sr.lhs;
        sr.pass = sr.lhs <= lm + 1e-12;
        rep.pass = rep.pass && sr.pass;
        rep.sites.push_back(sr);
    }
    return rep;
}

struct AvoidanceResult {
    double ratio = 0.0;
    double bound = 0.0;  // M^{|Y|}
    bool pass = false;
};

// Brute-force avoidance probability: collections avoiding Y over all
// collections. The KP theorem promises |ratio| <= M^{|Y|} whenever the
// per-site condition holds.
inline AvoidanceResult avoidance_oracle(const std::vector<BlockSet>& supports,
                                        const std::map<BlockSet, double>& w,
                                        const BlockSet& Y, double M, const BarLattice& bar,
                                        int a) {
    if (supports.size() > 12) throw cap_exceeded("avoidance_oracle: too many polymers");
    AvoidanceResult res;
    double den = partition_over_collections(supports, w, bar, a);
    if (den == 0.0) throw std::runtime_error("avoidance_oracle: zero denominator");
    double num = partition_over_collections(supports, w, bar, a, {Y});
    res.ratio = num / den;
    res.bound = std::pow(M, double(Y.size()));
    res.pass = std::abs(res.ratio) <= res.bound + 1e-12;
    return res;
}

// ---------------------------------------------------------------------------
// Numerator decomposition: sum_sigma T e^{-H} sigma_W =
//   e^{-F4} sum_{R, Delta'} w~_R prod_{N in Delta'} w_N,
// where w~_R sums hypergraphs whose every L-connected component is
// L-connected to W (R = empty handles the none-intersecting case).
// ---------------------------------------------------------------------------

struct NumeratorDecomposition {
    std::map<BlockSet, double> w_tilde;  // R -> w~_R (R = {} included)
    double reconstructed = 0.0;          // e^{-F4} sum_{R,Delta'} w~_R prod w_N
};

inline NumeratorDecomposition numerator_decomposition(
    const IteratedSumResult& res, const std::vector<PolymerActivity>& activities,
    const PolymerWeights& weights, const SiteSet& W, int n_max) {
    NumeratorDecomposition out;
    int n_links = static_cast<int>(activities.size());
    std::uint32_t wmask = mask_of(W);
    BlockSet wbar = bar_map(W, res.lat, res.bar);

    for (std::uint32_t sub = 0; sub < (1u << n_links); ++sub) {
        std::vector<int> idx;
        for (int i = 0; i < n_links; ++i)
            if ((sub >> i) & 1u) idx.push_back(i);
        if (static_cast<int>(idx.size()) > n_max) continue;
        std::vector<SiteSet> chosen;
        for (int i : idx) chosen.push_back(activities[i].B);
        // Every component must be L-connected to W.
        bool all_connected = true;
        if (!idx.empty()) {
            auto comps = l_connected_components(chosen, res.lat, res.bar, res.scheme.a);
            for (const auto& comp : comps) {
                BlockSet csup;
                for (int k : comp)
                    for (int b : activities[idx[k]].bbar) csup.push_back(b);
                csup = canonical(std::move(csup));
                if (res.bar.set_dist(csup, wbar) > double(res.scheme.a) + 1e-12) {
                    all_connected = false;
                    break;
                }
            }
        }
        if (!all_connected) continue;
        BlockSet R;
        for (int i : idx)
            for (int b : activities[i].bbar) R.push_back(b);
        R = canonical(std::move(R));
        double e = modified_expectation(res, [&](Config c) {
            double prod = double(character(c, wmask));
            for (int i : idx) prod *= activities[i].eval(c);
            return prod;
        });
        out.w_tilde[R] += e;
    }

    // Delta': hard-core collections farther than a from R union W-bar.
    double total = 0.0;
    for (const auto& [R, wtr] : out.w_tilde) {
        BlockSet avoid = R;
        for (int b : wbar) avoid.push_back(b);
        avoid = canonical(std::move(avoid));
        total += wtr * partition_over_collections(weights.supports, weights.w, res.bar,
                                                  res.scheme.a, {avoid});
    }
    out.reconstructed = res.final_scalar * total;
    return out;
}

// Cluster representation of the denominator:
// e^{-F4} * sum_Delta prod w_N, to compare against sum_sigma T e^{-H}.
inline double cluster_reconstruction(const IteratedSumResult& res,
                                     const PolymerWeights& weights) {
    return res.final_scalar * partition_over_collections(weights.supports, weights.w,
                                                         res.bar, res.scheme.a);
}

}  // namespace blockrg
