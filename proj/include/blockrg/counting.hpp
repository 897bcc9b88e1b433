#pragma once

#include <gmpxx.h>

#include <cmath>
#include <vector>

#include "blockrg/errors.hpp"
#include "blockrg/lattice.hpp"

namespace blockrg {

// Counting constants of the hypergraph lemmas: p link capacity in L-blocks,
// r bar-lattice ball size, c_link per-site link count, M the KP parameter.
// Exact rational arithmetic throughout; the chains of inequalities being
// tested collapse under floating error at large n.
struct CountingParams {
    int p = 2;
    mpq_class r = 1;
    mpq_class c_link = 1;
    mpq_class M = 2;

    mpq_class rc() const { return r * c_link; }

    void validate() const {
        if (p < 2) throw config_error("counting: p must be >= 2");
        if (r <= 0 || c_link <= 0) throw config_error("counting: r, c must be positive");
        if (M <= 1) throw config_error("counting: M must exceed 1");
    }
};

struct SeriesCoeffs {
    std::vector<mpq_class> a;  // a[n-1] = a-bar_n, in z units

    const mpq_class& coeff(int n) const { return a.at(n - 1); }
    int size() const { return static_cast<int>(a.size()); }
};

// a-bar_n = rc sum_{k=0}^p C(p,k) sum_{n_1+...+n_k+1=n} prod a-bar_{n_i},
// ordered compositions with parts >= 1; the k=0 empty composition is the
// n=1 base case.
inline SeriesCoeffs recursion_coeffs(const CountingParams& prm, int n_max) {
    prm.validate();
    if (n_max < 1 || n_max > 64) throw config_error("recursion_coeffs: n_max in 1..64");
    SeriesCoeffs out;
    out.a.resize(n_max, 0);
    mpq_class rc = prm.rc();
    for (int n = 1; n <= n_max; ++n) {
        mpq_class total = 0;
        if (n == 1) total = 1;  // k = 0
        // conv[k][m] = sum over ordered k-tuples with parts >= 1 summing to m.
        std::vector<mpq_class> conv(n, 0);  // k = 1 layer: conv[m] = a-bar_m, m <= n-1
        for (int m = 1; m <= n - 1; ++m) conv[m] = out.a[m - 1];
        for (int k = 1; k <= prm.p; ++k) {
            if (k > 1) {
                std::vector<mpq_class> next(n, 0);
                for (int m = k; m <= n - 1; ++m)
                    for (int j = 1; j <= m - (k - 1); ++j)
                        next[m] += out.a[j - 1] * conv[m - j];
                conv = std::move(next);
            }
            if (n - 1 >= k) {
                mpz_class binom;
                mpz_bin_uiui(binom.get_mpz_t(), prm.p, k);
                total += mpq_class(binom) * conv[n - 1];
            }
        }
        out.a[n - 1] = rc * total;
    }
    return out;
}

// Lagrange inversion of w = rc z (1+w)^p: [z1^n] w = (1/n) C(pn, n-1) in
// z1 = rc z units, so a-bar_n = (rc)^n (1/n) C(pn, n-1).
inline SeriesCoeffs lagrange_coeffs(const CountingParams& prm, int n_max) {
    prm.validate();
    if (n_max < 1 || n_max > 64) throw config_error("lagrange_coeffs: n_max in 1..64");
    SeriesCoeffs out;
    out.a.resize(n_max);
    mpq_class rc = prm.rc();
    mpq_class rcn = 1;
    for (int n = 1; n <= n_max; ++n) {
        rcn *= rc;
        mpz_class binom;
        mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(prm.p) * n, n - 1);
        out.a[n - 1] = rcn * mpq_class(binom) / n;
    }
    return out;
}

inline mpq_class pow_q(const mpq_class& x, int e) {
    mpq_class out = 1;
    for (int i = 0; i < e; ++i) out *= x;
    return out;
}

struct RadiusAndBound {
    mpq_class radius;   // (p-1)^{p-1} / (rc p^p)
    mpq_class bound_n;  // (rc p^p)^n (p-1)^{-(1+(p-1)n)}
};

inline RadiusAndBound radius_and_bound(const CountingParams& prm, int n) {
    prm.validate();
    mpq_class pm1 = prm.p - 1;
    mpq_class ppow = pow_q(prm.p, prm.p);
    RadiusAndBound out;
    out.radius = pow_q(pm1, prm.p - 1) / (prm.rc() * ppow);
    out.bound_n = pow_q(prm.rc() * ppow, n) / pow_q(pm1, 1 + (prm.p - 1) * n);
    return out;
}

// x = rc (Mp)^p epsilon / (p-1)^{p-1}: the geometric ratio of the majorant
// series. Everything below diverges at x >= 1.
inline double series_ratio(const CountingParams& prm, double epsilon) {
    double rc = prm.rc().get_d();
    double M = prm.M.get_d();
    return rc * std::pow(M * prm.p, prm.p) * epsilon / std::pow(prm.p - 1.0, prm.p - 1);
}

// epsilon(L) threshold of the KP sufficiency proposition:
// log(M) (p-1)^p / (rc (Mp)^p (1 + (p-1) log M)).
inline double epsilon_threshold(const CountingParams& prm) {
    prm.validate();
    double lm = std::log(prm.M.get_d());
    double rc = prm.rc().get_d();
    double M = prm.M.get_d();
    return lm * std::pow(prm.p - 1.0, prm.p) /
           (rc * std::pow(M * prm.p, prm.p) * (1.0 + (prm.p - 1.0) * lm));
}

// Closed form of sum_n a-bar_n (M^p eps)^n under the explicit bound:
// [rc (Mp)^p eps / (p-1)^p] / [1 - rc (Mp)^p eps / (p-1)^{p-1}].
inline double tail_sum(const CountingParams& prm, double epsilon) {
    prm.validate();
    double x = series_ratio(prm, epsilon);
    if (x >= 1.0) throw divergent_expansion("tail_sum: epsilon at or past divergence");
    return x / ((prm.p - 1.0) * (1.0 - x));
}

// delta(P) = x^{P/p} / ((p-1)(1-x)): tail of polymer sums over supports
// larger than P.
inline double delta_tail(const CountingParams& prm, double epsilon, double P) {
    prm.validate();
    double x = series_ratio(prm, epsilon);
    if (x >= 1.0) throw divergent_expansion("delta_tail: epsilon at or past divergence");
    return std::pow(x, P / prm.p) / ((prm.p - 1.0) * (1.0 - x));
}

// ---------------------------------------------------------------------------
// Exhaustive rooted hypergraph count on an explicit link family:
// a_n(y) = #{Gamma : |Gamma| = n, L-connected, dist(y, Gamma*) <= a}.
// ---------------------------------------------------------------------------
inline long rooted_count_exact(const std::vector<SiteSet>& links, int root_block, int n,
                               const Lattice& lat, const BarLattice& bar, int a) {
    if (links.size() > 12) throw cap_exceeded("rooted_count_exact: family above cap");
    if (n < 1 || n > 4) throw cap_exceeded("rooted_count_exact: n in 1..4");
    std::vector<BlockSet> bars(links.size());
    for (std::size_t i = 0; i < links.size(); ++i) bars[i] = bar_map(links[i], lat, bar);
    long count = 0;
    for (std::uint32_t sub = 1; sub < (1u << links.size()); ++sub) {
        if (std::popcount(sub) != n) continue;
        std::vector<SiteSet> chosen;
        BlockSet support;
        for (std::size_t i = 0; i < links.size(); ++i)
            if ((sub >> i) & 1u) {
                chosen.push_back(links[i]);
                for (int blk : bars[i]) support.push_back(blk);
            }
        support = canonical(std::move(support));
        if (bar.set_dist({root_block}, support) > double(a) + 1e-12) continue;
        if (l_connected_components(chosen, lat, bar, a).size() != 1) continue;
        ++count;
    }
    return count;
}

}  // namespace blockrg
