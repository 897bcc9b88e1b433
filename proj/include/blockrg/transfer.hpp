#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "blockrg/errors.hpp"

namespace blockrg {

// Row transfer matrix for the 2D periodic square lattice with uniform
// nearest-neighbor coupling beta and an arbitrary set of clamped sites
// (e.g. the kept sites of a decimation kernel). Exact: no sampling, no
// truncation. Complements the generic enumeration path on volumes whose free
// spin count is out of enumeration range.
class TransferEngine2D {
  public:
    TransferEngine2D(int width, int height, double beta,
                     const std::vector<std::int8_t>& clamp)  // 0 free, +1/-1 fixed
        : w_(width), h_(height), beta_(beta), clamp_(clamp) {
        if (w_ < 2 || h_ < 2) throw config_error("transfer engine needs extent >= 2");
        if (w_ > 16) throw cap_exceeded("transfer engine row width above cap");
        if (static_cast<int>(clamp.size()) != w_ * h_)
            throw config_error("clamp size mismatch");
        build_rows();
        run();
    }

    double log_partition() const { return std::log(z_) + log_scale_; }

    // Expectation of a product of spins at the given sites.
    double spin_product_expectation(const std::vector<int>& sites) const {
        std::vector<std::uint32_t> row_sign(h_, 0);
        for (int s : sites) row_sign[s / w_] ^= (1u << (s % w_));
        // Signed forward pass: identical recursion with character insertions.
        double scale = 0.0;
        std::vector<std::vector<double>> f = seed_f(row_sign[0]);
        for (int r = 1; r < h_; ++r) step(f, r, row_sign[r], scale);
        double num = close(f);
        return num / z_ * std::exp(scale - scale_f_);
    }

    // mu(sigma_i sigma_j) for all nearest-neighbor bonds, packed as
    // horizontal bonds (r*w + c, c..w-1 wrapping) then vertical bonds.
    // Returned in canonical order: for each row r, for each column c,
    // horizontal bond ((c,r),(c+1,r)); then for each r, c, vertical bond
    // ((c,r),(c,r+1)).
    std::vector<double> all_bond_expectations() const {
        std::vector<double> out;
        out.reserve(std::size_t(2) * w_ * h_);
        // Row marginals handle horizontal bonds, edge marginals vertical ones.
        for (int r = 0; r < h_; ++r) {
            const auto& st = states_[r];
            std::vector<double> marg(st.size(), 0.0);
            for (std::size_t k = 0; k < nb_; ++k)
                for (std::size_t i = 0; i < st.size(); ++i)
                    marg[i] += f_[r][k * st.size() + i] * b_[r][k * st.size() + i];
            double zr = 0.0;
            for (double m : marg) zr += m;
            for (int c = 0; c < w_; ++c) {
                double e = 0.0;
                for (std::size_t i = 0; i < st.size(); ++i) {
                    std::uint32_t s = st[i];
                    int prod = sign_bit(s, c) * sign_bit(s, (c + 1) % w_);
                    e += marg[i] * prod;
                }
                out.push_back(e / zr);
            }
        }
        for (int r = 0; r < h_; ++r) {
            int rn = (r + 1) % h_;
            std::vector<double> e(w_, 0.0);
            double zr = 0.0;
            const auto& st = states_[r];
            const auto& stn = states_[rn];
            for (std::size_t k = 0; k < nb_; ++k)
                for (std::size_t i = 0; i < st.size(); ++i) {
                    double fi = f_[r][k * st.size() + i];
                    if (fi == 0.0) continue;
                    if (r + 1 < h_) {
                        for (std::size_t jj = 0; jj < stn.size(); ++jj) {
                            // b_[rn] excludes row rn's own horizontal weight.
                            double wgt = fi * tv(st[i], stn[jj]) * hrow(stn[jj]) *
                                         b_[rn][k * stn.size() + jj];
                            if (wgt == 0.0) continue;
                            zr += wgt;
                            std::uint32_t x = st[i] ^ stn[jj];
                            for (int c = 0; c < w_; ++c)
                                e[c] += ((x >> c) & 1u) ? -wgt : wgt;
                        }
                    } else {
                        // Wrap edge: the next row is the conditioned boundary row.
                        double wgt = fi * tv(st[i], states_[0][k]);
                        if (wgt == 0.0) continue;
                        zr += wgt;
                        std::uint32_t x = st[i] ^ states_[0][k];
                        for (int c = 0; c < w_; ++c)
                            e[c] += ((x >> c) & 1u) ? -wgt : wgt;
                    }
                }
            for (int c = 0; c < w_; ++c) out.push_back(e[c] / zr);
        }
        return out;
    }

  private:
    static int sign_bit(std::uint32_t s, int c) { return (s >> c) & 1u ? -1 : +1; }

    // Vertical transfer weight between row states.
    double tv(std::uint32_t a, std::uint32_t b) const {
        return expv_[std::popcount(a ^ b)];
    }

    // Horizontal weight of one row state, with optional character insertion.
    double hrow(std::uint32_t s) const {
        std::uint32_t rot = ((s >> 1) | (s << (w_ - 1))) & ((1u << w_) - 1u);
        return expv_[std::popcount(s ^ rot)];
    }

    void build_rows() {
        expv_.resize(w_ + 1);
        for (int m = 0; m <= w_; ++m) expv_[m] = std::exp(beta_ * (w_ - 2 * m));
        states_.resize(h_);
        for (int r = 0; r < h_; ++r) {
            std::uint32_t fixed_mask = 0, fixed_val = 0;
            for (int c = 0; c < w_; ++c) {
                std::int8_t cl = clamp_[r * w_ + c];
                if (cl != 0) {
                    fixed_mask |= (1u << c);
                    if (cl < 0) fixed_val |= (1u << c);
                }
            }
            std::uint32_t free_mask = ~fixed_mask & ((1u << w_) - 1u);
            // Enumerate subsets of the free mask.
            std::uint32_t sub = 0;
            while (true) {
                states_[r].push_back(sub | fixed_val);
                if (sub == free_mask) break;
                sub = (sub - free_mask) & free_mask;
            }
            std::sort(states_[r].begin(), states_[r].end());
        }
        nb_ = states_[0].size();
    }

    std::vector<std::vector<double>> seed_f(std::uint32_t sign0) const {
        std::vector<std::vector<double>> f(h_);
        f[0].assign(nb_ * states_[0].size(), 0.0);
        for (std::size_t k = 0; k < nb_; ++k) {
            std::uint32_t s = states_[0][k];
            double v = hrow(s);
            if (sign0) v *= character_sign(s, sign0);
            f[0][k * states_[0].size() + k] = v;
        }
        return f;
    }

    static double character_sign(std::uint32_t state, std::uint32_t mask) {
        return (std::popcount(state & mask) & 1) ? -1.0 : 1.0;
    }

    void step(std::vector<std::vector<double>>& f, int r, std::uint32_t sign_r,
              double& scale) const {
        const auto& prev = states_[r - 1];
        const auto& cur = states_[r];
        f[r].assign(nb_ * cur.size(), 0.0);
        double mx = 0.0;
        for (std::size_t jj = 0; jj < cur.size(); ++jj) {
            double hw = hrow(cur[jj]);
            if (sign_r) hw *= character_sign(cur[jj], sign_r);
            for (std::size_t k = 0; k < nb_; ++k) {
                double acc = 0.0;
                const double* fp = f[r - 1].data() + k * prev.size();
                for (std::size_t i = 0; i < prev.size(); ++i)
                    acc += fp[i] * tv(prev[i], cur[jj]);
                f[r][k * cur.size() + jj] = acc * hw;
                mx = std::max(mx, std::abs(acc * hw));
            }
        }
        if (mx > 0.0 && (mx > 1e100 || mx < 1e-100)) {
            for (double& v : f[r]) v /= mx;
            scale += std::log(mx);
        }
    }

    double close(const std::vector<std::vector<double>>& f) const {
        double z = 0.0;
        const auto& last = states_[h_ - 1];
        for (std::size_t k = 0; k < nb_; ++k)
            for (std::size_t i = 0; i < last.size(); ++i)
                z += f[h_ - 1][k * last.size() + i] * tv(last[i], states_[0][k]);
        return z;
    }

    void run() {
        scale_f_ = 0.0;
        f_ = seed_f(0);
        for (int r = 1; r < h_; ++r) step(f_, r, 0, scale_f_);
        z_ = close(f_);
        if (!(z_ > 0.0)) throw std::runtime_error("transfer engine: zero partition function");
        log_scale_ = scale_f_;
        // Backward messages: b_[r][k][i] sums rows r+1..end plus the wrap
        // factor to the conditioned boundary state k. Row r's own horizontal
        // weight lives in f_, so f.b counts every factor exactly once.
        b_.assign(h_, {});
        b_[h_ - 1].assign(nb_ * states_[h_ - 1].size(), 0.0);
        for (std::size_t k = 0; k < nb_; ++k)
            for (std::size_t i = 0; i < states_[h_ - 1].size(); ++i)
                b_[h_ - 1][k * states_[h_ - 1].size() + i] = tv(states_[h_ - 1][i], states_[0][k]);
        for (int r = h_ - 2; r >= 0; --r) {
            const auto& cur = states_[r];
            const auto& nxt = states_[r + 1];
            b_[r].assign(nb_ * cur.size(), 0.0);
            for (std::size_t k = 0; k < nb_; ++k)
                for (std::size_t i = 0; i < cur.size(); ++i) {
                    double acc = 0.0;
                    const double* bp = b_[r + 1].data() + k * nxt.size();
                    for (std::size_t jj = 0; jj < nxt.size(); ++jj)
                        acc += tv(cur[i], nxt[jj]) * hrow(nxt[jj]) * bp[jj];
                    b_[r][k * cur.size() + i] = acc;
                }
        }
    }

    int w_, h_;
    double beta_;
    std::vector<std::int8_t> clamp_;
    std::vector<double> expv_;
    std::vector<std::vector<std::uint32_t>> states_;
    std::size_t nb_ = 0;
    std::vector<std::vector<double>> f_, b_;
    double z_ = 0.0, scale_f_ = 0.0, log_scale_ = 0.0;
};

}  // namespace blockrg
