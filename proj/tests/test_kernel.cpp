#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "blockrg/kernel.hpp"

using namespace blockrg;

static Lattice ring(int n) {
    return Lattice({Geometry::square_1d, {n}, Boundary::periodic, {}});
}

static Lattice torus(int w, int h) {
    return Lattice({Geometry::square_2d, {w, h}, Boundary::periodic, {}});
}

TEST_CASE("block geometry") {
    Lattice t44 = torus(4, 4);
    Blocking blk = make_block_geometry(t44, 2);
    CHECK(blk.n_blocks() == 4);
    CHECK(blk.image.extent(0) == 2);
    for (int j = 0; j < 4; ++j) {
        CHECK(blk.blocks[j].size() == 4);
        Coord kc = t44.coord(blk.kept[j]);
        CHECK(kc[0] % 2 == 0);
        CHECK(kc[1] % 2 == 0);
    }
    CHECK_THROWS_AS(make_block_geometry(t44, 3), config_error);
}

TEST_CASE("triangular blocking") {
    Lattice tri({Geometry::triangular_2d, {3, 3}, Boundary::periodic, {}});
    Blocking blk = make_triangle_blocking(tri);
    CHECK(blk.n_blocks() == 3);
    std::vector<int> covered;
    for (const auto& b : blk.blocks) {
        CHECK(b.size() == 3);
        for (int s : b) covered.push_back(s);
    }
    CHECK(canonical(std::move(covered)).size() == 9);  // partition
}

TEST_CASE("kernel evaluation") {
    Lattice r4 = ring(4);
    Blocking blk = make_block_geometry(r4, 2);

    SUBCASE("decimation indicator") {
        Kernel T{KernelKind::decimation, 0.0};
        // kept sites are 0 and 2; sigma' must copy them
        Config sigma = 0b0100;  // site 2 down
        CHECK(kernel_eval(T, blk, sigma, 0b10) == 1.0);
        CHECK(kernel_eval(T, blk, sigma, 0b00) == 0.0);
    }
    SUBCASE("kadanoff factor") {
        Lattice tri({Geometry::triangular_2d, {3, 3}, Boundary::periodic, {}});
        Blocking tblk = make_triangle_blocking(tri);
        Kernel T{KernelKind::kadanoff, 0.5};
        // all +1 block: factor e^{1.5}/(2 cosh 1.5) per block
        double expect = std::exp(1.5) / (2.0 * std::cosh(1.5));
        CHECK(kernel_eval(T, tblk, 0, 0) == doctest::Approx(std::pow(expect, 3)));
    }
    SUBCASE("majority on 3-site block") {
        Lattice tri({Geometry::triangular_2d, {3, 3}, Boundary::periodic, {}});
        Blocking tblk = make_triangle_blocking(tri);
        Kernel T{KernelKind::majority, 0.0};
        // one spin down in block 0 still gives majority +1
        Config one_down = Config(1) << tblk.blocks[0][2];
        CHECK(kernel_eval(T, tblk, one_down, 0) == 1.0);
        CHECK(kernel_eval(T, tblk, one_down, 1) == 0.0);
    }
}

TEST_CASE("kernel normalization over all sigma") {
    // sum_{sigma'} T(sigma, sigma') = 1: exact for decimation/majority,
    // floating-point for kadanoff.
    auto check_normalized = [](const Kernel& T, const Blocking& blk, const Lattice& lat,
                               double tol) {
        std::size_t n = std::size_t(1) << lat.size();
        std::size_t ni = std::size_t(1) << blk.n_blocks();
        for (std::size_t c = 0; c < n; ++c) {
            double sum = 0.0;
            for (std::size_t sp = 0; sp < ni; ++sp)
                sum += kernel_eval(T, blk, Config(c), Config(sp));
            if (tol == 0.0)
                REQUIRE(sum == 1.0);  // exact: products of 0/1/0.5 indicators
            else
                REQUIRE(std::abs(sum - 1.0) <= tol);
        }
    };
    Lattice r8 = ring(8);
    Blocking b1 = make_block_geometry(r8, 2);
    check_normalized({KernelKind::decimation, 0}, b1, r8, 0.0);
    check_normalized({KernelKind::kadanoff, 0.7}, b1, r8, 1e-12);
    check_normalized({KernelKind::majority, 0}, b1, r8, 0.0);

    Lattice tri({Geometry::triangular_2d, {3, 3}, Boundary::periodic, {}});
    Blocking tb = make_triangle_blocking(tri);
    check_normalized({KernelKind::majority, 0}, tb, tri, 0.0);
    check_normalized({KernelKind::kadanoff, 0.3}, tb, tri, 1e-12);
}
