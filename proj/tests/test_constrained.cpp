#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "blockrg/constrained.hpp"

using namespace blockrg;

static Lattice ring(int n) {
    return Lattice({Geometry::square_1d, {n}, Boundary::periodic, {}});
}

TEST_CASE("constrained expectation basics") {
    Lattice r8 = ring(8);
    Blocking blk = make_block_geometry(r8, 2);
    Kernel dec{KernelKind::decimation, 0};
    Interaction zero;

    Config sp = 0b0101;  // blocks 0 and 2 down
    ConstrainedMeasure mu{&zero, &dec, &blk, &r8, sp, {}};
    CHECK(mu.expectation([](Config) { return 1.0; }) == doctest::Approx(1.0));
    // kept site of block j reproduces sigma'_j
    for (int j = 0; j < 4; ++j)
        CHECK(mu.spin_expectation({blk.kept[j]}) == doctest::Approx(spin_at(sp, j)));
    // free sites are uniform
    CHECK(mu.spin_expectation({1}) == doctest::Approx(0.0));
}

TEST_CASE("truncated correlation") {
    Lattice r8 = ring(8);
    Blocking blk = make_block_geometry(r8, 2);
    Kernel dec{KernelKind::decimation, 0};
    Interaction zero;
    ConstrainedMeasure mu{&zero, &dec, &blk, &r8, 0b0011, {}};

    SUBCASE("i = j gives 1 - mu(s_i)^2") {
        CHECK(mu.truncated_correlation(1, 1) == doctest::Approx(1.0));   // free site
        CHECK(mu.truncated_correlation(0, 0) == doctest::Approx(0.0));   // kept site
    }
    SUBCASE("product measure gives zero cross correlations") {
        CHECK(mu.truncated_correlation(1, 3) == doctest::Approx(0.0));
        CHECK(mu.truncated_correlation(1, 2) == doctest::Approx(0.0));
    }
    SUBCASE("symmetry") {
        Lattice r6 = ring(6);
        Interaction J = instantiate(nearest_neighbor(Geometry::square_1d, 0.4), r6);
        Blocking b6 = make_block_geometry(r6, 2);
        ConstrainedMeasure m2{&J, &dec, &b6, &r6, 0b101, {}};
        CHECK(m2.truncated_correlation(1, 4) == doctest::Approx(m2.truncated_correlation(4, 1)));
    }
}

TEST_CASE("free chain truncated correlation equals tanh(beta)^d") {
    // 1D open chain without a field: the truncated two-point function under
    // the full Gibbs measure is exactly tanh(beta)^{|i-j|}.
    Lattice chain({Geometry::square_1d, {10}, Boundary::free_, {}});
    Interaction J = instantiate(nearest_neighbor(Geometry::square_1d, 0.4), chain);
    Kernel triv{KernelKind::trivial, 0};
    Blocking blk = make_trivial_blocking();
    ConstrainedMeasure mu{&J, &triv, &blk, &chain, 0, {}};
    double t = std::tanh(0.4);
    CHECK(mu.truncated_correlation(2, 5) == doctest::Approx(std::pow(t, 3)).epsilon(1e-10));
    CHECK(std::pow(t, 3) == doctest::Approx(0.054849).epsilon(1e-4));
    CHECK(mu.truncated_correlation(0, 9) == doctest::Approx(std::pow(t, 9)).epsilon(1e-10));
}

TEST_CASE("hypothesis fit on the free chain") {
    Lattice chain({Geometry::square_1d, {10}, Boundary::free_, {}});
    HypothesisInstance inst;
    inst.lat = chain;
    inst.J = instantiate(nearest_neighbor(Geometry::square_1d, 0.4), chain);
    inst.kernel = {KernelKind::trivial, 0};
    inst.blocking = make_trivial_blocking();
    inst.volume_id = "chain10";
    HypothesisOptions opt;
    opt.pair_budget = 1000;  // exhaustive pairs
    auto rep = hypothesis_check({inst}, opt);
    double expect = -std::log(std::tanh(0.4));
    CHECK(rep.holds);
    CHECK(rep.m_hyp == doctest::Approx(expect).epsilon(0.02));
    CHECK(rep.c_hyp >= 0.9);
    CHECK(rep.c_hyp <= 1.1);
}

TEST_CASE("hypothesis sentinel at J=0 decimation") {
    Lattice r8 = ring(8);
    HypothesisInstance inst;
    inst.lat = r8;
    inst.J = {};
    inst.kernel = {KernelKind::decimation, 0};
    inst.blocking = make_block_geometry(r8, 2);
    inst.volume_id = "ring8";
    auto rep = hypothesis_check({inst}, {});
    CHECK(rep.holds);
    CHECK(std::isinf(rep.m_hyp));
    CHECK(rep.c_hyp == 0.0);
}

TEST_CASE("fitted decay rate decreases with beta on the chain") {
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {0.2, 0.4, 0.6}) {
        Lattice chain({Geometry::square_1d, {10}, Boundary::free_, {}});
        HypothesisInstance inst;
        inst.lat = chain;
        inst.J = instantiate(nearest_neighbor(Geometry::square_1d, beta), chain);
        inst.kernel = {KernelKind::trivial, 0};
        inst.blocking = make_trivial_blocking();
        inst.volume_id = "chain10";
        HypothesisOptions opt;
        opt.pair_budget = 1000;
        auto rep = hypothesis_check({inst}, opt);
        CHECK(rep.m_hyp < prev);
        prev = rep.m_hyp;
    }
}

TEST_CASE("transfer backend agrees with enumeration on 4x4") {
    // Force the transfer-matrix path by lowering the cap, then compare with
    // the exact enumeration on the same volume.
    Lattice t44({Geometry::square_2d, {4, 4}, Boundary::periodic, {}});
    double beta = 0.3;
    HypothesisInstance inst;
    inst.lat = t44;
    inst.J = instantiate(nearest_neighbor(Geometry::square_2d, beta), t44);
    inst.kernel = {KernelKind::decimation, 0};
    inst.blocking = make_block_geometry(t44, 2);
    inst.volume_id = "t44";

    HypothesisOptions direct;
    direct.allow_transfer_backend = false;
    HypothesisOptions tm;
    tm.caps.max_spins = 8;  // force the backend
    tm.beta_for_transfer = beta;

    auto a = hypothesis_check({inst}, direct);
    auto b = hypothesis_check({inst}, tm);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k)
        CHECK(a.samples[k].corr == doctest::Approx(b.samples[k].corr).epsilon(1e-9));
}
