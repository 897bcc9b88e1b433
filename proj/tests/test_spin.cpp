#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "blockrg/rng.hpp"
#include "blockrg/spin.hpp"

using namespace blockrg;

static Lattice ring(int n) {
    return Lattice({Geometry::square_1d, {n}, Boundary::periodic, {}});
}

TEST_CASE("energy basics") {
    Lattice r4 = ring(4);
    Interaction J;
    J.add({1, 2}, 0.5);
    CHECK(energy(J, 0, r4) == doctest::Approx(-0.5));  // all +1
    Interaction zero;
    for (Config c = 0; c < 16; ++c) CHECK(energy(zero, c, r4) == 0.0);
    Interaction nn = instantiate(nearest_neighbor(Geometry::square_1d, 1.0), r4);
    CHECK(energy(nn, 0, r4) == doctest::Approx(-4.0));
}

TEST_CASE("energy linearity in J") {
    Lattice r4 = ring(4);
    Interaction a, b;
    a.add({0, 1}, 0.3).add({2}, -0.7);
    b.add({1, 3}, 0.2).add({}, 1.5);
    for (Config c = 0; c < 16; ++c)
        CHECK(energy(a + b, c, r4) ==
              doctest::Approx(energy(a, c, r4) + energy(b, c, r4)).epsilon(1e-12));
}

TEST_CASE("flip symmetry for even interactions") {
    Lattice r4 = ring(4);
    Interaction even = instantiate(nearest_neighbor(Geometry::square_1d, 0.7), r4);
    for (Config c = 0; c < 16; ++c)
        CHECK(energy(even, c, r4) == doctest::Approx(energy(even, c ^ 0xFu, r4)));
    Interaction odd;
    odd.add({0}, 1.0);
    CHECK(energy(odd, 0, r4) != energy(odd, 0xF, r4));
}

TEST_CASE("interaction norm") {
    CHECK(interaction_norm(InteractionGenerator{}) == 0.0);
    double beta = 0.4;
    CHECK(interaction_norm(nearest_neighbor(Geometry::square_2d, beta)) ==
          doctest::Approx(4 * beta));
    CHECK(interaction_norm(nearest_neighbor(Geometry::square_1d, beta, 0.1)) ==
          doctest::Approx(2 * beta + 0.1));
}

TEST_CASE("norm triangle inequality and homogeneity on random shapes") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        InteractionGenerator a, b;
        for (int s = 0; s < 3; ++s) {
            int dx = int(rng.next_below(3));
            a.add({{0, 0}, {1 + dx, 0}}, rng.next_double() - 0.5);
            b.add({{0, 0}, {0, 1 + dx}}, rng.next_double() - 0.5);
        }
        InteractionGenerator sum = a;
        for (const auto& sh : b.shapes) sum.shapes.push_back(sh);
        CHECK(interaction_norm(sum) <= interaction_norm(a) + interaction_norm(b) + 1e-12);
        InteractionGenerator scaled = a;
        for (auto& sh : scaled.shapes) sh.coupling *= -2.0;
        CHECK(interaction_norm(scaled) == doctest::Approx(2.0 * interaction_norm(a)));
    }
}

TEST_CASE("instantiate") {
    SUBCASE("periodic ring of 4") {
        Interaction J = instantiate(nearest_neighbor(Geometry::square_1d, 0.3), ring(4));
        CHECK(J.couplings.size() == 4);
        for (const auto& [X, v] : J.couplings) CHECK(v == doctest::Approx(0.3));
    }
    SUBCASE("free chain of 4") {
        Lattice chain({Geometry::square_1d, {4}, Boundary::free_, {}});
        Interaction J = instantiate(nearest_neighbor(Geometry::square_1d, 0.3), chain);
        CHECK(J.couplings.size() == 3);
    }
    SUBCASE("fixed boundary substitutes spins") {
        LatticeSpec spec{Geometry::square_1d, {2}, Boundary::fixed, {}};
        spec.boundary_spins[{-1, 0}] = +1;
        spec.boundary_spins[{2, 0}] = +1;
        Lattice chain(spec);
        Interaction J = instantiate(nearest_neighbor(Geometry::square_1d, 0.5), chain);
        // one interior bond plus a field of 0.5 on each end site
        CHECK(J.couplings.at({0, 1}) == doctest::Approx(0.5));
        CHECK(J.couplings.at({0}) == doctest::Approx(0.5));
        CHECK(J.couplings.at({1}) == doctest::Approx(0.5));
    }
    SUBCASE("range too large for wraparound") {
        InteractionGenerator longrange;
        longrange.add({{0, 0}, {3, 0}}, 1.0);
        CHECK_THROWS_AS(instantiate(longrange, ring(4)), config_error);
    }
}

TEST_CASE("character expansion") {
    SUBCASE("single character") {
        auto f = character_expand({1, 2}, [](Config c) {
            return double(character(c, 0b11));
        });
        CHECK(f.coeff[0b11] == doctest::Approx(1.0));
        CHECK(f.coeff[0b00] == doctest::Approx(0.0));
        CHECK(f.coeff[0b01] == doctest::Approx(0.0));
        CHECK(f.coeff[0b10] == doctest::Approx(0.0));
    }
    SUBCASE("constant") {
        auto f = character_expand({0, 1, 2}, [](Config) { return 3.0; });
        CHECK(f.coeff[0] == doctest::Approx(3.0));
        for (std::size_t A = 1; A < 8; ++A) CHECK(f.coeff[A] == doctest::Approx(0.0));
    }
    SUBCASE("exp of one spin") {
        auto f = character_expand({5}, [](Config c) { return std::exp(spin_at(c, 0)); });
        CHECK(f.coeff[0] == doctest::Approx(std::cosh(1.0)));
        CHECK(f.coeff[1] == doctest::Approx(std::sinh(1.0)));
    }
    SUBCASE("round trip is the identity") {
        SplitMix64 rng(7);
        SiteSet S{0, 1, 2, 3, 4, 5};
        std::vector<double> vals(64);
        for (auto& v : vals) v = rng.next_double() * 4 - 2;
        auto f = character_expand(S, [&](Config c) { return vals[c]; });
        for (Config c = 0; c < 64; ++c)
            CHECK(f.eval_local(c) == doctest::Approx(vals[c]).epsilon(1e-12));
    }
    SUBCASE("cap") {
        SiteSet big(21);
        for (int i = 0; i < 21; ++i) big[i] = i;
        CHECK_THROWS_AS(character_expand(big, [](Config) { return 0.0; }), cap_exceeded);
    }
}

TEST_CASE("splitmix64 reference stream") {
    // First outputs for seed 1234567, from the published reference sequence.
    SplitMix64 rng(1234567);
    CHECK(rng.next_u64() == 6457827717110365317ull);
    CHECK(rng.next_u64() == 3203168211198807973ull);
    SplitMix64 a = substream(9, 4), b = substream(9, 4);
    CHECK(a.next_u64() == b.next_u64());
}
