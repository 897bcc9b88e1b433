#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "blockrg/lattice.hpp"

using namespace blockrg;

static Lattice ring(int n) {
    return Lattice({Geometry::square_1d, {n}, Boundary::periodic, {}});
}

static Lattice torus(int w, int h) {
    return Lattice({Geometry::square_2d, {w, h}, Boundary::periodic, {}});
}

TEST_CASE("site enumeration and metric") {
    Lattice chain({Geometry::square_1d, {4}, Boundary::free_, {}});
    CHECK(chain.size() == 4);
    for (int s = 0; s < 4; ++s) CHECK(chain.index(chain.coord(s)) == s);

    Lattice t22 = torus(2, 2);
    CHECK(t22.dist(t22.index({0, 0}), t22.index({1, 1})) == doctest::Approx(std::sqrt(2.0)));

    Lattice tri({Geometry::triangular_2d, {3, 3}, Boundary::periodic, {}});
    CHECK(tri.size() == 9);
    for (int s = 0; s < 9; ++s) CHECK(tri.neighbors(s).size() == 6);
}

TEST_CASE("lattice spec validation") {
    CHECK_THROWS_AS(Lattice({Geometry::square_1d, {0}, Boundary::free_, {}}), config_error);
    CHECK_THROWS_AS(Lattice({Geometry::square_2d, {4}, Boundary::free_, {}}), config_error);
}

TEST_CASE("periodic wrap and free bounds") {
    Lattice r8 = ring(8);
    CHECK(r8.index({-1, 0}) == 7);
    CHECK(r8.dist(0, 7) == doctest::Approx(1.0));
    Lattice chain({Geometry::square_1d, {4}, Boundary::free_, {}});
    CHECK_THROWS_AS(chain.index({4, 0}), config_error);
}

TEST_CASE("bar_map") {
    Lattice t44 = torus(4, 4);
    BlockScheme scheme{2, 2, 3};
    BarLattice bar(t44, scheme);
    CHECK(bar_map({}, t44, bar).empty());
    SiteSet one_block{t44.index({0, 0}), t44.index({0, 1})};
    CHECK(bar_map(one_block, t44, bar) == BlockSet{0});
    SiteSet straddle{t44.index({1, 1}), t44.index({2, 2})};
    CHECK(bar_map(straddle, t44, bar) == BlockSet{bar.index({0, 0}), bar.index({1, 1})});
}

TEST_CASE("bar_map distributes over union") {
    Lattice t44 = torus(4, 4);
    BarLattice bar(t44, {2, 2, 3});
    SiteSet X{0, 5, 10}, Y{3, 5, 12};
    SiteSet XY = canonical({0, 5, 10, 3, 12});
    BlockSet u = bar_map(X, t44, bar);
    for (int b : bar_map(Y, t44, bar)) u.push_back(b);
    CHECK(canonical(std::move(u)) == bar_map(XY, t44, bar));
}

TEST_CASE("block types") {
    CHECK(block_type({0, 0}, 2) == 1);
    CHECK(block_type({1, 0}, 2) == 2);
    CHECK(block_type({0, 1}, 2) == 3);
    CHECK(block_type({1, 1}, 2) == 4);
    CHECK(block_type({0, 0}, 1) == 1);
    CHECK(block_type({1, 0}, 1) == 2);
    // equal class sizes on an even bar lattice
    Lattice t88 = torus(8, 8);
    BarLattice bar(t88, {2, 2, 3});
    int counts[5] = {0, 0, 0, 0, 0};
    for (int b = 0; b < bar.size(); ++b) ++counts[block_type(bar.coord(b), 2)];
    for (int t = 1; t <= 4; ++t) CHECK(counts[t] == bar.size() / 4);
}

TEST_CASE("l_distance") {
    Lattice r16 = ring(16);
    BlockScheme scheme{2, 2, 3};
    BarLattice bar(r16, scheme);
    CHECK(l_distance({0}, {1}, r16, bar) == doctest::Approx(0.0));  // same block
    CHECK(l_distance({0}, {6}, r16, bar) == doctest::Approx(3.0));
    CHECK(l_distance({0}, {14}, r16, bar) == doctest::Approx(1.0));  // wraparound
    CHECK(l_distance({0}, {6}, r16, bar) == l_distance({6}, {0}, r16, bar));
    CHECK_THROWS_AS(l_distance({}, {0}, r16, bar), config_error);
}

TEST_CASE("l_distance pseudo-metric on sampled triples") {
    Lattice t88 = torus(8, 8);
    BarLattice bar(t88, {2, 2, 3});
    SiteSet a{0, 1}, b{27, 28}, c{54, 63};
    double ab = l_distance(a, b, t88, bar), bc = l_distance(b, c, t88, bar),
           ac = l_distance(a, c, t88, bar);
    CHECK(ac <= ab + bc + 1e-12);
    CHECK(ab == doctest::Approx(l_distance(b, a, t88, bar)));
}

TEST_CASE("l_connected components") {
    Lattice r16 = ring(16);
    BarLattice bar(r16, {2, 2, 3});
    int a = 3;
    SUBCASE("single link") {
        auto comps = l_connected_components({{0, 1}}, r16, bar, a);
        CHECK(comps.size() == 1);
    }
    SUBCASE("predicate boundary") {
        // blocks 0 and 3: distance 3 = a -> connected; 0 and 4 -> distance 4.
        auto joined = l_connected_components({{0}, {6}}, r16, bar, a);
        CHECK(joined.size() == 1);
        auto split = l_connected_components({{0}, {8}}, r16, bar, a);
        CHECK(split.size() == 2);
    }
    SUBCASE("transitive chain") {
        // bar sites 0, 3, 6: 0-3 and 3-6 within a, 0-6 beyond a.
        auto comps = l_connected_components({{0}, {6}, {12}}, r16, bar, a);
        CHECK(comps.size() == 1);
    }
    SUBCASE("permutation invariance") {
        std::vector<SiteSet> links{{0}, {6}, {12}};
        std::vector<SiteSet> shuffled{{12}, {0}, {6}};
        CHECK(l_connected_components(links, r16, bar, a).size() ==
              l_connected_components(shuffled, r16, bar, a).size());
    }
}

TEST_CASE("block scheme validation") {
    Lattice r16 = ring(16);
    BlockScheme bad_b{3, 2, 3};   // b does not divide L
    BlockScheme bad_l{2, 6, 3};   // L does not divide 16
    BlockScheme good{2, 4, 3};
    CHECK_THROWS_AS(bad_b.validate(r16), config_error);
    CHECK_THROWS_AS(bad_l.validate(r16), config_error);
    CHECK_NOTHROW(good.validate(r16));
}
