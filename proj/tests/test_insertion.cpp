#include <doctest.h>

#include "fixtures.hpp"
#include "treegen/insertion.hpp"

#include <random>

using namespace treegen;
using fixtures::ints;
using fixtures::to_ints;

using Sym = std::vector<std::int64_t>;

TEST_CASE("insertion network on the worked example") {
    auto e = encode_euler(fixtures::small_tree());
    auto net = build_ti(e, 4);
    auto acts = net.eval_all(ints({1, 0, 3, 0, 2, 4, 1, 1, 3, 2, 5, 1, 4, 1, 3, 5}), true);
    CHECK(to_ints(acts.back()) == Sym{1, 6, 5, 3, 2, 7, 4, 2, 4, 9, 3, 8, 7, 4, 9, 9, 8, 10});
    auto wire = [&](const char* name) { return to_ints(net.read_wire(name, acts)); };
    CHECK(wire("q_j") == Sym{1, 0, 4, 0});
    CHECK(wire("b") == Sym{11, 10, 3, 0, 7, 6, 0, 0, 9, 0, 0});
    auto a = wire("a");
    CHECK(a[0] == 1);
    CHECK(a[1] == 3);
    CHECK(a[4] == 1);
    CHECK(wire("D") == Sym{3, 1, 1, 1});
    CHECK(wire("Q^1") == Sym{2, 0, 1, 1});
    CHECK(wire("P^1") == Sym{3, 0, 0, 1});
    CHECK(wire("P^6") == Sym{3, 0, 0, 1});
    CHECK(wire("Q^3") == Sym{2, 0, 2, 1});
    // F on halves: F_{0,1} = 1/2, F_{0,10} = 1, F_{1,4} = 3/2
    auto F = net.read_wire("F", acts);
    CHECK(F[0 * 10 + 0] == Rational(1, 2));
    CHECK(F[0 * 10 + 9] == Rational(1));
    CHECK(F[1 * 10 + 3] == Rational(3, 2));
    auto G = wire("G");    // [k-1][l]
    auto G1 = wire("G'");  // [k][l]
    auto G2 = wire("G''"); // [k-1][l]
    const int W = 11;
    CHECK(G[0 * W + 0] == 1);
    CHECK(G[0 * W + 1] == 2);
    CHECK(G[1 * W + 1] == 4);
    CHECK(G[2 * W + 1] == 8);
    CHECK(G[0 * W + 4] == 5);
    CHECK(G1[1 * W + 0] == 10);
    CHECK(G1[3 * W + 1] == 9);
    CHECK(G1[1 * W + 4] == 6);
    CHECK(G2[1 * W + 0] == 11);
    CHECK(G2[3 * W + 1] == 10);
    CHECK(G2[1 * W + 4] == 7);
    CHECK(wire("L") == Sym{4, 1, 7, 1});
    CHECK(wire("L'") == Sym{9, 0, 4, 10});
    CHECK(wire("L''") == Sym{10, 1, 7, 11});
    CHECK(wire("R") == Sym{2, 0, 3, 1});
    CHECK(wire("R'") == Sym{1, 1, 4, 7});
    CHECK(wire("R''") == Sym{1, 11, 10, 7});
    CHECK(wire("x'^4") == Sym{1, 5, 4, 3});
    CHECK(wire("M'") == Sym{4, 5, 6, 8, 9, 10, 13, 14, 15, 17});
    CHECK(wire("N'") == Sym{0, 0, 0, 3, 2, 7, 0, 2, 4, 9, 0, 0, 7, 4, 9, 0, 8, 0});
    CHECK(wire("S") == Sym{1, 3, 7, 11});
    CHECK(wire("S'") == Sym{2, 18, 16, 12});
    CHECK(wire("V") == Sym{1, 3, 7, 11, 2, 18, 16, 12});
    CHECK(wire("V'") == Sym{1, 5, 4, 3, 6, 10, 9, 8});
    CHECK(wire("W") == Sym{0, 2, 3, 4, 1, 7, 6, 5});
    CHECK(wire("W'") == Sym{1, 2, 3, 7, 11, 12, 16, 18});
    CHECK(wire("W''") == Sym{1, 6, 5, 4, 3, 8, 9, 10});
    CHECK(wire("Z'") == Sym{1, 6, 5, 0, 0, 0, 4, 0, 0, 0, 3, 8, 0, 0, 0, 9, 0, 10});
}

TEST_CASE("bound refinement examples") {
    CHECK(refine_bounds(1, 4, 2) == std::pair{0, 0});
    CHECK(refine_bounds(1, 1, 5) == std::pair{2, 0});
    CHECK(refine_bounds(3, 2, 3) == std::pair{2, 3});
    // never exceeds the child count
    for (int D = 0; D <= 4; ++D)
        for (int lo = 0; lo <= 6; ++lo)
            for (int hi = 0; hi <= 6; ++hi) {
                auto [a, b] = refine_bounds(D, lo, hi);
                CHECK(b <= D);
                CHECK(a <= D + 1);
                if (b != 0) CHECK((1 <= a && a <= b));
            }
}

TEST_CASE("insertion reference") {
    auto t = fixtures::small_tree();
    auto u = apply_insert_reference(t, insert_ops_from_input({1, 0, 3, 0, 2, 4, 1, 1, 3, 2, 5, 1, 4, 1, 3, 5}));
    CHECK(encode_euler(u).symbols == Sym{1, 6, 5, 3, 2, 7, 4, 2, 4, 9, 3, 8, 7, 4, 9, 9, 8, 10});
    // leaf under the root of a one-edge tree goes first
    LabeledTree one({0, 2}, {-1, 0}, 3);
    CHECK(encode_euler(apply_insert_reference(one, {{0, 0, 0, 1}})).symbols == Sym{1, 4, 2, 5});
    // zero-adoption inserts add a leaf
    auto leafy = apply_insert_reference(t, {{3, 0, 0, 2}});
    CHECK(leafy.n() == t.n() + 1);
}

namespace {

std::vector<Rational> as_rats(const std::vector<int>& x) {
    std::vector<Rational> v;
    for (int a : x) v.emplace_back(a);
    return v;
}

}  // namespace

TEST_CASE("insertion network agrees with the reference on random trees") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 1 + static_cast<int>(rng() % 6);
        int m = 1 + static_cast<int>(rng() % 3);
        int d = 1 + static_cast<int>(rng() % 2);
        auto tree = random_tree(n, m, rng);
        auto e = encode_euler(tree);
        auto net = build_ti(e, d);
        FastEvaluator fast(net);
        for (int sample = 0; sample < 300; ++sample) {
            std::vector<int> x(4 * d);
            for (int j = 0; j < 3 * d; ++j) x[j] = static_cast<int>(rng() % (n + 1));
            for (int j = 3 * d; j < 4 * d; ++j) x[j] = 1 + static_cast<int>(rng() % m);
            auto got = to_ints(fast.eval(as_rats(x)));
            auto want = insert_reference_symbols(e.symbols, m, insert_ops_from_input(x));
            REQUIRE(got == want);
            CHECK(validate_euler(got, m).ok);
        }
    }
}
