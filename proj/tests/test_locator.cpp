#include <doctest.h>

#include "fixtures.hpp"
#include "treegen/locator.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace treegen;
using fixtures::ints;
using fixtures::to_ints;

TEST_CASE("inward locator reproduces the worked example") {
    auto e = encode_euler(fixtures::small_tree());
    REQUIRE(e.symbols == std::vector<std::int64_t>{3, 2, 7, 2, 4, 9, 7, 4, 9, 8});
    auto net = build_inward_locator(e, 3);
    auto acts = net.eval_all(ints({1, 3, 0}), true);
    CHECK(to_ints(net.read_wire("p'", acts)) == std::vector<std::int64_t>{1, 2, 0, 3, 4, 0, 0, 5, 0, 0});
    CHECK(to_ints(net.read_wire("p''", acts)) == std::vector<std::int64_t>{1, 2, 10, 3, 4, 10, 10, 5, 10, 10});
    auto r1 = to_ints(net.read_wire("r'", acts));
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 10; ++i) {
            std::int64_t want = (j == 0 && i == 0) ? 3 : (j == 1 && i == 3) ? 2 : 0;
            CHECK(r1[j * 10 + i] == want);
        }
    auto zero = to_ints(net.eval(ints({0, 0, 0})));
    CHECK(std::all_of(zero.begin(), zero.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("outward predicate examples") {
    auto e = encode_euler(fixtures::small_tree());
    OutwardCheckTrace tr;
    CHECK(outward_predicate(e, 4, 7, &tr));
    CHECK(tr.in_count == 1);
    CHECK(tr.out_count == 1);
    CHECK_FALSE(outward_predicate(e, 2, 7, &tr));
    CHECK(tr.before);
    CHECK(tr.labels_match);
    CHECK(tr.balanced);
    CHECK_FALSE(tr.largest);
    CHECK_FALSE(outward_predicate(e, 5, 9, &tr));
    CHECK(tr.in_count == 1);
    CHECK(tr.out_count == 2);
    CHECK_THROWS_AS(outward_predicate(e, 0, 3), PositionOutOfRange);
    CHECK_THROWS_AS(outward_predicate(e, 1, 11), PositionOutOfRange);
}

TEST_CASE("outward locator reproduces the worked example") {
    auto e = encode_euler(fixtures::small_tree());
    auto net = build_outward_locator(e, 3);
    auto acts = net.eval_all(ints({1, 3, 0}), true);
    CHECK(to_ints(net.read_wire("s", acts)) == std::vector<std::int64_t>{0, 0, 7, 0, 0, 9, 7, 0, 9, 8});
    CHECK(to_ints(net.read_wire("z", acts)) == std::vector<std::int64_t>{10, 7, 0});
    auto w = to_ints(net.read_wire("w", acts));
    std::set<std::pair<int, int>> ones;
    for (int l = 0; l < 10; ++l)
        for (int i = 0; i < 10; ++i)
            if (w[l * 10 + i] != 0) {
                CHECK(w[l * 10 + i] == 1);
                ones.insert({l + 1, i + 1});
            }
    CHECK(ones == std::set<std::pair<int, int>>{{1, 10}, {2, 3}, {4, 7}, {5, 6}, {8, 9}});
    auto z1 = to_ints(net.read_wire("z'", acts));
    CHECK(z1[0 * 10 + 9] == 8);
    CHECK(z1[1 * 10 + 6] == 7);
    int nonzero = 0;
    for (auto v : z1) nonzero += v != 0;
    CHECK(nonzero == 2);

    // v = max(delta + C (in - out), 0): 1 exactly on matching balanced pairs.
    auto v = net.read_wire("v", acts);
    Rational C(make_constants(5, 5, 3).C);
    for (int l = 1; l <= 10; ++l)
        for (int i = l + 1; i <= 10; ++i) {
            OutwardCheckTrace t;
            outward_predicate(e, l, i, &t);
            Rational want = Rational(t.labels_match ? 1 : 0) + C * Rational(t.in_count - t.out_count);
            if (want.sign() < 0) want = 0;
            CHECK(v[(l - 1) * 10 + (i - 1)] == want);
            CHECK((want == Rational(1)) == (t.labels_match && t.balanced));
        }
}

TEST_CASE("locators agree with direct traversal on random trees") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 1 + static_cast<int>(rng() % 8);
        int m = 1 + static_cast<int>(rng() % 4);
        auto tree = random_tree(n, m, rng);
        auto e = encode_euler(tree);
        auto pos = edge_positions(tree);
        const int L = 2 * n;
        for (bool fold : {false, true}) {
            auto net = build_outward_locator(e, 1, {fold, false});
            FastEvaluator fast(net);
            for (int x = 0; x <= n; ++x) {
                auto acts = net.eval_all(ints({x}), true);
                auto r1 = to_ints(net.read_wire("r'", acts));
                auto out = to_ints(fast.eval(ints({x})));
                REQUIRE(out.size() == static_cast<std::size_t>(1 + L));
                for (int i = 1; i <= L; ++i) {
                    bool at_in = x != 0 && pos.inward[x] == i;
                    bool at_out = x != 0 && pos.outward[x] == i;
                    CHECK(r1[i - 1] == (at_in ? tree.label(x) : 0));
                    CHECK(out[i] == (at_out ? tree.label(x) + m : 0));
                }
                CHECK(out[0] == (x == 0 ? 0 : pos.outward[x]));
            }
            // the pairing wire matches the predicate everywhere
            auto acts = net.eval_all(ints({0}));
            auto w = to_ints(net.read_wire("w", acts));
            for (int l = 1; l <= L; ++l) {
                int matches = 0;
                for (int i = 1; i <= L; ++i) {
                    bool pred = outward_predicate(e, l, i);
                    CHECK(w[(l - 1) * L + (i - 1)] == (pred ? 1 : 0));
                    matches += pred;
                }
                CHECK(matches == (e.symbols[l - 1] <= m ? 1 : 0));
            }
        }
    }
}
