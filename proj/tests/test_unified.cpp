#include <doctest.h>

#include "fixtures.hpp"
#include "treegen/unified.hpp"

#include <random>

using namespace treegen;
using fixtures::to_ints;

using Sym = std::vector<std::int64_t>;

namespace {

std::vector<Rational> hundredths(const std::vector<int>& xs) {
    std::vector<Rational> v;
    for (int x : xs) v.emplace_back(x, 100);
    return v;
}

EulerString example_tree() { return encode_euler(decode_euler({3, 2, 12, 2, 4, 14, 12, 4, 14, 13}, 10)); }

const std::vector<int> kExampleInput = {30, 0, 38, 0, 46, 55, 0, 60, 88, 66, 75, 0, 55, 87, 3, 2, 45, 9, 0, 70, 50};

Sym trim(const Sym& y, std::int64_t B) {
    Sym out;
    for (auto v : y)
        if (v != B) out.push_back(v);
    return out;
}

}  // namespace

TEST_CASE("unified network on the worked example") {
    auto e = example_tree();
    const int d = 3;
    auto net = build_te(e, d);
    const std::int64_t B = net.meta()["B"].get<std::int64_t>();
    CHECK(B == make_constants(5, 10, 3).B);
    auto acts = net.eval_all(hundredths(kExampleInput), true);
    auto wire = [&](const char* name) { return to_ints(net.read_wire(name, acts)); };

    auto P1 = wire("P'");
    Sym pos_expected = {2, 0, 2, 0, 3, 3};
    for (int j = 0; j < 6; ++j) CHECK(P1[j] == pos_expected[j]);
    CHECK(Sym(P1.begin() + 6, P1.begin() + 9) == Sym{1, 6, 9});
    CHECK(Sym(P1.begin() + 9, P1.begin() + 12) == Sym{4, 4, 0});
    CHECK(Sym(P1.begin() + 18, P1.end()) == Sym{1, 7, 5});
    auto R = wire("R");
    CHECK(R[0] == 1);
    CHECK(R[4] == 1);
    CHECK(Sym(R.begin() + 9, R.begin() + 12) == Sym{3, 2, 1});
    auto R1 = wire("R'");
    CHECK(Sym(R1.begin() + 9, R1.begin() + 12) == Sym{1, 1, 0});
    auto S = wire("S");
    CHECK(S[9] == B);
    CHECK(S[10] == B);

    CHECK(wire("x'") == Sym{2, 0, 2, 0, 3, 3, 1, 6, 9, B, B, 0, B, B, 1, B, B, 1, B, B, 5});
    CHECK(wire("td/y") == Sym{3, 2, 4, 14, 12, 4, 14, 13, B, B});
    CHECK(wire("ts/u") == Sym{3, 2, 6, 16, 12, 4, 14, 13, B, B});
    auto y = to_ints(acts.back());
    CHECK(y == Sym{B, B, B, B, 5, 3, 2, 6, 16, 12, 4, 14, 13, 15, B, B});
    CHECK(trim(y, B) == Sym{5, 3, 2, 6, 16, 12, 4, 14, 13, 15});
    CHECK(te_reference(e, d, hundredths(kExampleInput)) == y);
}

TEST_CASE("discretization") {
    DiscretizationConfig cfg{5, 10, Rational(1, 100)};
    CHECK(discretize(Rational(0), SlotKind::Position, cfg) == 0);
    CHECK(discretize(Rational(1, 100), SlotKind::Position, cfg) == 1);
    CHECK(discretize(Rational(20, 100), SlotKind::Position, cfg) == 1);
    CHECK(discretize(Rational(21, 100), SlotKind::Position, cfg) == 2);
    CHECK(discretize(Rational(99, 100), SlotKind::Position, cfg) == 5);
    CHECK(discretize(Rational(0), SlotKind::Value, cfg) == 1);
    CHECK(discretize(Rational(10, 100), SlotKind::Value, cfg) == 1);
    CHECK(discretize(Rational(11, 100), SlotKind::Value, cfg) == 2);
    CHECK(discretize(Rational(70, 100), SlotKind::Value, cfg) == 7);
    CHECK_THROWS_AS(discretize(Rational(1, 300), SlotKind::Value, cfg), InputNotOnGrid);
    CHECK_THROWS_AS(check_on_grid({Rational(1)}, cfg.delta), InputNotOnGrid);
    CHECK_THROWS_AS(check_on_grid({Rational(-1, 100)}, cfg.delta), InputNotOnGrid);
    CHECK_NOTHROW(check_on_grid({Rational(99, 100)}, cfg.delta));
}

TEST_CASE("budget filter") {
    const std::int64_t B = 1000;
    // two effective deletions and substitutions leave one insertion
    auto xs = budget_filter({2, 0, 2, 0, 3, 3, 1, 6, 9, 4, 4, 0, 3, 5, 1, 1, 3, 1, 1, 7, 5}, 3, B);
    CHECK(xs == Sym{2, 0, 2, 0, 3, 3, 1, 6, 9, B, B, 0, B, B, 1, B, B, 1, B, B, 5});
    // no edits at all keeps every insertion slot
    auto none = budget_filter({0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0, 2, 2}, 2, B);
    CHECK(none == Sym{0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0, 2, 2});
    // a full deletion budget masks the remaining substitution and all insertions
    auto full = budget_filter({1, 2, 1, 1, 3, 3, 1, 1, 1, 1, 1, 1, 1, 1}, 2, B);
    CHECK(full == Sym{1, 2, B, B, 3, 3, B, B, B, B, B, B, B, B});
    CHECK_THROWS_AS(budget_filter({1, 2, 3}, 2, B), std::invalid_argument);
    // the number of surviving operations never exceeds d
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        int d = 1 + static_cast<int>(rng() % 4);
        std::vector<int> v(7 * d);
        for (auto& a : v) a = static_cast<int>(rng() % 4);
        auto f = budget_filter(v, d, B);
        int ops = 0;
        for (int seg = 0; seg < 2; ++seg) {
            std::set<std::int64_t> seen;
            for (int j = seg * d; j < (seg + 1) * d; ++j)
                if (f[j] != 0 && f[j] != B && seen.insert(f[j]).second) ++ops;
        }
        for (int j = 3 * d; j < 4 * d; ++j) ops += f[j] != B;
        CHECK(ops <= d);
    }
}

TEST_CASE("unified network agrees with the pipeline reference on random inputs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 6; ++trial) {
        int n = 1 + static_cast<int>(rng() % 4);
        int m = 1 + static_cast<int>(rng() % 3);
        int d = 1 + static_cast<int>(rng() % 2);
        auto e = encode_euler(random_tree(n, m, rng));
        auto net = build_te(e, d);
        const std::int64_t B = net.meta()["B"].get<std::int64_t>();
        FastEvaluator fast(net);
        for (int sample = 0; sample < 150; ++sample) {
            std::vector<int> x(7 * d);
            for (auto& a : x) a = rng() % 3 == 0 ? 0 : static_cast<int>(rng() % 100);
            auto xr = hundredths(x);
            auto got = to_ints(fast.eval(xr));
            REQUIRE(got == te_reference(e, d, xr));
            CHECK(validate_euler(trim(got, B), m).ok);
        }
    }
}

TEST_CASE("unified network rejects inputs off the grid") {
    auto e = example_tree();
    CHECK_THROWS_AS(te_reference(e, 1, {Rational(1, 3), 0, 0, 0, 0, 0, 0}), InputNotOnGrid);
    CHECK_THROWS_AS(build_te(e, 1, Rational(1, 2)), BuildError);
}
