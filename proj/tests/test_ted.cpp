#include <doctest.h>

#include "fixtures.hpp"
#include "treegen/ted.hpp"

#include <random>

using namespace treegen;

namespace {

std::vector<int> label_range(int m) {
    std::vector<int> v;
    for (int l = 1; l <= m; ++l) v.push_back(l);
    return v;
}

// Layers of the general ball: layer k holds trees needing exactly k operations.
std::vector<SymbolSet> layers(const LabeledTree& t, int depth) {
    std::vector<SymbolSet> out;
    BallOptions opt{BallMode::Exactly, BallSemantics::General, 0};
    for (int k = 0; k <= depth; ++k) out.push_back(edit_ball(t, k, label_range(t.m()), {true, true, true}, opt));
    return out;
}

EditOp random_op(const LabeledTree& t, std::mt19937_64& rng) {
    int kind = static_cast<int>(rng() % 3);
    int m = t.m();
    if (t.n() == 0) kind = 2;
    if (kind == 0) return {EditKind::Delete, 1 + static_cast<int>(rng() % t.n())};
    if (kind == 1) return {EditKind::Substitute, 1 + static_cast<int>(rng() % t.n()), 1 + static_cast<int>(rng() % m)};
    int p = static_cast<int>(rng() % (t.n() + 1));
    int k = static_cast<int>(t.children(p).size());
    int lo = static_cast<int>(rng() % (k + 1));
    int hi = lo + static_cast<int>(rng() % (k - lo + 1));
    return {EditKind::Insert, p, 1 + static_cast<int>(rng() % m), lo, hi};
}

}  // namespace

TEST_CASE("ted basics") {
    auto t = fixtures::small_tree();
    CHECK(ted(t, t) == 0);
    // a vertex labeled 5 under a vertex labeled 7 is removed; its children 1 and 6 move up
    LabeledTree T({0, 7, 5, 1, 6, 2}, {-1, 0, 1, 2, 2, 0}, 7);
    LabeledTree U({0, 7, 1, 6, 2}, {-1, 0, 1, 1, 0}, 7);
    CHECK(ted(T, U) == 1);
    CHECK(ted(U, T) == 1);
    LabeledTree root;
    CHECK(ted(root.with_alphabet(5), t) == t.n());
    CHECK(ted(t, apply_edit(t, {EditKind::Substitute, 2, 5})) == 1);
    CHECK(ted(t, apply_edit(t, {EditKind::Insert, 1, 1, 0, 2})) == 1);
}

TEST_CASE("apply_edit") {
    auto t = fixtures::small_tree();
    auto u = apply_edit(t, {EditKind::Insert, 1, 1, 0, 2});
    CHECK(encode_euler(u).symbols == std::vector<std::int64_t>{3, 1, 2, 7, 2, 4, 9, 7, 6, 4, 9, 8});
    auto leaf = apply_edit(t, {EditKind::Insert, 0, 2, 1, 1});
    CHECK(encode_euler(leaf).symbols == std::vector<std::int64_t>{3, 2, 7, 2, 4, 9, 7, 4, 9, 8, 2, 7});
    CHECK_THROWS_AS(apply_edit(t, {EditKind::Delete, 0}), TreeError);
    CHECK_THROWS_AS(apply_edit(t, {EditKind::Insert, 1, 1, 2, 9}), TreeError);
    CHECK(apply_script(t, {{EditKind::Delete, 5}, {EditKind::Delete, 1}}).n() == 3);
}

TEST_CASE("ted equals exhaustive script search") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 1 + static_cast<int>(rng() % 5);
        int m = 1 + static_cast<int>(rng() % 2);
        auto a = random_tree(n, m, rng);
        auto b = a;
        int steps = 1 + static_cast<int>(rng() % 4);
        for (int s = 0; s < steps; ++s) b = apply_edit(b, random_op(b, rng));
        // operations are invertible, so meeting in the middle finds the exact distance up to 4
        auto la = layers(a, 2);
        auto lb = layers(b, 2);
        auto target = encode_euler(b).symbols;
        int best = 99;
        for (int i = 0; i <= 2; ++i)
            for (int j = 0; j <= 2; ++j)
                for (const auto& s : la[i])
                    if (lb[j].count(s)) best = std::min(best, i + j);
        CHECK(best <= steps);
        CHECK(ted(a, b) == best);
    }
}

TEST_CASE("ted is a metric") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        int m = 1 + static_cast<int>(rng() % 3);
        auto a = random_tree(static_cast<int>(rng() % 7), m, rng);
        auto b = random_tree(static_cast<int>(rng() % 7), m, rng);
        auto c = random_tree(static_cast<int>(rng() % 7), m, rng);
        int ab = ted(a, b);
        CHECK((ab == 0) == (encode_euler(a) == encode_euler(b)));
        CHECK(ab == ted(b, a));
        CHECK(ted(a, c) <= ab + ted(b, c));
        CHECK(ab >= std::abs(a.n() - b.n()));
    }
}

TEST_CASE("edit ball examples") {
    auto t = fixtures::small_tree();
    auto labels = label_range(5);
    CHECK(edit_ball(t, 1, labels, {.del = true}, {BallMode::Exactly}).size() == 5);
    CHECK(edit_ball(t, 1, labels, {.del = true}).size() == 6);
    CHECK(edit_ball(t, 1, labels, {.sub = true}, {BallMode::Exactly}).size() == 20);
    CHECK(edit_ball(t, 1, labels, {.sub = true}).size() == 21);
    CHECK(edit_ball(t, 0, labels, {true, true, true}) == SymbolSet{encode_euler(t).symbols});
    // staged and general agree on a single operation
    for (BallOps ops : {BallOps{true, false, false}, BallOps{false, true, false}, BallOps{false, false, true}}) {
        auto staged = edit_ball(t, 1, labels, ops, {BallMode::Exactly, BallSemantics::Staged});
        auto general = edit_ball(t, 1, labels, ops, {BallMode::Exactly, BallSemantics::General});
        CHECK(staged == general);
    }
    CHECK_THROWS_AS(edit_ball(t, 6, labels, {true, true, true}), BudgetTooLarge);
    CHECK_NOTHROW(edit_ball(LabeledTree({0, 1}, {-1, 0}, 1), 3, {1}, {.del = true}, {.cap = 0}));
}

TEST_CASE("edit ball properties") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 1 + static_cast<int>(rng() % 4);
        int m = 1 + static_cast<int>(rng() % 2);
        auto t = random_tree(n, m, rng);
        auto labels = label_range(m);
        BallOps all{true, true, true};
        for (auto sem : {BallSemantics::Staged, BallSemantics::General}) {
            auto b1 = edit_ball(t, 1, labels, all, {BallMode::AtMost, sem});
            auto b2 = edit_ball(t, 2, labels, all, {BallMode::AtMost, sem});
            CHECK(std::includes(b2.begin(), b2.end(), b1.begin(), b1.end()));
            for (const auto& s : b2) CHECK(ted(t, decode_euler(s, m)) <= 2);
        }
        auto staged = edit_ball(t, 2, labels, all, {BallMode::AtMost, BallSemantics::Staged});
        auto general = edit_ball(t, 2, labels, all, {BallMode::AtMost, BallSemantics::General});
        CHECK(std::includes(general.begin(), general.end(), staged.begin(), staged.end()));
        auto exact = edit_ball(t, 2, labels, {.ins = true}, {BallMode::Exactly, BallSemantics::Staged});
        for (const auto& s : exact) CHECK(ted(t, decode_euler(s, m)) == 2);
        auto gexact = edit_ball(t, 2, labels, all, {BallMode::Exactly, BallSemantics::General});
        for (const auto& s : gexact) CHECK(ted(t, decode_euler(s, m)) == 2);
    }
}
