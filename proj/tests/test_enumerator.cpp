#include <doctest.h>

#include "fixtures.hpp"
#include "treegen/enumerator.hpp"

#include <numeric>
#include <random>

using namespace treegen;

namespace {

SweepPlan plan_for(NetKind kind, const LabeledTree& t, int d) {
    SweepPlan p;
    p.kind = kind;
    p.tree = t;
    p.d = d;
    return p;
}

SymbolSet as_set(const EnumerationReport& r) { return SymbolSet(r.outputs.begin(), r.outputs.end()); }

}  // namespace

TEST_CASE("deletion sweep matches the deletion ball") {
    auto t = fixtures::small_tree();
    auto p = plan_for(NetKind::TD, t, 1);
    CHECK(sweep_size(p) == 6);
    auto r = sweep(p);
    CHECK(r.count() == 6);
    CHECK(r.invalid == 0);
    CHECK(r.distances == std::map<int, long long>{{0, 1}, {1, 5}});
    CHECK(compare_with_oracle(r, oracle_ball(NetKind::TD, t, 1, {})).exact());
    // a truncated report misses something
    auto cut = r;
    cut.outputs.pop_back();
    CHECK(compare_with_oracle(cut, oracle_ball(NetKind::TD, t, 1, {})).missing.size() == 1);
}

TEST_CASE("substitution sweep matches the substitution ball") {
    auto t = fixtures::small_tree();
    auto p = plan_for(NetKind::TS, t, 1);
    auto r = sweep(p);
    CHECK(r.count() == 21);
    CHECK(compare_with_oracle(r, oracle_ball(NetKind::TS, t, 1, {})).exact());
    p.strategy = Strategy::Compositional;
    CHECK(sweep_size(p) < 36);
    CHECK(as_set(sweep(p)) == as_set(r));
}

TEST_CASE("zero budget gives the tree itself") {
    auto t = fixtures::small_tree();
    for (auto k : {NetKind::TS, NetKind::TD, NetKind::TI, NetKind::TE}) {
        auto r = sweep(plan_for(k, t, 0));
        CHECK(r.outputs == std::vector<std::vector<std::int64_t>>{encode_euler(t).symbols});
    }
}

TEST_CASE("insertion sweep matches the staged insertion ball") {
    auto t = fixtures::small_tree();
    auto r = sweep(plan_for(NetKind::TI, t, 1));
    CHECK(r.invalid == 0);
    CHECK(compare_with_oracle(r, oracle_ball(NetKind::TI, t, 1, {})).exact());
    CHECK(r.distances.size() == 1);
    CHECK(r.distances.begin()->first == 1);
    // pinned label
    auto p = plan_for(NetKind::TI, t, 1);
    p.labels = {2};
    auto pinned = sweep(p);
    CHECK(compare_with_oracle(pinned, oracle_ball(NetKind::TI, t, 1, {2})).exact());
}

TEST_CASE("small random trees: sweeps equal staged balls") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        int n = 1 + static_cast<int>(rng() % 3);
        int m = 1 + static_cast<int>(rng() % 2);
        auto t = random_tree(n, m, rng);
        for (auto k : {NetKind::TS, NetKind::TD, NetKind::TI}) {
            auto p = plan_for(k, t, 2);
            p.check_reference = true;
            auto r = sweep(p);
            CHECK(r.invalid == 0);
            CHECK(r.reference_mismatches == 0);
            CHECK(compare_with_oracle(r, oracle_ball(k, t, 2, {})).exact());
        }
    }
}

TEST_CASE("unified sweeps") {
    LabeledTree t({0, 1, 2, 1}, {-1, 0, 1, 0}, 2);
    auto p = plan_for(NetKind::TE, t, 1);
    p.check_reference = true;
    auto full = sweep(p);
    p.strategy = Strategy::Compositional;
    auto comp = sweep(p);
    CHECK(sweep_size(p) < full.sweep_size);
    CHECK(full.invalid == 0);
    CHECK(comp.invalid == 0);
    CHECK(full.reference_mismatches == 0);
    CHECK(comp.reference_mismatches == 0);
    CHECK(as_set(full) == as_set(comp));
    for (auto [k, c] : comp.distances) CHECK(k <= 1);
    auto ball = oracle_ball(NetKind::TE, t, 1, {});
    CHECK(compare_with_oracle(comp, ball).extra.empty());
    // full sweeps of larger unified networks hit the guard
    auto big = plan_for(NetKind::TE, fixtures::small_tree(), 2);
    big.cap = 1'000'000;
    CHECK_THROWS_AS(sweep(big), SweepTooLarge);
}

TEST_CASE("class representatives") {
    const Rational step(1, 100);
    CHECK(class_representative(0, 5, false, step) == Rational(0));
    CHECK(class_representative(2, 5, false, step) == Rational(40, 100));
    CHECK(class_representative(5, 5, false, step) == Rational(99, 100));
    CHECK(class_representative(1, 3, true, step) == Rational(33, 100));
    CHECK(class_representative(3, 3, true, step) == Rational(99, 100));
    CHECK_FALSE(class_representative(3, 3, false, Rational(1, 3)).has_value());
    DiscretizationConfig cfg{7, 3, step};
    for (int i = 0; i <= 7; ++i) CHECK(discretize(*class_representative(i, 7, false, step), SlotKind::Position, cfg) == i);
}

TEST_CASE("reports are deterministic and round-trip") {
    auto t = fixtures::small_tree();
    auto p = plan_for(NetKind::TS, t, 2);
    auto a = sweep(p);
    p.jobs = 3;
    auto b = sweep(p);
    a.wall_time = b.wall_time = 0;
    CHECK(to_json(a).dump() == to_json(b).dump());
    auto back = report_from_json(to_json(a));
    CHECK(to_json(back).dump() == to_json(a).dump());
    long long sum = 0;
    for (auto [k, c] : a.distances) sum += c;
    CHECK(sum == a.count());
    CHECK(format_report(a).find("count       " + std::to_string(a.count())) != std::string::npos);
}

TEST_CASE("stats table") {
    std::mt19937_64 rng(2);
    std::vector<NamedStats> rows;
    for (int i = 0; i < 2; ++i) {
        auto e = encode_euler(random_tree(4 + i * 3, 3, rng));
        auto net = build_ti(e, 2);
        auto s = net.stats();
        CHECK(static_cast<int>(s.widths.size()) == s.depth);
        CHECK(std::accumulate(s.widths.begin(), s.widths.end(), 0LL) == s.total);
        rows.push_back({"T" + std::to_string(i + 1), NetKind::TI, s});
    }
    auto table = stats_table(rows);
    CHECK(table.constant_depth);
    rows.push_back({"odd", NetKind::TI, NetworkStats{rows[0].stats.depth + 1}});
    CHECK_FALSE(stats_table(rows).constant_depth);
}
