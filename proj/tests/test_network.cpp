#include <doctest.h>

#include "treegen/circuit.hpp"
#include "treegen/network.hpp"

using namespace treegen;

namespace {

std::vector<Rational> R(std::initializer_list<long long> xs) {
    std::vector<Rational> v;
    for (auto x : xs) v.emplace_back(x);
    return v;
}

ReluNetwork two_input(Rational lo, Rational hi, Expr (*g)(Circuit&, const Expr&, const Expr&),
                      BuildOptions opts = {}) {
    Circuit c(opts, 1000);
    auto a = c.input(lo, hi);
    auto b = c.input(lo, hi);
    return c.compile({g(c, a, b)});
}

Expr delta1(Circuit& c, const Expr& a, const Expr& b) { return delta(c, a, b); }
Expr max2(Circuit& c, const Expr& a, const Expr& b) { return max_of(c, a, b); }

}  // namespace

TEST_CASE("identity layer") {
    auto id = passthrough(3);
    CHECK(id.eval(R({1, 2, 3})) == R({1, 2, 3}));
    CHECK(id.depth() == 0);
    auto deep = passthrough(3, 2);
    CHECK(deep.depth() == 2);
    CHECK(deep.eval(R({-1, 2, 0})) == R({-1, 2, 0}));
    CHECK_THROWS_AS(id.eval(R({1, 2})), WidthMismatch);
}

TEST_CASE("max gadget") {
    auto net = two_input(-100, 100, max2);
    CHECK(net.eval(R({3, 5})) == R({5}));
    CHECK(net.eval(R({5, 3})) == R({5}));
    for (int x = -20; x <= 20; x += 3) CHECK(net.eval(R({x, x})) == R({x}));
    CHECK(net.eval({Rational(-7, 3), Rational(1, 2)}) == std::vector<Rational>{Rational(1, 2)});
}

TEST_CASE("delta gadget agrees with direct comparison") {
    for (bool fold : {false, true}) {
        auto net = two_input(-50, 50, delta1, {fold, false});
        FastEvaluator fast(net);
        CHECK(net.eval(R({4, 4})) == R({1}));
        CHECK(net.eval(R({4, 5})) == R({0}));
        for (int a = -50; a <= 50; ++a)
            for (int b = -50; b <= 50; ++b) {
                auto v = fast.eval(R({a, b}));
                REQUIRE(v[0] == Rational(a == b ? 1 : 0));
            }
    }
}

TEST_CASE("heaviside, thresholds and intervals") {
    Circuit c({}, 1000);
    auto x = c.input(-60, 60);
    auto h = heaviside(c, x);
    auto ge = nonneg(c, x);
    auto in = interval(c, x, 2, 5);
    auto half = interval(c, x, 2, 5, 1, true);
    auto net = c.compile({h, ge, in, half});
    for (int v = -50; v <= 50; ++v) {
        auto out = net.eval(R({v}));
        CHECK(out[0] == Rational(v >= 1));
        CHECK(out[1] == Rational(v >= 0));
        CHECK(out[2] == Rational(2 <= v && v <= 5));
        CHECK(out[3] == Rational(2 < v && v <= 5));
    }
}

TEST_CASE("intervals on a fine grid with off-grid thresholds") {
    Rational g(1, 100);
    Circuit c({}, 1000);
    auto x = c.input(0, 1);
    // (1/3, 2/3] and [0, 1/7]
    auto a = interval(c, x, Rational(1, 3), Rational(2, 3), g, true);
    auto b = interval(c, x, 0, Rational(1, 7), g);
    auto net = c.compile({a, b});
    for (int k = 0; k < 100; ++k) {
        Rational v(k, 100);
        auto out = net.eval({v});
        CHECK(out[0] == Rational(Rational(1, 3) < v && v <= Rational(2, 3)));
        CHECK(out[1] == Rational(v <= Rational(1, 7)));
    }
    // left-open with on-grid end point excludes it
    Circuit c2({}, 1000);
    auto y = c2.input(0, 1);
    auto net2 = c2.compile({interval(c2, y, Rational(1, 5), Rational(2, 5), g, true)});
    CHECK(net2.eval({Rational(1, 5)})[0] == Rational(0));
    CHECK(net2.eval({Rational(21, 100)})[0] == Rational(1));
    CHECK(net2.eval({Rational(2, 5)})[0] == Rational(1));
}

TEST_CASE("gated value equals the product on its domain") {
    Rational C = 1000;
    Circuit c({}, C);
    auto t = c.input(0, 136);
    auto q = c.input(0, 1);
    auto net = c.compile({keep_if(c, t, q)});
    CHECK(net.eval(R({9, 1})) == R({9}));
    CHECK(net.eval(R({9, 0})) == R({0}));
    for (int tv = 0; tv <= 136; ++tv)
        for (int qv = 0; qv <= 1; ++qv) REQUIRE(net.eval(R({tv, qv})) == R({tv * qv}));
    Circuit bad({}, 100);
    auto big = bad.input(0, 60);
    auto cond = bad.input(0, 1);
    CHECK_THROWS_AS(keep_if(bad, big, cond), BuildError);
}

TEST_CASE("logic gates") {
    Circuit c({}, 100);
    auto u = c.input(0, 1);
    auto v = c.input(0, 1);
    auto w = c.input(0, 1);
    auto net = c.compile({logical_and(c, {u, v}), logical_or(c, u, v), logical_and(c, {u, v, w})});
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int d = 0; d < 2; ++d) CHECK(net.eval(R({a, b, d})) == R({a & b, a | b, a & b & d}));
}

TEST_CASE("compile carries values across levels") {
    Circuit c({}, 100);
    auto x = c.input(-5, 5);
    auto y = c.relu(c.relu(c.relu(x)));  // three levels deep
    auto net = c.compile({x + y, x});
    CHECK(net.depth() == 3);
    CHECK(net.eval(R({-3})) == R({-3, -3}));
    CHECK(net.eval(R({4})) == R({8, 4}));
    auto s = net.stats();
    CHECK(s.widths.size() == 3);
    CHECK(s.total == s.widths[0] + s.widths[1] + s.widths[2]);
    for (int w : s.widths) CHECK(w > 0);
}

TEST_CASE("trace reads intermediate values") {
    Circuit c({}, 100);
    auto a = c.input(0, 10);
    auto b = c.input(0, 10);
    auto d = delta(c, a, b);
    c.trace("d", std::vector<Expr>{d, a - b, Expr(7)});
    auto net = c.compile({d});
    auto acts = net.eval_all(R({3, 3}), true);
    CHECK(net.read_wire("d", acts) == R({1, 0, 7}));
    acts = net.eval_all(R({3, 5}));
    CHECK(net.read_wire("d", acts) == R({0, -2, 7}));
    CHECK_THROWS_AS(net.eval_all({Rational(1, 2), Rational(0)}, true), ContractViolation);
    CHECK_THROWS_AS(c.trace("d", std::vector<Expr>{d}), BuildError);
}

TEST_CASE("compose and parallel preserve semantics") {
    auto dnet = two_input(-20, 20, delta1);
    auto mnet = two_input(-20, 20, max2);
    // delta(max(a,b), c) as a composition: inner = (max(a,b), c)
    Circuit inner({}, 100);
    auto a = inner.input(-20, 20);
    auto b = inner.input(-20, 20);
    auto cc = inner.input(-20, 20);
    auto inet = inner.compile({max_of(inner, a, b), cc});
    auto comp = compose(dnet, inet);
    CHECK(comp.depth() == inet.depth() + dnet.depth());
    for (int x = -4; x <= 4; ++x)
        for (int y = -4; y <= 4; ++y)
            for (int z = -4; z <= 4; ++z) {
                auto direct = dnet.eval(inet.eval(R({x, y, z})));
                REQUIRE(comp.eval(R({x, y, z})) == direct);
            }
    auto par = parallel(dnet, passthrough(1, 0));
    CHECK(par.depth() == dnet.depth());
    CHECK(par.eval(R({2, 2, -9})) == R({1, -9}));
    auto par2 = parallel(dnet, mnet);
    CHECK(par2.eval(R({1, 2, 1, 2})) == R({0, 2}));
    CHECK_THROWS_AS(compose(dnet, dnet), WidthMismatch);
}

TEST_CASE("compose remaps traces") {
    Circuit g({}, 100);
    auto x = g.input(0, 10);
    auto gx = g.relu(x - Expr(2));
    g.trace("gx", std::vector<Expr>{gx});
    auto gnet = g.compile({gx + Expr(1)});
    Circuit f({}, 100);
    auto y = f.input(0, 20);
    auto fy = f.relu(y - Expr(3));
    f.trace("fy", std::vector<Expr>{fy, y});
    auto fnet = f.compile({fy});
    auto comp = compose(fnet, gnet);
    auto acts = comp.eval_all(R({9}));
    CHECK(comp.read_wire("gx", acts) == R({7}));
    CHECK(comp.read_wire("fy", acts) == R({5, 8}));
}

TEST_CASE("json round trip is exact") {
    Circuit c({}, 100);
    auto x = c.input(0, 1);
    auto y = interval(c, x, Rational(1, 3), Rational(2, 3), Rational(1, 100), true);
    c.trace("y", std::vector<Expr>{y});
    auto net = c.compile({y, x * Rational(1, 7)});
    auto back = network_from_json(nlohmann::json::parse(to_json(net).dump()));
    for (int k = 0; k < 100; ++k) {
        std::vector<Rational> in{Rational(k, 100)};
        REQUIRE(back.eval(in) == net.eval(in));
        REQUIRE(back.read_wire("y", back.eval_all(in)) == net.read_wire("y", net.eval_all(in)));
    }
    CHECK(back.contracts().size() == net.contracts().size());
}

TEST_CASE("fast evaluator matches exact evaluation") {
    Circuit c({}, 1000);
    auto x = c.input(0, 1);
    auto n = c.input(-10, 10);
    auto a = interval(c, x, Rational(1, 3), Rational(2, 3), Rational(1, 100), true);
    auto h = c.relu(n * Rational(1, 2) + Expr(Rational(1, 3)));
    auto net = c.compile({a, h, keep_if(c, h, a), n * Rational(3, 7)});
    FastEvaluator fast(net);
    CHECK(fast.usable());
    for (int k = 0; k < 100; ++k)
        for (int v = -10; v <= 10; ++v) {
            std::vector<Rational> in{Rational(k, 100), Rational(v)};
            REQUIRE(fast.eval(in) == net.eval(in));
        }
}

TEST_CASE("folding keeps semantics and shrinks the network") {
    for (bool fold : {false, true}) {
        Circuit c({fold, false}, 1000);
        auto x = c.input(0, 10);
        Expr t = 7;
        auto d = delta(c, t, Expr(7));  // constant 1
        auto e = delta(c, x, t);
        auto net = c.compile({d + e, product(c, t, e)});
        for (int v = 0; v <= 10; ++v) CHECK(net.eval(R({v})) == R({1 + (v == 7), 7 * (v == 7)}));
        if (fold) CHECK(net.stats().total < 6);
    }
}
