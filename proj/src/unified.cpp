#include "treegen/unified.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace treegen {

SlotKind slot_kind(int j, int d) {
    int seg = j / d;
    return (seg == 2 || seg == 6) ? SlotKind::Value : SlotKind::Position;
}

void check_on_grid(const std::vector<Rational>& x, const Rational& delta) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        const auto& v = x[j];
        if (v.sign() < 0 || v >= Rational(1))
            throw InputNotOnGrid("x_" + std::to_string(j + 1) + " = " + v.str() + " outside [0, 1)");
        if (!(v / delta).is_integer())
            throw InputNotOnGrid("x_" + std::to_string(j + 1) + " = " + v.str() + " not a multiple of " + delta.str());
    }
}

int discretize(const Rational& x, SlotKind kind, const DiscretizationConfig& cfg) {
    if (!(x / cfg.delta).is_integer() || x.sign() < 0 || x > Rational(1))
        throw InputNotOnGrid("value " + x.str() + " off grid");
    const int k = kind == SlotKind::Position ? cfg.n : cfg.m;
    // smallest i with x <= i / k
    Rational scaled = x * Rational(k);
    int i = static_cast<int>(scaled.ceil().to_int64().value());
    return kind == SlotKind::Value ? std::max(i, 1) : i;
}

std::vector<std::int64_t> budget_filter(const std::vector<int>& v, int d, std::int64_t B) {
    if (d < 1 || static_cast<int>(v.size()) != 7 * d) throw std::invalid_argument("expected 7d slots");
    std::vector<std::int64_t> out(v.begin(), v.end());
    int used = 0;
    for (int seg = 0; seg < 2; ++seg) {
        std::set<int> seen;
        for (int j = seg * d; j < (seg + 1) * d; ++j) {
            if (v[j] != 0 && seen.insert(v[j]).second) ++used;
            if (used >= d + 1) out[j] = B;
        }
    }
    for (int h = 1; h <= d; ++h) {
        int j = 3 * d + h - 1;
        if (used + (d - h + 1) >= d + 1) {
            out[j] = B;
            out[j + d] = out[j + 2 * d] = out[j + 3 * d] = B;
        }
    }
    return out;
}

namespace {

UnifiedStage unified_stage(Circuit& c, const EulerString& e, int d, const Constants& k, const Rational& delta,
                           const ExprVec& x) {
    const int n = e.n();
    const int m = e.m;
    const Rational B(k.B);
    UnifiedStage s;
    const int W = 7 * d;
    s.Pgrid.assign(W, {});
    s.Qgrid.assign(W, {});
    s.P1.assign(W, Expr());
    for (int j = 0; j < W; ++j) {
        Expr v;
        if (slot_kind(j, d) == SlotKind::Position) {
            for (int i = 0; i <= n; ++i) {
                s.Pgrid[j].push_back(interval(c, x[j], Rational(i - 1, n), Rational(i, n), delta, true));
                v += Rational(i) * s.Pgrid[j].back();
            }
            s.P1[j] = v.with_range(0, n);
        } else {
            for (int l = 1; l <= m; ++l) {
                s.Qgrid[j].push_back(interval(c, x[j], Rational(l - 1, m), Rational(l, m), delta, l > 1));
                v += Rational(l) * s.Qgrid[j].back();
            }
            s.P1[j] = v.with_range(1, m);
        }
    }

    // budget
    s.R.assign(W, Expr(0));
    s.R1.assign(W, Expr(0));
    for (int seg = 0; seg < 2; ++seg)
        for (int j = seg * d; j < (seg + 1) * d; ++j) {
            Expr dup = treegen::delta(c, s.P1[j], 0);
            for (int kk = seg * d; kk < j; ++kk) dup += treegen::delta(c, s.P1[j], s.P1[kk]);
            s.R[j] = c.relu(Expr(1) - dup).with_range(0, 1);
        }
    Expr present;
    for (int h = 1; h <= d; ++h) {
        int j = 3 * d + h - 1;
        present += nonneg(c, s.P1[j]);
        s.R[j] = (Expr(d + 1) - present).with_range(0, d);
    }
    Expr used;
    for (int j = 0; j < 2 * d; ++j) {
        used += s.R[j];
        s.R1[j] = at_least(c, used.with_range(0, 2 * d), d + 1);
    }
    for (int h = 1; h <= d; ++h) {
        int j = 3 * d + h - 1;
        s.R1[j] = at_least(c, (used + s.R[j]).with_range(0, 3 * d), d + 1);
    }

    // masking
    s.S.assign(W, Expr(0));
    s.S1.assign(W, Expr(0));
    s.x1.assign(W, Expr(0));
    auto masked = [&](const Expr& v, const Expr& cond) { return (product(c, Expr(B), cond) + drop_if(c, v, cond)); };
    for (int j = 0; j < W; ++j) {
        int seg = j / d;
        if (seg == 0 || seg == 1 || seg == 3) {
            s.S[j] = masked(s.P1[j], s.R1[j]).with_range(0, B);
            s.x1[j] = s.S[j];
        }
    }
    for (int j = 4 * d; j < W; ++j) {
        int slot = 3 * d + (j % d);
        Expr cond = treegen::delta(c, s.S[slot], B);
        s.S1[j] = masked(s.P1[j], cond).with_range(0, B);
        s.x1[j] = s.S1[j];
    }
    for (int j = 2 * d; j < 3 * d; ++j) s.x1[j] = s.P1[j];

    auto slice = [&](int from) { return ExprVec(s.x1.begin() + from, s.x1.begin() + from + d); };
    {
        auto g = c.scope("td/");
        auto padded = e.symbols;
        padded.insert(padded.end(), 2 * d, k.B);
        s.del = delete_stage(c, constant_exprs(padded), slice(0), m, k.B, 2 * n);
    }
    {
        auto g = c.scope("ts/");
        s.sub = subst_stage(c, s.del.y, slice(d), slice(2 * d), m);
    }
    {
        auto g = c.scope("ti/");
        s.ins = insert_stage(c, s.sub.u, slice(3 * d), slice(4 * d), slice(5 * d), slice(6 * d), n, m, true);
    }
    for (const auto& u : s.ins.u) s.y.push_back((u - c.relu(u - Expr(B))).with_range(0, B));
    return s;
}

}  // namespace

ReluNetwork build_te(const EulerString& e, int d, const Rational& delta, BuildOptions opts) {
    if (d < 1) throw BuildError("d must be at least 1");
    if (delta.sign() <= 0 || Rational(1) / delta <= Rational(std::max(e.n(), e.m)))
        throw BuildError("grid step " + delta.str() + " too coarse for n, m");
    auto k = make_constants(e.n(), e.m, d);
    opts.product_free = true;
    Circuit c(opts, Rational(k.C));
    ExprVec x;
    for (int j = 0; j < 7 * d; ++j) x.push_back(c.input(0, 1));
    auto s = unified_stage(c, e, d, k, delta, x);

    const int W = 7 * d;
    ExprVec P, Q;
    for (int j = 0; j < W; ++j) {
        if (slot_kind(j, d) == SlotKind::Position) P.insert(P.end(), s.Pgrid[j].begin(), s.Pgrid[j].end());
        else Q.insert(Q.end(), s.Qgrid[j].begin(), s.Qgrid[j].end());
    }
    c.trace("P", P, {4 * d, e.n() + 1}, {1, 0});
    c.trace("Q", Q, {2 * d, e.m}, {1, 1});
    c.trace("P'", s.P1);
    c.trace("R", s.R);
    c.trace("R'", s.R1);
    c.trace("S", s.S);
    c.trace("S'", s.S1);
    c.trace("x'", s.x1);
    {
        auto g = c.scope("td/");
        trace_delete(c, s.del);
    }
    {
        auto g = c.scope("ts/");
        trace_subst(c, s.sub);
    }
    {
        auto g = c.scope("ti/");
        trace_insert(c, s.ins);
    }
    c.trace("y", s.y);
    auto net = c.compile(s.y);
    net.meta()["kind"] = "te";
    net.meta()["n"] = e.n();
    net.meta()["m"] = e.m;
    net.meta()["d"] = d;
    net.meta()["B"] = k.B;
    net.meta()["C"] = k.C;
    net.meta()["delta"] = delta.str();
    net.meta()["euler"] = e.symbols;
    return net;
}

std::vector<std::int64_t> te_reference_ints(const EulerString& e, int d, const std::vector<int>& ints) {
    const int n = e.n();
    const int m = e.m;
    auto k = make_constants(n, m, d);
    auto xs = budget_filter(ints, d, k.B);
    auto tree = decode_euler(e.symbols, m);

    std::set<int> dels;
    for (int j = 0; j < d; ++j)
        if (xs[j] != 0 && xs[j] != k.B) dels.insert(static_cast<int>(xs[j]));
    auto t1 = apply_delete_reference(tree, dels);

    std::vector<int> pos;
    for (int j = d; j < 2 * d; ++j) pos.push_back(xs[j] == k.B ? -1 : static_cast<int>(xs[j]));
    auto kept = drop_repeats(pos);
    SubstOps subs;
    for (int j = 0; j < d; ++j)
        if (kept[j] >= 1 && kept[j] <= t1.n()) subs.emplace_back(kept[j], static_cast<int>(xs[2 * d + j]));
    auto t2 = apply_subst_reference(t1, subs);

    auto sym = encode_euler(t2).symbols;
    sym.resize(2 * n, k.B);
    std::vector<InsertOp> ops;
    for (int j = 0; j < d; ++j) {
        auto at = [&](int seg) { return static_cast<int>(std::min<std::int64_t>(xs[seg * d + j], k.B)); };
        ops.push_back({at(3), at(4), at(5), at(6)});
    }
    auto out = insert_reference_symbols(sym, m, ops);
    for (auto& v : out) v = std::min(v, k.B);
    return out;
}

std::vector<std::int64_t> te_reference(const EulerString& e, int d, const std::vector<Rational>& x,
                                       const Rational& delta) {
    if (static_cast<int>(x.size()) != 7 * d) throw std::invalid_argument("expected 7d inputs");
    check_on_grid(x, delta);
    DiscretizationConfig cfg{e.n(), e.m, delta};
    std::vector<int> ints;
    for (int j = 0; j < 7 * d; ++j) ints.push_back(discretize(x[j], slot_kind(j, d), cfg));
    return te_reference_ints(e, d, ints);
}

}  // namespace treegen
