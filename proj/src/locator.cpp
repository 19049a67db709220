#include "treegen/locator.hpp"

#include <algorithm>
#include <string>

namespace treegen {

Constants make_constants(int n, int m, int d) {
    Constants k;
    k.B = 8 * (std::max<std::int64_t>(2 * m, 2 * n + 2 * d) + 1);
    k.C = 8 * k.B * (2 * n + 2 * d + 1);
    return k;
}

std::vector<Expr> constant_exprs(const std::vector<std::int64_t>& values) {
    std::vector<Expr> out;
    out.reserve(values.size());
    for (auto v : values) out.emplace_back(Rational(v));
    return out;
}

InwardStage inward_stage(Circuit& c, const ExprVec& t, const ExprVec& x, int m, bool with_labels) {
    const int L = static_cast<int>(t.size());
    InwardStage s;
    Expr prefix;
    for (int i = 0; i < L; ++i) {
        s.p.push_back(nonneg(c, Expr(m) - t[i]));
        prefix += s.p[i];
        s.p1.push_back(drop_if(c, prefix.with_range(0, i + 1), delta(c, s.p[i], 0)));
        s.p2.push_back(s.p1[i] + keep_if(c, Expr(L), delta(c, s.p1[i], 0)));
    }
    for (const auto& xj : x) {
        ExprVec q, r1;
        for (int i = 0; i < L; ++i) {
            q.push_back(delta(c, s.p2[i], xj));
            if (with_labels) r1.push_back(product(c, t[i], q.back()));
        }
        s.q.push_back(std::move(q));
        s.r1.push_back(std::move(r1));
    }
    return s;
}

OutwardCore outward_core(Circuit& c, const ExprVec& t, const ExprVec& p, int m) {
    const int L = static_cast<int>(t.size());
    OutwardCore o;
    ExprVec out(L), in(L);
    for (int i = 0; i < L; ++i) {
        o.r.push_back(product(c, t[i], p[i]));
        o.s.push_back(t[i] - o.r[i]);
        out[i] = heaviside(c, o.s[i]);
        in[i] = heaviside(c, o.r[i]);
    }
    const Rational C = c.masking();
    o.v.assign(L, ExprVec(L, Expr(0)));
    o.v1.assign(L, ExprVec(L, Expr(0)));
    o.w.assign(L, ExprVec(L, Expr(0)));
    for (int i = 0; i < L; ++i) {
        Expr excess;  // out - in over (l, i), grown as l decreases
        for (int l = i - 1; l >= 0; --l) {
            Expr e = delta(c, o.s[i], o.r[l] + Expr(m)) - C * excess;
            o.v[l][i] = c.relu(e);
            o.v1[l][i] = delta(c, o.v[l][i], 1);
            excess += out[l] - in[l];
        }
    }
    for (int i = 0; i < L; ++i)
        for (int l = 0; l < i; ++l) {
            Expr later;
            for (int k = l + 1; k < i; ++k) later += o.v1[k][i];
            o.w[l][i] = c.relu(o.v1[l][i] - later).with_range(0, 1);
        }
    return o;
}

OutwardSelect outward_select(Circuit& c, const ExprVec& t, const OutwardCore& core, const ExprMat& r1, int m,
                             bool with_positions) {
    const int L = static_cast<int>(t.size());
    OutwardSelect sel;
    std::vector<Expr> col_sum(L);
    for (int i = 0; i < L; ++i)
        for (int l = 0; l < i; ++l) col_sum[i] += core.w[l][i];
    for (const auto& rj : r1) {
        ExprMat w1(L, ExprVec(L, Expr(0)));
        Expr z;
        ExprVec z1;
        for (int i = 0; i < L; ++i) {
            Expr hit;
            for (int l = 0; l < i; ++l) {
                w1[l][i] = c.relu(delta(c, core.s[i], rj[l] + Expr(m)) - (col_sum[i] - core.w[l][i]))
                               .with_range(0, 1);
                hit += w1[l][i];
            }
            hit = hit.with_range(0, 1);
            if (with_positions) z += Rational(i + 1) * hit;
            z1.push_back(product(c, t[i], hit));
        }
        sel.w1.push_back(std::move(w1));
        sel.z.push_back(z.with_range(0, L));
        sel.z1.push_back(std::move(z1));
    }
    return sel;
}

ExprVec drop_repeats(Circuit& c, const ExprVec& x) {
    ExprVec out;
    for (std::size_t j = 0; j < x.size(); ++j) {
        Expr seen;
        for (std::size_t k = 0; k < j; ++k) seen += delta(c, x[j], x[k]);
        out.push_back(j == 0 ? x[j] : drop_if(c, x[j], seen));
    }
    return out;
}

std::vector<int> drop_repeats(const std::vector<int>& x) {
    std::vector<int> out;
    for (std::size_t j = 0; j < x.size(); ++j)
        out.push_back(std::find(x.begin(), x.begin() + j, x[j]) != x.begin() + j ? 0 : x[j]);
    return out;
}

namespace {

ExprVec flatten3(const std::vector<ExprMat>& a) {
    ExprVec out;
    for (const auto& m : a)
        for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
    return out;
}

}  // namespace

void trace_inward(Circuit& c, const InwardStage& s) {
    c.trace("p", s.p);
    c.trace("p'", s.p1);
    c.trace("p''", s.p2);
    c.trace("q", s.q);
    if (!s.r1.empty() && !s.r1[0].empty()) c.trace("r'", s.r1);
}

void trace_outward(Circuit& c, const OutwardCore& core, const OutwardSelect& sel) {
    c.trace("r", core.r);
    c.trace("s", core.s);
    c.trace("v", core.v);
    c.trace("v'", core.v1);
    c.trace("w", core.w);
    if (!sel.w1.empty()) {
        int d = static_cast<int>(sel.w1.size());
        int L = static_cast<int>(sel.w1[0].size());
        c.trace("w'", flatten3(sel.w1), {d, L, L}, {1, 1, 1});
    }
    c.trace("z", sel.z);
    c.trace("z'", sel.z1);
}

namespace {

struct LocatorSetup {
    Circuit c;
    ExprVec t;
    ExprVec x;
};

LocatorSetup setup(const EulerString& e, int d, BuildOptions opts) {
    if (d < 1) throw BuildError("d must be at least 1");
    auto k = make_constants(e.n(), e.m, d);
    LocatorSetup s{Circuit(opts, Rational(k.C)), constant_exprs(e.symbols), {}};
    for (int j = 0; j < d; ++j) s.x.push_back(s.c.input(0, e.n()));
    return s;
}

void stamp(ReluNetwork& net, const char* kind, const EulerString& e, int d) {
    net.meta()["kind"] = kind;
    net.meta()["n"] = e.n();
    net.meta()["m"] = e.m;
    net.meta()["d"] = d;
    net.meta()["euler"] = e.symbols;
}

}  // namespace

ReluNetwork build_inward_locator(const EulerString& e, int d, BuildOptions opts) {
    auto s = setup(e, d, opts);
    auto in = inward_stage(s.c, s.t, s.x, e.m);
    trace_inward(s.c, in);
    ExprVec out;
    for (const auto& row : in.r1) out.insert(out.end(), row.begin(), row.end());
    auto net = s.c.compile(out);
    stamp(net, "inward", e, d);
    return net;
}

ReluNetwork build_outward_locator(const EulerString& e, int d, BuildOptions opts) {
    auto s = setup(e, d, opts);
    auto in = inward_stage(s.c, s.t, s.x, e.m);
    auto core = outward_core(s.c, s.t, in.p, e.m);
    auto sel = outward_select(s.c, s.t, core, in.r1, e.m);
    trace_inward(s.c, in);
    trace_outward(s.c, core, sel);
    ExprVec out = sel.z;
    for (const auto& row : sel.z1) out.insert(out.end(), row.begin(), row.end());
    auto net = s.c.compile(out);
    stamp(net, "outward", e, d);
    return net;
}

bool outward_predicate(const EulerString& e, int l, int i, OutwardCheckTrace* trace) {
    const int L = static_cast<int>(e.symbols.size());
    if (l < 1 || l > L || i < 1 || i > L)
        throw PositionOutOfRange("position out of range 1.." + std::to_string(L));
    const auto& t = e.symbols;
    auto basic = [&](int a, int b, OutwardCheckTrace& tr) {
        tr = {};
        tr.before = a >= 1 && a <= b - 1;
        tr.labels_match = t[b - 1] == t[a - 1] + e.m && t[a - 1] <= e.m;
        for (int k = a + 1; k < b; ++k) (t[k - 1] <= e.m ? tr.in_count : tr.out_count)++;
        tr.balanced = tr.in_count == tr.out_count;
        return tr.before && tr.labels_match && tr.balanced;
    };
    OutwardCheckTrace tr;
    bool ok = basic(l, i, tr);
    tr.largest = true;
    for (int k = l + 1; k < i; ++k) {
        OutwardCheckTrace other;
        if (basic(k, i, other)) tr.largest = false;
    }
    if (trace) *trace = tr;
    return ok && tr.largest;
}

}  // namespace treegen
