#include "treegen/substitution.hpp"

#include <algorithm>
#include <string>

namespace treegen {

SubstStage subst_stage(Circuit& c, const ExprVec& t, const ExprVec& pos, const ExprVec& vals, int m) {
    const int L = static_cast<int>(t.size());
    const int d = static_cast<int>(pos.size());
    SubstStage s;
    s.x1 = drop_repeats(c, pos);
    s.in = inward_stage(c, t, s.x1, m);
    s.core = outward_core(c, t, s.in.p, m);
    s.sel = outward_select(c, t, s.core, s.in.r1, m, false);
    s.P.assign(d, ExprVec(L));
    s.Q.assign(d, ExprVec(L));
    s.Q1.assign(d, ExprVec(L));
    s.R.assign(L, Expr());
    for (int i = 0; i < L; ++i) {
        Expr removed;
        for (int j = 0; j < d; ++j) {
            s.P[j][i] = s.in.r1[j][i] + s.sel.z1[j][i];
            removed += s.P[j][i];
            s.Q[j][i] = drop_if(c, vals[j], delta(c, s.in.r1[j][i], 0));
            s.Q1[j][i] = drop_if(c, vals[j] + Expr(m), delta(c, s.sel.z1[j][i], 0));
            s.R[i] += s.Q[j][i] + s.Q1[j][i];
        }
        // each position keeps its symbol or takes exactly one new label
        s.P1.push_back((t[i] - removed).with_range(0, t[i].hi()));
        Rational hi = t[i].hi();
        for (const auto& v : vals) hi = std::max(hi, v.hi() + Rational(m));
        s.u.push_back((s.P1[i] + s.R[i]).with_range(0, hi));
    }
    return s;
}

void trace_subst(Circuit& c, const SubstStage& s) {
    c.trace("x'", s.x1);
    trace_inward(c, s.in);
    trace_outward(c, s.core, s.sel);
    c.trace("P", s.P);
    c.trace("P'", s.P1);
    c.trace("Q", s.Q);
    c.trace("Q'", s.Q1);
    c.trace("R", s.R);
    c.trace("u", s.u);
}

ReluNetwork build_ts(const EulerString& e, int d, BuildOptions opts) {
    if (d < 1) throw BuildError("d must be at least 1");
    auto k = make_constants(e.n(), e.m, d);
    Circuit c(opts, Rational(k.C));
    ExprVec pos, vals;
    for (int j = 0; j < d; ++j) pos.push_back(c.input(0, e.n()));
    for (int j = 0; j < d; ++j) vals.push_back(c.input(1, e.m));
    auto s = subst_stage(c, constant_exprs(e.symbols), pos, vals, e.m);
    trace_subst(c, s);
    auto net = c.compile(s.u);
    net.meta()["kind"] = "ts";
    net.meta()["n"] = e.n();
    net.meta()["m"] = e.m;
    net.meta()["d"] = d;
    net.meta()["B"] = k.B;
    net.meta()["C"] = k.C;
    net.meta()["euler"] = e.symbols;
    return net;
}

LabeledTree apply_subst_reference(const LabeledTree& tree, const SubstOps& ops) {
    auto labels = tree.labels();
    for (auto [v, a] : ops) {
        if (v == 0) throw RootSubstitution("the root cannot be relabeled");
        if (v < 0 || v > tree.n()) throw std::out_of_range("vertex " + std::to_string(v) + " not in tree");
        if (a < 1 || a > tree.m()) throw LabelOutOfRange("label " + std::to_string(a) + " outside alphabet");
        labels[v] = a;
    }
    return LabeledTree(labels, tree.parents(), tree.m());
}

SubstOps subst_ops_from_input(const std::vector<int>& x) {
    const std::size_t d = x.size() / 2;
    std::vector<int> pos(x.begin(), x.begin() + d);
    auto kept = drop_repeats(pos);
    SubstOps ops;
    for (std::size_t j = 0; j < d; ++j)
        if (kept[j] != 0) ops.emplace_back(kept[j], x[d + j]);
    return ops;
}

}  // namespace treegen
