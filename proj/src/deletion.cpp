#include "treegen/deletion.hpp"

#include <algorithm>
#include <string>

namespace treegen {

DeleteStage delete_stage(Circuit& c, const ExprVec& t, const ExprVec& pos, int m, std::int64_t B, int out_len) {
    const int L = static_cast<int>(t.size());
    const int span = L - out_len + 1;
    DeleteStage s;
    s.x1 = drop_repeats(c, pos);
    s.in = inward_stage(c, t, s.x1, m, false);
    for (int i = 0; i < L; ++i) {
        Expr qi;
        for (const auto& row : s.in.q) qi += row[i];
        s.q.push_back(qi.with_range(0, 1));
        s.r1.push_back(product(c, t[i], s.q[i]));
    }
    s.core = outward_core(c, t, s.in.p, m);
    s.sel = outward_select(c, t, s.core, {s.r1}, m, false);
    Expr kept;
    const Rational b(B);
    for (int i = 0; i < L; ++i) {
        s.P.push_back(s.r1[i] + s.sel.z1[0][i]);
        s.Q.push_back(delta(c, s.P[i], 0));
        kept += s.Q[i];
        s.R.push_back(drop_if(c, (b * kept).with_range(0, b * Rational(i + 1)), delta(c, s.Q[i], 0)));
    }
    s.R1.assign(span, ExprVec(out_len));
    for (int i = 0; i < out_len; ++i) {
        Expr yi;
        Rational hi;
        for (int j = 0; j < span; ++j) {
            int src = i + j;
            Rational lo = b * Rational(i + 1);
            s.R1[j][i] = product(c, t[src], interval(c, s.R[src], lo, lo + Rational(1)));
            yi += s.R1[j][i];
            hi = std::max(hi, t[src].hi());
        }
        // at most one shift selects position i
        s.y.push_back(yi.with_range(0, hi));
    }
    return s;
}

void trace_delete(Circuit& c, const DeleteStage& s) {
    c.trace("x'", s.x1);
    trace_inward(c, s.in);
    c.trace("q_i", s.q);
    c.trace("r'_i", s.r1);
    c.trace("r", s.core.r);
    c.trace("s", s.core.s);
    c.trace("v", s.core.v);
    c.trace("v'", s.core.v1);
    c.trace("w", s.core.w);
    c.trace("w'", s.sel.w1[0]);
    c.trace("z'", s.sel.z1[0]);
    c.trace("P", s.P);
    c.trace("Q", s.Q);
    c.trace("R", s.R);
    c.trace("R'", s.R1);
    c.trace("y", s.y);
}

ReluNetwork build_td(const EulerString& e, int d, BuildOptions opts) {
    if (d < 1) throw BuildError("d must be at least 1");
    auto k = make_constants(e.n(), e.m, d);
    Circuit c(opts, Rational(k.C));
    ExprVec pos;
    for (int j = 0; j < d; ++j) pos.push_back(c.input(0, e.n()));
    auto padded = e.symbols;
    padded.insert(padded.end(), 2 * d, k.B);
    auto s = delete_stage(c, constant_exprs(padded), pos, e.m, k.B, 2 * e.n());
    trace_delete(c, s);
    auto net = c.compile(s.y);
    net.meta()["kind"] = "td";
    net.meta()["n"] = e.n();
    net.meta()["m"] = e.m;
    net.meta()["d"] = d;
    net.meta()["B"] = k.B;
    net.meta()["C"] = k.C;
    net.meta()["euler"] = e.symbols;
    return net;
}

std::vector<std::int64_t> strip_sentinels(const std::vector<std::int64_t>& y, std::int64_t B) {
    std::size_t a = 0, b = y.size();
    while (a < b && y[a] == B) ++a;
    while (b > a && y[b - 1] == B) --b;
    for (std::size_t i = a; i < b; ++i)
        if (y[i] == B) throw InteriorSentinel("sentinel at position " + std::to_string(i + 1));
    return {y.begin() + a, y.begin() + b};
}

LabeledTree apply_delete_reference(const LabeledTree& tree, const std::set<int>& vertices) {
    for (int v : vertices) {
        if (v == 0) throw RootDeletion("the root cannot be deleted");
        if (v < 0 || v > tree.n()) throw std::out_of_range("vertex " + std::to_string(v) + " not in tree");
    }
    // children lists of surviving vertices, splicing through deleted ones
    std::vector<std::vector<int>> children(tree.size());
    auto expand = [&](auto&& self, int v, std::vector<int>& out) -> void {
        for (int ch : tree.children(v)) {
            if (vertices.count(ch)) self(self, ch, out);
            else out.push_back(ch);
        }
    };
    for (int v = 0; v < tree.size(); ++v)
        if (!vertices.count(v)) expand(expand, v, children[v]);
    return LabeledTree::from_children(tree.labels(), children, 0, tree.m());
}

std::set<int> delete_ops_from_input(const std::vector<int>& x) {
    std::set<int> out;
    for (int v : x)
        if (v != 0) out.insert(v);
    return out;
}

}  // namespace treegen
