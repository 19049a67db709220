#include "treegen/insertion.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace treegen {

namespace {

ExprVec flatten(const std::vector<ExprMat>& a) {
    ExprVec out;
    for (const auto& m : a)
        for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
    return out;
}

ExprVec flatten(const ExprMat& a) {
    ExprVec out;
    for (const auto& row : a) out.insert(out.end(), row.begin(), row.end());
    return out;
}

Expr H(Circuit& c, const Expr& x) { return nonneg(c, x); }

// out_j = sum_k keep_if(val_k, [rank_k + 1 = j]): val arranged by rank.
ExprVec arrange(Circuit& c, const ExprVec& val, const ExprMat& slot, const Rational& lo, const Rational& hi) {
    const int d = static_cast<int>(val.size());
    ExprVec out;
    for (int j = 0; j < d; ++j) {
        Expr s;
        for (int k = 0; k < d; ++k) s += keep_if(c, val[k], slot[j][k]);
        out.push_back(s.with_range(lo, hi));
    }
    return out;
}

// rank_j = #{k : v_k < v_j} + #{k < j : v_k = v_j}
ExprVec ranks(Circuit& c, const ExprVec& v) {
    const int d = static_cast<int>(v.size());
    ExprVec out;
    for (int j = 0; j < d; ++j) {
        Expr s;
        for (int k = 0; k < d; ++k) s += H(c, v[j] - v[k]);
        for (int k = j; k < d; ++k) s -= delta(c, v[k], v[j]);
        out.push_back(c.relu(s).with_range(0, d - 1));
    }
    return out;
}

// slot[j][k] = [j + 1 = rank_k + 1]
ExprMat slots(Circuit& c, const ExprVec& rank) {
    const int d = static_cast<int>(rank.size());
    ExprMat out(d, ExprVec(d));
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) out[j][k] = delta(c, Expr(j + 1), rank[k] + Expr(1));
    return out;
}

}  // namespace

InsertStage insert_stage(Circuit& c, const ExprVec& t, const ExprVec& x1, const ExprVec& x2, const ExprVec& x3,
                         const ExprVec& x4, int max_children, int m, bool padded) {
    const int L = static_cast<int>(t.size());
    const int d = static_cast<int>(x1.size());
    const int n = max_children;
    const int K = n + 1;
    InsertStage s;

    // Step 1: parent positions and matching outward positions.
    s.in = inward_stage(c, t, x1, m, false);
    s.core = outward_core(c, t, s.in.p, m);
    for (int j = 0; j < d; ++j) {
        Expr qj;
        for (int i = 0; i < L; ++i) qj += Rational(i + 1) * s.in.q[j][i];
        s.q.push_back(qj.with_range(0, L));
    }
    s.b.push_back(Expr(L + 1));
    for (int l = 1; l <= L; ++l) {
        Expr bl;
        for (int i = 0; i < L; ++i) bl += Rational(i + 1) * s.core.w[l - 1][i];
        s.b.push_back(bl.with_range(0, L));
    }

    // Step 2: children counts. I[k][i] = [k + 1 <= i <= b_k - 1].
    ExprMat I(L + 1, ExprVec(L + 1, Expr(0)));
    for (int k = 0; k <= L; ++k)
        for (int i = k + 1; i <= L; ++i) I[k][i] = at_least(c, s.b[k], i + 1);
    ExprVec sentinel(L + 1, Expr(0));
    if (padded)
        for (int i = 1; i <= L; ++i) sentinel[i] = at_least(c, t[i - 1], 2 * m + 1);
    s.A.assign(L + 1, ExprVec(L, Expr(0)));
    for (int i = 1; i <= L; ++i) {
        Expr inner;  // sum over k > l of I[k][i]
        for (int l = L; l >= 0; --l) {
            if (i > l) s.A[l][i - 1] = c.relu(I[l][i] - inner - sentinel[i]).with_range(0, 1);
            inner += I[l][i];
        }
    }
    for (int l = 0; l <= L; ++l) s.a.push_back((sum(s.A[l]) / Rational(2)).with_range(0, n));
    ExprMat is_parent(d, ExprVec(L + 1));  // [l = q_j]
    for (int j = 0; j < d; ++j)
        for (int l = 0; l <= L; ++l) is_parent[j][l] = delta(c, Expr(l), s.q[j]);
    ExprMat count_is(n + 1, ExprVec(L + 1));  // [k = a_l]
    for (int k = 1; k <= n; ++k)
        for (int l = 0; l <= L; ++l) count_is[k][l] = delta(c, Expr(k), s.a[l]);
    for (int j = 0; j < d; ++j) {
        Expr Dj;
        for (int k = 1; k <= n; ++k)
            for (int l = 0; l <= L; ++l) Dj += Rational(k) * logical_and(c, {count_is[k][l], is_parent[j][l]});
        s.D.push_back(Dj.with_range(0, n));
    }

    // Step 3: bound refinement.
    for (int j = 0; j < d; ++j) {
        s.Q1.push_back(keep_if(c, x2[j], H(c, s.D[j] - x2[j])));
        s.P1.push_back(keep_if(c, x3[j], H(c, s.D[j] - x3[j])));
        s.P2.push_back(drop_if(c, s.P1[j], H(c, s.Q1[j] - s.P1[j] - Expr(1))));
    }
    ExprMat same(d, ExprVec(d));
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            if (j != k) same[j][k] = k < j ? same[k][j] : delta(c, s.q[j], s.q[k]);
    for (int j = 0; j < d; ++j) {
        Expr hits;
        for (int k = j + 1; k < d; ++k)
            hits += logical_and(c, {same[j][k], H(c, s.P2[j] - s.Q1[k] - Expr(1))});
        s.P3.push_back(drop_if(c, s.P2[j], hits));
    }
    for (int j = 0; j < d; ++j) {
        Expr hits;
        for (int k = 0; k < j; ++k) hits += logical_and(c, {same[j][k], delta(c, s.Q1[j], s.P3[k])});
        s.P4.push_back(drop_if(c, s.P3[j], hits));
    }
    for (int j = 0; j < d; ++j) {
        Expr hits;
        for (int k = j + 1; k < d; ++k)
            hits += logical_and(c, {same[j][k], H(c, s.Q1[j] - s.Q1[k] - Expr(1))});
        s.Q2.push_back(drop_if(c, s.Q1[j], hits));
    }
    for (int j = 0; j < d; ++j) {
        Expr hits;
        Expr wide = H(c, s.P4[j] - s.Q2[j] - Expr(1));
        for (int k = 0; k < d; ++k)
            if (k != j) hits += logical_and(c, {same[j][k], delta(c, s.Q2[j], s.Q2[k]), wide});
        s.P5.push_back(drop_if(c, s.P4[j], hits));
    }
    for (int j = 0; j < d; ++j) {
        s.P6.push_back(drop_if(c, s.P5[j], delta(c, s.Q2[j], 0)));
        Expr leaf_after = logical_and(c, {delta(c, s.P6[j], 0), H(c, s.Q2[j] - Expr(1))});
        s.Q3.push_back((keep_if(c, s.Q2[j] + Expr(1), leaf_after) + drop_if(c, s.Q2[j], leaf_after))
                           .with_range(0, s.Q2[j].hi() + Rational(1)));
    }

    // Step 4: positions of the k-th child of the inward edge at l.
    s.F.assign(L + 1, ExprVec(L, Expr(0)));
    for (int l = 0; l <= L; ++l) {
        Expr prefix;
        for (int i = 1; i <= L; ++i) {
            prefix += s.A[l][i - 1];
            if (i > l)
                s.F[l][i - 1] = drop_if(c, (prefix / Rational(2)).with_range(0, Rational(i, 2)),
                                        delta(c, s.A[l][i - 1], 0));
        }
    }
    const Rational half(1, 2);
    s.G.assign(K, ExprMat(L + 1));
    s.G1.assign(K + 1, ExprMat(L + 1));
    s.G2.assign(K, ExprMat(L + 1));
    for (int l = 0; l <= L; ++l) s.G1[0][l] = {Expr(l)};
    for (int k = 1; k <= K; ++k)
        for (int l = 0; l <= L; ++l) {
            Expr g, g1;
            for (int i = l + 1; i <= L; ++i) {
                g += Rational(i) * delta(c, s.F[l][i - 1] + Expr(half), Expr(k), half);
                g1 += Rational(i) * delta(c, s.F[l][i - 1], Expr(k), half);
            }
            s.G[k - 1][l] = {g.with_range(0, L)};
            s.G1[k][l] = {g1.with_range(0, L)};
        }
    for (int k = 1; k <= K; ++k)
        for (int l = 0; l <= L; ++l) {
            const Expr& g = s.G[k - 1][l][0];
            s.G2[k - 1][l] = {(g + keep_if(c, s.G1[k - 1][l][0] + Expr(1), delta(c, g, 0))).with_range(0, L + 1)};
        }

    // Step 5: insertion points in the original string.
    for (int j = 0; j < d; ++j) {
        ExprVec lo_is(K + 1), hi_is(K + 1);
        for (int k = 0; k <= K; ++k) {
            lo_is[k] = delta(c, Expr(k), s.Q3[j]);
            hi_is[k] = delta(c, Expr(k), s.P6[j]);
        }
        Expr Lj, L1j;
        for (int k = 0; k <= K; ++k)
            for (int l = 0; l <= L; ++l) {
                Expr J = k == 0 ? s.q[j] + Expr(1) : s.G2[k - 1][l][0];
                Expr J1 = k == 0 ? s.q[j] : s.G1[k][l][0];
                Lj += keep_if(c, J, logical_and(c, {is_parent[j][l], lo_is[k]}));
                L1j += keep_if(c, J1, logical_and(c, {is_parent[j][l], hi_is[k]}));
            }
        s.L.push_back(Lj.with_range(0, L + 1));
        s.L1.push_back(L1j.with_range(0, L));
    }
    for (int j = 0; j < d; ++j) {
        Expr after = H(c, s.L[j] - s.L1[j]);
        s.L2.push_back(
            (keep_if(c, s.L[j] - Expr(1), after) + drop_if(c, s.L1[j], after) + Expr(1)).with_range(0, L + 1));
    }

    // Step 6: sort the insertions by inward position.
    s.R = ranks(c, s.L);
    auto slot = slots(c, s.R);
    s.R1 = arrange(c, s.L, slot, 0, L + 1);
    s.R2 = arrange(c, s.L2, slot, 0, L + 1);
    Rational x4_hi;
    for (const auto& v : x4) x4_hi = std::max(x4_hi, v.hi());
    s.x4s = arrange(c, x4, slot, 0, x4_hi);

    // Step 7: shifted positions of the original symbols.
    for (int i = 1; i <= L + 1; ++i) {
        Expr Mi;
        for (int j = 0; j < d; ++j) Mi += delta(c, s.R1[j], Expr(i)) + delta(c, s.R2[j], Expr(i));
        s.M.push_back(Mi.with_range(0, 2 * d));
    }
    Expr shift;
    Rational t_hi;
    for (const auto& ti : t) t_hi = std::max(t_hi, ti.hi());
    for (int i = 1; i <= L; ++i) {
        shift += s.M[i - 1];
        s.M1.push_back((Expr(i) + shift).with_range(i, i + 2 * d));
    }
    s.N.assign(2 * d + 1, ExprVec(L));
    s.N1.assign(L + 2 * d, Expr());
    for (int k = 1; k <= 2 * d + 1; ++k)
        for (int i = 1; i <= L; ++i) {
            s.N[k - 1][i - 1] = product(c, t[i - 1], delta(c, s.M1[i - 1], Expr(i + k - 1)));
            s.N1[i + k - 2] += s.N[k - 1][i - 1];
        }
    for (auto& v : s.N1) v = v.with_range(0, t_hi);

    // Step 8: positions of the new symbols.
    for (int j = 0; j < d; ++j) {
        Expr Sj = s.R1[j] + Expr(2 * j);
        for (int k = 0; k < j; ++k) Sj += delta(c, s.R2[k], s.R1[j]) - H(c, s.R2[k] - s.R1[j]);
        s.S.push_back(Sj.with_range(0, L + 2 * d));
    }
    for (int j = 0; j < d; ++j) {
        Expr Sj = s.R2[j] + Expr(2 * d);
        for (int k = j + 1; k < d; ++k) Sj -= H(c, s.R1[k] - s.R2[j]);
        for (int k = 0; k < d; ++k) Sj -= H(c, s.R2[k] - s.R2[j]);
        for (int k = 0; k < j; ++k) Sj += delta(c, s.R2[k], s.R2[j]);
        s.S1.push_back(Sj.with_range(0, L + 2 * d));
    }

    // Step 9: sort the new symbols by position.
    s.V = s.S;
    s.V.insert(s.V.end(), s.S1.begin(), s.S1.end());
    s.V1 = s.x4s;
    for (const auto& v : s.x4s) s.V1.push_back(v + Expr(m));
    s.W = ranks(c, s.V);
    auto vslot = slots(c, s.W);
    s.W1 = arrange(c, s.V, vslot, 0, L + 2 * d);
    s.W2 = arrange(c, s.V1, vslot, 0, x4_hi + Rational(m));

    // Step 10: splice.
    s.Z.assign(2 * d, ExprVec(L + 1));
    s.Z1.assign(L + 2 * d, Expr());
    for (int k = 1; k <= 2 * d; ++k)
        for (int i = 1; i <= L + 1; ++i) {
            s.Z[k - 1][i - 1] = keep_if(c, s.W2[k - 1], delta(c, s.W1[k - 1], Expr(i + k - 1)));
            s.Z1[i + k - 2] += s.Z[k - 1][i - 1];
        }
    Rational u_hi = std::max(t_hi, x4_hi + Rational(m));
    for (int h = 0; h < L + 2 * d; ++h) {
        s.Z1[h] = s.Z1[h].with_range(0, x4_hi + Rational(m));
        s.u.push_back((s.N1[h] + s.Z1[h]).with_range(0, u_hi));
    }
    return s;
}

void trace_insert(Circuit& c, const InsertStage& s) {
    const int L = static_cast<int>(s.A[0].size());
    const int d = static_cast<int>(s.q.size());
    const int K = static_cast<int>(s.G.size());
    trace_inward(c, s.in);
    c.trace("r", s.core.r);
    c.trace("s", s.core.s);
    c.trace("v", s.core.v);
    c.trace("v'", s.core.v1);
    c.trace("w", s.core.w);
    c.trace("q_j", s.q);
    c.trace("b", s.b, 0);
    c.trace("A", s.A, 0, 1);
    c.trace("a", s.a, 0);
    c.trace("D", s.D);
    c.trace("Q^1", s.Q1);
    c.trace("P^1", s.P1);
    c.trace("P^2", s.P2);
    c.trace("P^3", s.P3);
    c.trace("P^4", s.P4);
    c.trace("Q^2", s.Q2);
    c.trace("P^5", s.P5);
    c.trace("P^6", s.P6);
    c.trace("Q^3", s.Q3);
    c.trace("F", s.F, 0, 1);
    c.trace("G", flatten(s.G), {K, L + 1}, {1, 0});
    c.trace("G'", flatten(s.G1), {K + 1, L + 1}, {0, 0});
    c.trace("G''", flatten(s.G2), {K, L + 1}, {1, 0});
    ExprVec J, J1;
    for (int k = 0; k <= K; ++k)
        for (int l = 0; l <= L; ++l)
            for (int j = 0; j < d; ++j) {
                J.push_back(k == 0 ? s.q[j] + Expr(1) : s.G2[k - 1][l][0]);
                J1.push_back(k == 0 ? s.q[j] : s.G1[k][l][0]);
            }
    c.trace("J", J, {K + 1, L + 1, d}, {0, 0, 1});
    c.trace("J'", J1, {K + 1, L + 1, d}, {0, 0, 1});
    c.trace("L", s.L);
    c.trace("L'", s.L1);
    c.trace("L''", s.L2);
    c.trace("R", s.R);
    c.trace("R'", s.R1);
    c.trace("R''", s.R2);
    c.trace("x'^4", s.x4s);
    c.trace("M", s.M);
    c.trace("M'", s.M1);
    c.trace("N", s.N);
    c.trace("N'", s.N1);
    c.trace("S", s.S);
    c.trace("S'", s.S1);
    c.trace("V", s.V);
    c.trace("V'", s.V1);
    c.trace("W", s.W);
    c.trace("W'", s.W1);
    c.trace("W''", s.W2);
    c.trace("Z", s.Z);
    c.trace("Z'", s.Z1);
    c.trace("u", s.u);
}

ReluNetwork build_ti(const EulerString& e, int d, BuildOptions opts) {
    if (d < 1) throw BuildError("d must be at least 1");
    auto k = make_constants(e.n(), e.m, d);
    Circuit c(opts, Rational(k.C));
    const int n = e.n();
    ExprVec x1, x2, x3, x4;
    for (int j = 0; j < d; ++j) x1.push_back(c.input(0, n));
    for (int j = 0; j < d; ++j) x2.push_back(c.input(0, n));
    for (int j = 0; j < d; ++j) x3.push_back(c.input(0, n));
    for (int j = 0; j < d; ++j) x4.push_back(c.input(1, e.m));
    auto s = insert_stage(c, constant_exprs(e.symbols), x1, x2, x3, x4, n, e.m, false);
    trace_insert(c, s);
    auto net = c.compile(s.u);
    net.meta()["kind"] = "ti";
    net.meta()["n"] = n;
    net.meta()["m"] = e.m;
    net.meta()["d"] = d;
    net.meta()["B"] = k.B;
    net.meta()["C"] = k.C;
    net.meta()["euler"] = e.symbols;
    return net;
}

RefinedBounds refine_bounds(const std::vector<int>& D, const std::vector<int>& parent, const std::vector<int>& lower,
                            const std::vector<int>& upper) {
    const std::size_t d = D.size();
    if (parent.size() != d || lower.size() != d || upper.size() != d)
        throw std::invalid_argument("refine_bounds: length mismatch");
    RefinedBounds r;
    auto H = [](long long x) { return x >= 0; };
    for (std::size_t j = 0; j < d; ++j) {
        r.Q1.push_back(H(D[j] - lower[j]) ? lower[j] : 0);
        r.P1.push_back(H(D[j] - upper[j]) ? upper[j] : 0);
        r.P2.push_back(H(r.Q1[j] - r.P1[j] - 1) ? 0 : r.P1[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
        bool hit = false;
        for (std::size_t k = j + 1; k < d; ++k) hit |= parent[j] == parent[k] && H(r.P2[j] - r.Q1[k] - 1);
        r.P3.push_back(hit ? 0 : r.P2[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
        bool hit = false;
        for (std::size_t k = 0; k < j; ++k) hit |= parent[j] == parent[k] && r.Q1[j] == r.P3[k];
        r.P4.push_back(hit ? 0 : r.P3[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
        bool hit = false;
        for (std::size_t k = j + 1; k < d; ++k) hit |= parent[j] == parent[k] && H(r.Q1[j] - r.Q1[k] - 1);
        r.Q2.push_back(hit ? 0 : r.Q1[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
        bool hit = false;
        for (std::size_t k = 0; k < d; ++k)
            hit |= k != j && parent[j] == parent[k] && r.Q2[j] == r.Q2[k] && H(r.P4[j] - r.Q2[j] - 1);
        r.P5.push_back(hit ? 0 : r.P4[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
        r.P6.push_back(r.Q2[j] == 0 ? 0 : r.P5[j]);
        bool leaf_after = r.P6[j] == 0 && r.Q2[j] >= 1;
        r.Q3.push_back(leaf_after ? r.Q2[j] + 1 : r.Q2[j]);
    }
    return r;
}

std::pair<int, int> refine_bounds(int D, int lower, int upper) {
    auto r = refine_bounds({D}, {0}, {lower}, {upper});
    return {r.Q3[0], r.P6[0]};
}

std::vector<std::int64_t> insert_reference_symbols(const std::vector<std::int64_t>& t, int m,
                                                   const std::vector<InsertOp>& ops) {
    const int L = static_cast<int>(t.size());
    int real = 0;
    while (real < L && t[real] <= 2 * m) ++real;
    for (int i = real; i < L; ++i)
        if (t[i] <= 2 * m) throw std::invalid_argument("insert reference: symbols after padding");
    std::vector<std::int64_t> prefix(t.begin(), t.begin() + real);
    auto tree = decode_euler(prefix, m);
    auto pos = edge_positions(tree);
    const int d = static_cast<int>(ops.size());
    std::vector<int> parent(d), D(d), lower(d), upper(d);
    for (int j = 0; j < d; ++j) {
        parent[j] = (ops[j].parent >= 1 && ops[j].parent <= tree.n()) ? ops[j].parent : 0;
        D[j] = static_cast<int>(tree.children(parent[j]).size());
        lower[j] = ops[j].lower;
        upper[j] = ops[j].upper;
    }
    auto r = refine_bounds(D, parent, lower, upper);
    // inward symbol before original position a_j, outward before b_j
    std::vector<int> a(d), b(d);
    for (int j = 0; j < d; ++j) {
        const auto& kids = tree.children(parent[j]);
        int first_gap = parent[j] == 0 ? 1 : pos.inward[parent[j]] + 1;
        int lo = r.Q3[j], hi = r.P6[j];
        auto before_child = [&](int k) {  // gap before the k-th child, k may be D + 1
            if (k == 0) return first_gap;
            if (k <= static_cast<int>(kids.size())) return pos.inward[kids[k - 1]];
            return pos.outward[kids.back()] + 1;
        };
        if (hi == 0) {
            a[j] = b[j] = before_child(lo);
        } else {
            a[j] = pos.inward[kids[lo - 1]];
            b[j] = pos.outward[kids[hi - 1]] + 1;
        }
    }
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a[x] < a[y]; });
    std::vector<std::int64_t> out;
    for (int g = 1; g <= L + 1; ++g) {
        for (int j : order) {
            if (a[j] == g) out.push_back(ops[j].label);
            if (b[j] == g) out.push_back(ops[j].label + m);
        }
        if (g <= L) out.push_back(t[g - 1]);
    }
    return out;
}

LabeledTree apply_insert_reference(const LabeledTree& tree, const std::vector<InsertOp>& ops) {
    for (const auto& op : ops) {
        if (op.parent < 0 || op.parent > tree.n()) throw std::out_of_range("insertion parent not in tree");
        if (op.label < 1 || op.label > tree.m()) throw std::invalid_argument("insertion label outside alphabet");
    }
    return decode_euler(insert_reference_symbols(encode_euler(tree).symbols, tree.m(), ops), tree.m());
}

std::vector<InsertOp> insert_ops_from_input(const std::vector<int>& x) {
    const std::size_t d = x.size() / 4;
    std::vector<InsertOp> ops;
    for (std::size_t j = 0; j < d; ++j) ops.push_back({x[j], x[d + j], x[2 * d + j], x[3 * d + j]});
    return ops;
}

}  // namespace treegen
