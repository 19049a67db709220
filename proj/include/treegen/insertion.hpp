#ifndef TREEGEN_INSERTION_HPP
#define TREEGEN_INSERTION_HPP

#include "treegen/locator.hpp"

#include <cstdint>
#include <vector>

namespace treegen {

struct InsertStage {
    InwardStage in;
    OutwardCore core;
    ExprVec q;      // q_j: position of the parent's inward edge (0 = root)
    ExprVec b;      // b_l, l = 0..L
    ExprMat A;      // A[l][i], l = 0..L, i = 1..L
    ExprVec a;      // a_l
    ExprVec D;      // children of each parent
    ExprVec Q1, P1, P2, P3, P4, Q2, P5, P6, Q3;
    ExprMat F;                   // F[l][i]
    std::vector<ExprMat> G, G1, G2;  // [k][l]; G1 and G2 include k = 0
    ExprVec L, L1, L2;
    ExprVec R, R1, R2, x4s;
    ExprVec M, M1;
    ExprMat N;   // N[k][i]
    ExprVec N1;  // N'_h
    ExprVec S, S1;
    ExprVec V, V1, W, W1, W2;
    ExprMat Z;
    ExprVec Z1;
    ExprVec u;
};

// Inserts one new vertex per slot j: parent DFS index x1_j, adopted child range
// [x2_j, x3_j] after refinement, label x4_j. t has length L (= 2n); when
// `padded`, t may end in sentinels (symbols above 2m) that are not children of
// the root. `max_children` bounds the child count of any vertex.
InsertStage insert_stage(Circuit& c, const ExprVec& t, const ExprVec& x1, const ExprVec& x2, const ExprVec& x3,
                         const ExprVec& x4, int max_children, int m, bool padded);
void trace_insert(Circuit& c, const InsertStage& s);

// Input: x^1 (parents), x^2 (lower), x^3 (upper) in [0, n], x^4 (labels) in
// [1, m]. Output: 2n + 2d symbols.
ReluNetwork build_ti(const EulerString& e, int d, BuildOptions opts = {});

struct RefinedBounds {
    std::vector<int> Q1, P1, P2, P3, P4, Q2, P5, P6, Q3;
    std::vector<int> lower() const { return Q3; }
    std::vector<int> upper() const { return P6; }
};
// Bound refinement for insertion slots sharing parents: `parent` identifies
// each slot's parent (equal values = same parent), D its child count.
RefinedBounds refine_bounds(const std::vector<int>& D, const std::vector<int>& parent, const std::vector<int>& lower,
                            const std::vector<int>& upper);
// Single slot convenience form.
std::pair<int, int> refine_bounds(int D, int lower, int upper);

struct InsertOp {
    int parent;
    int lower;
    int upper;
    int label;
};

// Symbol-level reference: t is an Euler string over [1, m] possibly followed
// by sentinels; parents outside 1..n' (n' real edges) mean the root. Returns
// t.size() + 2 * ops.size() symbols, new outward symbols are label + m.
std::vector<std::int64_t> insert_reference_symbols(const std::vector<std::int64_t>& t, int m,
                                                   const std::vector<InsertOp>& ops);
LabeledTree apply_insert_reference(const LabeledTree& tree, const std::vector<InsertOp>& ops);
std::vector<InsertOp> insert_ops_from_input(const std::vector<int>& x);

}  // namespace treegen

#endif
