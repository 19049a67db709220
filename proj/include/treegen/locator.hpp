#ifndef TREEGEN_LOCATOR_HPP
#define TREEGEN_LOCATOR_HPP

#include "treegen/circuit.hpp"
#include "treegen/network.hpp"
#include "treegen/tree.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace treegen {

// Sentinel B and masking constant C for a tree with n edges over [1, m] and
// edit budget d.
struct Constants {
    std::int64_t B = 0;
    std::int64_t C = 0;
};
Constants make_constants(int n, int m, int d);

using ExprVec = std::vector<Expr>;
using ExprMat = std::vector<ExprVec>;

std::vector<Expr> constant_exprs(const std::vector<std::int64_t>& values);

// Positions of inward edges for queried DFS indices x over symbols t (any
// length L; sentinels count as outward symbols). Index vectors are 0-based
// here; traced wires are 1-based.
struct InwardStage {
    ExprVec p;   // [t_i <= m]
    ExprVec p1;  // DFS index of the inward edge at i, else 0
    ExprVec p2;  // p1 with 0 replaced by L
    ExprMat q;   // q[j][i] = [p2_i = x_j]
    ExprMat r1;  // r1[j][i] = t_i * q[j][i]
};
InwardStage inward_stage(Circuit& c, const ExprVec& t, const ExprVec& x, int m, bool with_labels = true);

// Pairing of inward and outward edges, independent of any query.
struct OutwardCore {
    ExprVec r;  // inward labels
    ExprVec s;  // outward labels
    ExprMat v;  // v[l][i]
    ExprMat v1;
    ExprMat w;  // w[l][i] = 1 iff t_i closes t_l
};
OutwardCore outward_core(Circuit& c, const ExprVec& t, const ExprVec& p, int m);

// Outward edges of the queried inward edges; r1[j][l] are inward labels of the
// queries at position l (zero elsewhere).
struct OutwardSelect {
    std::vector<ExprMat> w1;  // w1[j][l][i]
    ExprVec z;                // position of the outward edge, 0 if none
    ExprMat z1;               // z1[j][i] = label at that position
};
OutwardSelect outward_select(Circuit& c, const ExprVec& t, const OutwardCore& core, const ExprMat& r1, int m,
                             bool with_positions = true);

// x'_j = x_j unless it repeats an earlier nonzero x_k, in which case 0.
ExprVec drop_repeats(Circuit& c, const ExprVec& x);
// The same rule on concrete values.
std::vector<int> drop_repeats(const std::vector<int>& x);

void trace_inward(Circuit& c, const InwardStage& s);
void trace_outward(Circuit& c, const OutwardCore& core, const OutwardSelect& sel);

// Inputs x_1..x_d in [0, n]; outputs r'_{ji} row-major (d * 2n values).
ReluNetwork build_inward_locator(const EulerString& e, int d, BuildOptions opts = {});
// Inputs x_1..x_d in [0, n]; outputs z_1..z_d followed by z'_{ji} row-major.
ReluNetwork build_outward_locator(const EulerString& e, int d, BuildOptions opts = {});

class PositionOutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

struct OutwardCheckTrace {
    int in_count = 0;   // inward symbols strictly between l and i
    int out_count = 0;  // outward symbols strictly between l and i
    bool before = false;       // 1 <= l <= i - 1
    bool labels_match = false; // t_i = t_l + m
    bool balanced = false;     // in_count = out_count
    bool largest = false;      // no larger l' < i satisfies the first three
};

// Whether t_i (1-based) is the outward edge matching the inward edge t_l.
bool outward_predicate(const EulerString& e, int l, int i, OutwardCheckTrace* trace = nullptr);

}  // namespace treegen

#endif
