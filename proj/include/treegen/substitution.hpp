#ifndef TREEGEN_SUBSTITUTION_HPP
#define TREEGEN_SUBSTITUTION_HPP

#include "treegen/locator.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace treegen {

struct SubstStage {
    ExprVec x1;  // positions with repeats removed
    InwardStage in;
    OutwardCore core;
    OutwardSelect sel;
    ExprMat P;
    ExprVec P1;
    ExprMat Q;
    ExprMat Q1;
    ExprVec R;
    ExprVec u;
};

// Relabels the vertices at DFS positions `pos` of the Euler string t with
// `vals` (inward) and vals + m (outward).
SubstStage subst_stage(Circuit& c, const ExprVec& t, const ExprVec& pos, const ExprVec& vals, int m);
void trace_subst(Circuit& c, const SubstStage& s);

// Input: positions x_1..x_d in [0, n] then labels x_{d+1}..x_{2d} in [1, m].
// Output: the 2n symbols of the relabeled Euler string.
ReluNetwork build_ts(const EulerString& e, int d, BuildOptions opts = {});

class RootSubstitution : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class LabelOutOfRange : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using SubstOps = std::vector<std::pair<int, int>>;  // (vertex, new label)

LabeledTree apply_subst_reference(const LabeledTree& tree, const SubstOps& ops);
// Operations selected by a network input: repeats and zero positions dropped.
SubstOps subst_ops_from_input(const std::vector<int>& x);

}  // namespace treegen

#endif
