#ifndef TREEGEN_DELETION_HPP
#define TREEGEN_DELETION_HPP

#include "treegen/locator.hpp"

#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

namespace treegen {

struct DeleteStage {
    ExprVec x1;
    InwardStage in;
    ExprVec q;   // q_i = sum_j q_ji
    ExprVec r1;  // inward labels to delete
    OutwardCore core;
    OutwardSelect sel;  // single row: w'_{li}, z'_i
    ExprVec P;
    ExprVec Q;
    ExprVec R;
    ExprMat R1;  // R1[j][i], shift j = 0..2d
    ExprVec y;
};

// Deletes the vertices at DFS positions `pos` from the sentinel-padded Euler
// string t (length 2n + 2d, padding B); outputs the first `out_len` symbols
// of the left-compacted result.
DeleteStage delete_stage(Circuit& c, const ExprVec& t, const ExprVec& pos, int m, std::int64_t B, int out_len);
void trace_delete(Circuit& c, const DeleteStage& s);

// Input: positions x_1..x_d in [0, n]. Output: 2n symbols, deleted edges
// leave sentinels at the tail.
ReluNetwork build_td(const EulerString& e, int d, BuildOptions opts = {});

class InteriorSentinel : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class RootDeletion : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Removes a sentinel prefix and suffix; sentinels anywhere else are an error.
std::vector<std::int64_t> strip_sentinels(const std::vector<std::int64_t>& y, std::int64_t B);

LabeledTree apply_delete_reference(const LabeledTree& tree, const std::set<int>& vertices);
std::set<int> delete_ops_from_input(const std::vector<int>& x);

}  // namespace treegen

#endif
