#ifndef TREEGEN_UNIFIED_HPP
#define TREEGEN_UNIFIED_HPP

#include "treegen/deletion.hpp"
#include "treegen/insertion.hpp"
#include "treegen/substitution.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace treegen {

class InputNotOnGrid : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct DiscretizationConfig {
    int n = 1;
    int m = 1;
    Rational delta{1, 100};
};

enum class SlotKind { Position, Value };

// Segment of slot j (0-based) in a 7d input: deletion positions, substitution
// positions, substitution values, insertion parents, lower bounds, upper
// bounds, insertion values.
SlotKind slot_kind(int j, int d);

// Positions map ((i-1)/n, i/n] to i in 0..n; values map [0, 1/m] to 1 and
// ((l-1)/m, l/m] to l.
int discretize(const Rational& x, SlotKind kind, const DiscretizationConfig& cfg);
void check_on_grid(const std::vector<Rational>& x, const Rational& delta);

// Budget rule on discretized slots: returns x' with over-budget deletion,
// substitution and insertion positions (and the insertion slots' bounds and
// values) replaced by B. Substitution values pass through.
std::vector<std::int64_t> budget_filter(const std::vector<int>& ints, int d, std::int64_t B);

struct UnifiedStage {
    ExprMat Pgrid;  // Pgrid[j][i] for position slots, empty rows elsewhere
    ExprMat Qgrid;  // Qgrid[j][l-1] for value slots
    ExprVec P1;     // P'_j (positions), Q'_j (values)
    ExprVec R, R1;  // budget; entries outside their segments are 0
    ExprVec S, S1;  // masked positions / companions
    ExprVec x1;     // preprocessed input
    DeleteStage del;
    SubstStage sub;
    InsertStage ins;
    ExprVec y;
};

// Input: 7d rationals in [0, 1) on the grid. Output: 2n + 2d symbols; the
// edited string is what remains after trimming sentinels at both ends.
ReluNetwork build_te(const EulerString& e, int d, const Rational& delta = Rational(1, 100), BuildOptions opts = {});

// Symbolic pipeline on the same input: discretize, filter, delete, relabel,
// insert; returns the full 2n + 2d output.
std::vector<std::int64_t> te_reference(const EulerString& e, int d, const std::vector<Rational>& x,
                                       const Rational& delta = Rational(1, 100));
// The same pipeline from already discretized slots.
std::vector<std::int64_t> te_reference_ints(const EulerString& e, int d, const std::vector<int>& ints);

}  // namespace treegen

#endif
