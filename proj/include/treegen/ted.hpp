#ifndef TREEGEN_TED_HPP
#define TREEGEN_TED_HPP

#include "treegen/tree.hpp"

#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

namespace treegen {

class BudgetTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EditKind { Substitute, Delete, Insert };

// Insert makes a new child of `vertex` labeled `label` that adopts the
// children with 0-based child ranks lower..upper-1 (lower == upper adds a
// leaf in front of rank `lower`).
struct EditOp {
    EditKind kind = EditKind::Delete;
    int vertex = 0;
    int label = 0;
    int lower = 0;
    int upper = 0;
};
using EditScript = std::vector<EditOp>;

LabeledTree apply_edit(const LabeledTree& t, const EditOp& op);
LabeledTree apply_script(LabeledTree t, const EditScript& script);

// Unit-cost ordered tree edit distance (Zhang and Shasha). Roots share the
// reserved label and are always matched.
int ted(const LabeledTree& a, const LabeledTree& b);

enum class BallMode { AtMost, Exactly };
// Staged: simultaneous deletions on the original tree, substitutions on the
// result, then insertions whose parents and adopted children are all
// pre-existing vertices. General: sequences of single operations.
enum class BallSemantics { Staged, General };

struct BallOps {
    bool sub = false;
    bool del = false;
    bool ins = false;
};

struct BallOptions {
    BallMode mode = BallMode::AtMost;
    BallSemantics semantics = BallSemantics::Staged;
    // Upper bound on the estimated number of candidate trees; 0 disables it.
    std::uint64_t cap = 20'000'000;
};

using SymbolSet = std::set<std::vector<std::int64_t>>;

// Substitutions always change the label. AtMost collects everything reachable
// with at most d operations; Exactly keeps results needing d operations
// (general) or built from exactly d staged operations.
SymbolSet edit_ball(const LabeledTree& t, int d, const std::vector<int>& labels, BallOps ops,
                    BallOptions options = {});

std::uint64_t estimate_ball_work(const LabeledTree& t, int d, std::size_t num_labels, BallOps ops);

}  // namespace treegen

#endif
