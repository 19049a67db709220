#ifndef TREEGEN_TREE_HPP
#define TREEGEN_TREE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace treegen {

class TreeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rooted ordered vertex-labeled tree. Vertices are numbered in DFS preorder,
// the root is vertex 0 and carries the reserved label 0; every other label is
// in [1, m]. Siblings are ordered by ascending index.
class LabeledTree {
public:
    LabeledTree() : labels_{0}, parents_{-1}, m_(1) { build_children(); }
    LabeledTree(std::vector<int> labels, std::vector<int> parents, int m);

    // Builds from per-vertex child lists in any numbering; the result is
    // renumbered into DFS preorder starting at `root`.
    static LabeledTree from_children(const std::vector<int>& labels,
                                     const std::vector<std::vector<int>>& children, int root, int m);

    int n() const { return static_cast<int>(labels_.size()) - 1; }
    int size() const { return static_cast<int>(labels_.size()); }
    int m() const { return m_; }
    int label(int v) const { return labels_.at(v); }
    int parent(int v) const { return parents_.at(v); }
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<int>& parents() const { return parents_; }
    const std::vector<int>& children(int v) const { return children_.at(v); }
    const std::vector<std::vector<int>>& all_children() const { return children_; }
    int max_degree() const;

    LabeledTree with_alphabet(int m) const { return LabeledTree(labels_, parents_, m); }

    friend bool operator==(const LabeledTree& a, const LabeledTree& b) {
        return a.labels_ == b.labels_ && a.parents_ == b.parents_;
    }

private:
    void build_children();

    std::vector<int> labels_;
    std::vector<int> parents_;
    std::vector<std::vector<int>> children_;
    int m_;
};

// Euler string E(T): labels of inward (b) and outward (b + m) edges in DFS order.
struct EulerString {
    std::vector<std::int64_t> symbols;
    int m = 1;

    int n() const { return static_cast<int>(symbols.size()) / 2; }
    friend bool operator==(const EulerString&, const EulerString&) = default;
};

enum class EulerErrorKind { Unbalanced, BadSymbol, MismatchedPair };

struct EulerDiagnostic {
    bool ok = true;
    EulerErrorKind kind = EulerErrorKind::Unbalanced;
    int position = 0;  // 1-based index of the offending symbol
    std::string message;
};

class EulerError : public TreeError {
public:
    EulerError(EulerDiagnostic diag) : TreeError(diag.message), diag_(std::move(diag)) {}
    const EulerDiagnostic& diagnostic() const { return diag_; }

private:
    EulerDiagnostic diag_;
};

EulerString encode_euler(const LabeledTree& tree);
LabeledTree decode_euler(const std::vector<std::int64_t>& symbols, int m);
EulerDiagnostic validate_euler(const std::vector<std::int64_t>& symbols, int m);
std::string to_string(EulerErrorKind kind);

// 1-based positions of each vertex's inward and outward symbol; the root gets
// 0 and 2n+1 so that "just after the root's inward edge" is position 1.
struct EdgePositions {
    std::vector<int> inward;
    std::vector<int> outward;
};
EdgePositions edge_positions(const LabeledTree& tree);

// Three-line text format: vertex count, labels (root first, 0), parents (-1 for root).
LabeledTree read_tree(std::istream& in);
LabeledTree read_tree_file(const std::string& path);
std::string write_tree(const LabeledTree& tree);

// Comma-separated symbols; "B" stands for the sentinel when one is given.
std::vector<std::int64_t> parse_symbols(std::string_view text, std::optional<std::int64_t> sentinel = {});
std::string format_symbols(const std::vector<std::int64_t>& symbols,
                           std::optional<std::int64_t> sentinel = {});

// Random tree with n edges, labels uniform in [1, m]; each new vertex hangs off
// a uniformly chosen vertex on the current rightmost path.
LabeledTree random_tree(int n, int m, std::mt19937_64& rng);

}  // namespace treegen

#endif
