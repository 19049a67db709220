#include "treegen/tree.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace treegen {

LabeledTree::LabeledTree(std::vector<int> labels, std::vector<int> parents, int m)
    : labels_(std::move(labels)), parents_(std::move(parents)), m_(m) {
    if (labels_.empty() || labels_.size() != parents_.size())
        throw TreeError("labels and parents must be non-empty and of equal length");
    if (m_ < 1) throw TreeError("alphabet size must be positive");
    if (parents_[0] != -1) throw TreeError("vertex 0 must be the root (parent -1)");
    if (labels_[0] != 0) throw TreeError("root label must be the reserved label 0");
    std::vector<int> path{0};
    for (int i = 1; i < size(); ++i) {
        if (labels_[i] < 1 || labels_[i] > m_)
            throw TreeError("label of vertex " + std::to_string(i) + " outside [1, m]");
        int p = parents_[i];
        if (p < 0 || p >= i) throw TreeError("parent of vertex " + std::to_string(i) + " must precede it");
        while (!path.empty() && path.back() != p) path.pop_back();
        if (path.empty()) throw TreeError("vertex order is not a DFS preorder at vertex " + std::to_string(i));
        path.push_back(i);
    }
    build_children();
}

void LabeledTree::build_children() {
    children_.assign(labels_.size(), {});
    for (int i = 1; i < size(); ++i) children_[parents_[i]].push_back(i);
}

int LabeledTree::max_degree() const {
    std::size_t best = 0;
    for (const auto& c : children_) best = std::max(best, c.size());
    return static_cast<int>(best);
}

LabeledTree LabeledTree::from_children(const std::vector<int>& labels,
                                       const std::vector<std::vector<int>>& children, int root, int m) {
    std::vector<int> out_labels;
    std::vector<int> out_parents;
    // iterative preorder: (vertex, new parent id)
    std::vector<std::pair<int, int>> stack{{root, -1}};
    while (!stack.empty()) {
        auto [v, p] = stack.back();
        stack.pop_back();
        int id = static_cast<int>(out_labels.size());
        out_labels.push_back(p < 0 ? 0 : labels.at(v));
        out_parents.push_back(p);
        const auto& kids = children.at(v);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.emplace_back(*it, id);
    }
    return LabeledTree(std::move(out_labels), std::move(out_parents), m);
}

EulerString encode_euler(const LabeledTree& tree) {
    EulerString e;
    e.m = tree.m();
    e.symbols.reserve(2 * tree.n());
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto& [v, next] = stack.back();
        const auto& kids = tree.children(v);
        if (next < kids.size()) {
            int c = kids[next++];
            e.symbols.push_back(tree.label(c));
            stack.emplace_back(c, 0);
        } else {
            if (v != 0) e.symbols.push_back(tree.label(v) + tree.m());
            stack.pop_back();
        }
    }
    return e;
}

std::string to_string(EulerErrorKind kind) {
    switch (kind) {
        case EulerErrorKind::Unbalanced: return "Unbalanced";
        case EulerErrorKind::BadSymbol: return "BadSymbol";
        case EulerErrorKind::MismatchedPair: return "MismatchedPair";
    }
    return "?";
}

namespace {

EulerDiagnostic fail(EulerErrorKind kind, int pos, const std::string& what) {
    EulerDiagnostic d;
    d.ok = false;
    d.kind = kind;
    d.position = pos;
    d.message = to_string(kind) + " at position " + std::to_string(pos) + ": " + what;
    return d;
}

// Shared scan; fills labels/parents when the string is valid.
EulerDiagnostic scan(const std::vector<std::int64_t>& s, int m, std::vector<int>* labels,
                     std::vector<int>* parents) {
    if (m < 1) return fail(EulerErrorKind::BadSymbol, 0, "alphabet size must be positive");
    std::vector<int> stack{0};
    if (labels) *labels = {0};
    if (parents) *parents = {-1};
    for (std::size_t i = 0; i < s.size(); ++i) {
        int pos = static_cast<int>(i) + 1;
        std::int64_t x = s[i];
        if (x < 1 || x > 2 * static_cast<std::int64_t>(m))
            return fail(EulerErrorKind::BadSymbol, pos, "symbol " + std::to_string(x) + " outside [1, 2m]");
        if (x <= m) {
            int id = labels ? static_cast<int>(labels->size()) : pos;
            if (labels) labels->push_back(static_cast<int>(x));
            if (parents) parents->push_back(stack.back());
            stack.push_back(id);
            if (!labels) stack.back() = static_cast<int>(x);  // track label only
        } else {
            if (stack.size() == 1) return fail(EulerErrorKind::Unbalanced, pos, "outward symbol with no open edge");
            int open_label = labels ? (*labels)[stack.back()] : stack.back();
            if (x != open_label + m)
                return fail(EulerErrorKind::MismatchedPair, pos,
                            std::to_string(x) + " does not close inward symbol " + std::to_string(open_label));
            stack.pop_back();
        }
    }
    if (stack.size() != 1)
        return fail(EulerErrorKind::Unbalanced, static_cast<int>(s.size()), "unclosed inward symbols at end");
    return {};
}

}  // namespace

EulerDiagnostic validate_euler(const std::vector<std::int64_t>& symbols, int m) {
    return scan(symbols, m, nullptr, nullptr);
}

LabeledTree decode_euler(const std::vector<std::int64_t>& symbols, int m) {
    std::vector<int> labels, parents;
    auto diag = scan(symbols, m, &labels, &parents);
    if (!diag.ok) throw EulerError(diag);
    return LabeledTree(std::move(labels), std::move(parents), m);
}

EdgePositions edge_positions(const LabeledTree& tree) {
    EdgePositions p;
    p.inward.assign(tree.size(), 0);
    p.outward.assign(tree.size(), 0);
    int pos = 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto& [v, next] = stack.back();
        const auto& kids = tree.children(v);
        if (next < kids.size()) {
            int c = kids[next++];
            p.inward[c] = ++pos;
            stack.emplace_back(c, 0);
        } else {
            if (v != 0) p.outward[v] = ++pos;
            stack.pop_back();
        }
    }
    p.outward[0] = 2 * tree.n() + 1;
    return p;
}

namespace {

std::vector<int> read_ints(const std::string& line, const char* what) {
    std::istringstream ss(line);
    std::vector<int> out;
    std::string tok;
    while (ss >> tok) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            throw TreeError(std::string("bad integer '") + tok + "' in " + what + " line");
        out.push_back(v);
    }
    return out;
}

bool next_content_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
}

}  // namespace

LabeledTree read_tree(std::istream& in) {
    std::string line;
    if (!next_content_line(in, line)) throw TreeError("missing vertex count line");
    auto count = read_ints(line, "count");
    if (count.size() != 1 || count[0] < 1) throw TreeError("first line must hold the vertex count n+1 >= 1");
    if (!next_content_line(in, line)) throw TreeError("missing labels line");
    auto labels = read_ints(line, "labels");
    std::vector<int> parents;
    if (count[0] == 1 && labels.size() == 1) {
        parents = {-1};
        if (next_content_line(in, line)) parents = read_ints(line, "parents");
    } else {
        if (!next_content_line(in, line)) throw TreeError("missing parents line");
        parents = read_ints(line, "parents");
    }
    if (static_cast<int>(labels.size()) != count[0] || static_cast<int>(parents.size()) != count[0])
        throw TreeError("labels/parents lines must each hold exactly n+1 entries");
    int m = 1;
    for (int l : labels) m = std::max(m, l);
    // optional fourth line: alphabet size
    if (next_content_line(in, line)) {
        auto extra = read_ints(line, "alphabet");
        if (extra.size() != 1) throw TreeError("optional fourth line must hold the alphabet size m");
        if (extra[0] < m) throw TreeError("alphabet size smaller than the largest label");
        m = extra[0];
    }
    return LabeledTree(std::move(labels), std::move(parents), m);
}

LabeledTree read_tree_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TreeError("cannot open tree file " + path);
    return read_tree(in);
}

std::string write_tree(const LabeledTree& tree) {
    std::ostringstream os;
    os << tree.size() << '\n';
    for (int i = 0; i < tree.size(); ++i) os << (i ? " " : "") << tree.label(i);
    os << '\n';
    for (int i = 0; i < tree.size(); ++i) os << (i ? " " : "") << tree.parent(i);
    os << '\n' << tree.m() << '\n';
    return os.str();
}

std::vector<std::int64_t> parse_symbols(std::string_view text, std::optional<std::int64_t> sentinel) {
    std::vector<std::int64_t> out;
    std::size_t i = 0;
    while (i <= text.size()) {
        std::size_t j = text.find(',', i);
        if (j == std::string_view::npos) j = text.size();
        std::string tok(text.substr(i, j - i));
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        if (!tok.empty()) {
            if (tok == "B") {
                if (!sentinel) throw TreeError("sentinel B not allowed here");
                out.push_back(*sentinel);
            } else {
                std::int64_t v = 0;
                auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
                if (ec != std::errc() || ptr != tok.data() + tok.size()) throw TreeError("bad symbol '" + tok + "'");
                out.push_back(v);
            }
        } else if (j < text.size()) {
            throw TreeError("empty symbol in list");
        }
        i = j + 1;
    }
    return out;
}

std::string format_symbols(const std::vector<std::int64_t>& symbols, std::optional<std::int64_t> sentinel) {
    std::string out;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (i) out += ',';
        if (sentinel && symbols[i] == *sentinel)
            out += 'B';
        else
            out += std::to_string(symbols[i]);
    }
    return out;
}

LabeledTree random_tree(int n, int m, std::mt19937_64& rng) {
    std::vector<int> labels{0}, parents{-1}, path{0};
    std::uniform_int_distribution<int> lab(1, m);
    for (int i = 1; i <= n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(0, path.size() - 1);
        std::size_t k = pick(rng);
        path.resize(k + 1);
        parents.push_back(path.back());
        labels.push_back(lab(rng));
        path.push_back(i);
    }
    return LabeledTree(std::move(labels), std::move(parents), m);
}

}  // namespace treegen
