#include "treegen/ted.hpp"

#include "treegen/deletion.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <string>

namespace treegen {

LabeledTree apply_edit(const LabeledTree& t, const EditOp& op) {
    if (op.vertex < 0 || op.vertex > t.n()) throw TreeError("edit vertex " + std::to_string(op.vertex) + " out of range");
    switch (op.kind) {
    case EditKind::Delete:
        if (op.vertex == 0) throw TreeError("cannot delete the root");
        return apply_delete_reference(t, {op.vertex});
    case EditKind::Substitute: {
        if (op.vertex == 0) throw TreeError("cannot relabel the root");
        auto labels = t.labels();
        labels[op.vertex] = op.label;
        return LabeledTree(labels, t.parents(), std::max(t.m(), op.label));
    }
    case EditKind::Insert: {
        auto labels = t.labels();
        auto kids = t.all_children();
        const auto& ch = t.children(op.vertex);
        int k = static_cast<int>(ch.size());
        if (op.lower < 0 || op.lower > op.upper || op.upper > k) throw TreeError("insert range out of bounds");
        int fresh = t.size();
        labels.push_back(op.label);
        kids.emplace_back(ch.begin() + op.lower, ch.begin() + op.upper);
        std::vector<int> row(ch.begin(), ch.begin() + op.lower);
        row.push_back(fresh);
        row.insert(row.end(), ch.begin() + op.upper, ch.end());
        kids[op.vertex] = row;
        return LabeledTree::from_children(labels, kids, 0, std::max(t.m(), op.label));
    }
    }
    return t;
}

LabeledTree apply_script(LabeledTree t, const EditScript& script) {
    for (const auto& op : script) t = apply_edit(t, op);
    return t;
}

namespace {

struct Postorder {
    std::vector<int> label;     // by postorder index
    std::vector<int> leftmost;  // leftmost leaf descendant, postorder index
    std::vector<int> keyroots;
};

Postorder postorder(const LabeledTree& t) {
    Postorder p;
    std::function<int(int)> walk = [&](int v) {
        int first = -1;
        for (int c : t.children(v)) {
            int l = walk(c);
            if (first < 0) first = l;
        }
        int idx = static_cast<int>(p.label.size());
        p.label.push_back(t.label(v));
        p.leftmost.push_back(first < 0 ? idx : first);
        return first < 0 ? idx : first;
    };
    walk(0);
    const int N = static_cast<int>(p.label.size());
    std::vector<bool> seen(N, false);
    for (int i = N - 1; i >= 0; --i)
        if (!seen[p.leftmost[i]]) {
            seen[p.leftmost[i]] = true;
            p.keyroots.push_back(i);
        }
    std::sort(p.keyroots.begin(), p.keyroots.end());
    return p;
}

}  // namespace

int ted(const LabeledTree& a, const LabeledTree& b) {
    auto A = postorder(a);
    auto B = postorder(b);
    const int na = static_cast<int>(A.label.size());
    const int nb = static_cast<int>(B.label.size());
    std::vector<std::vector<int>> td(na, std::vector<int>(nb, 0));
    std::vector<std::vector<int>> fd(na + 1, std::vector<int>(nb + 1, 0));
    for (int i : A.keyroots)
        for (int j : B.keyroots) {
            const int li = A.leftmost[i];
            const int lj = B.leftmost[j];
            // fd[x][y]: forest li..li+x-1 vs lj..lj+y-1
            fd[0][0] = 0;
            for (int x = 1; x <= i - li + 1; ++x) fd[x][0] = fd[x - 1][0] + 1;
            for (int y = 1; y <= j - lj + 1; ++y) fd[0][y] = fd[0][y - 1] + 1;
            for (int x = 1; x <= i - li + 1; ++x)
                for (int y = 1; y <= j - lj + 1; ++y) {
                    const int u = li + x - 1;
                    const int v = lj + y - 1;
                    int best = std::min(fd[x - 1][y], fd[x][y - 1]) + 1;
                    if (A.leftmost[u] == li && B.leftmost[v] == lj) {
                        best = std::min(best, fd[x - 1][y - 1] + (A.label[u] != B.label[v]));
                        fd[x][y] = best;
                        td[u][v] = best;
                    } else {
                        best = std::min(best, fd[A.leftmost[u] - li][B.leftmost[v] - lj] + td[u][v]);
                        fd[x][y] = best;
                    }
                }
        }
    return td[na - 1][nb - 1];
}

namespace {

struct Node {
    int label = 0;
    std::vector<Node> kids;
};

Node to_node(const LabeledTree& t, int v) {
    Node n{t.label(v), {}};
    for (int c : t.children(v)) n.kids.push_back(to_node(t, c));
    return n;
}

void emit(const Node& n, int m, std::vector<std::int64_t>& out) {
    for (const auto& k : n.kids) {
        out.push_back(k.label);
        emit(k, m, out);
        out.push_back(k.label + m);
    }
}

using Forest = std::vector<Node>;

// All ways to add exactly k non-nested insertions to a subtree.
class StagedInserter {
public:
    StagedInserter(const std::vector<int>& labels) : labels_(labels) {}

    std::vector<Node> subtree(const Node& v, int k) const {
        std::vector<Node> out;
        for (auto& f : forests(v.kids, 0, k)) out.push_back(Node{v.label, std::move(f)});
        return out;
    }

private:
    // forests for kids[i..] using exactly k insertions
    std::vector<Forest> forests(const Forest& kids, std::size_t i, int k) const {
        std::vector<Forest> out;
        auto prepend = [&](const Forest& head, std::vector<Forest> tails) {
            for (auto& t : tails) {
                Forest f = head;
                f.insert(f.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
                out.push_back(std::move(f));
            }
        };
        if (k > 0)
            for (int l : labels_) prepend({Node{l, {}}}, forests(kids, i, k - 1));
        if (i == kids.size()) {
            if (k == 0) out.push_back({});
            return out;
        }
        // kids[i] stays a direct child
        for (int k1 = 0; k1 <= k; ++k1)
            for (auto& s : subtree(kids[i], k1)) prepend({s}, forests(kids, i + 1, k - k1));
        // a new vertex adopts kids[i..j]
        if (k > 0)
            for (std::size_t j = i; j < kids.size(); ++j)
                for (int used = 0; used <= k - 1; ++used)
                    for (auto& inner : runs(kids, i, j + 1, used))
                        for (int l : labels_) prepend({Node{l, inner}}, forests(kids, j + 1, k - 1 - used));
        return out;
    }

    // original kids[i..j) with exactly k insertions inside their subtrees
    std::vector<Forest> runs(const Forest& kids, std::size_t i, std::size_t j, int k) const {
        if (i == j) return k == 0 ? std::vector<Forest>{Forest{}} : std::vector<Forest>{};
        std::vector<Forest> out;
        for (int k1 = 0; k1 <= k; ++k1)
            for (auto& s : subtree(kids[i], k1))
                for (auto& rest : runs(kids, i + 1, j, k - k1)) {
                    Forest f{s};
                    f.insert(f.end(), rest.begin(), rest.end());
                    out.push_back(std::move(f));
                }
        return out;
    }

    std::vector<int> labels_;
};

int max_label(const LabeledTree& t, const std::vector<int>& labels) {
    int m = t.m();
    for (int l : labels) m = std::max(m, l);
    return m;
}

void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> pick;
    std::function<void(int)> rec = [&](int from) {
        if (static_cast<int>(pick.size()) == k) {
            fn(pick);
            return;
        }
        for (int v = from; v <= n; ++v) {
            pick.push_back(v);
            rec(v + 1);
            pick.pop_back();
        }
    };
    rec(1);
}

SymbolSet staged_ball(const LabeledTree& t, int d, const std::vector<int>& labels, BallOps ops, BallMode mode) {
    const int m = t.m();
    SymbolSet out;
    StagedInserter inserter(labels);
    auto finish = [&](const LabeledTree& t2, int k_ins) {
        if (k_ins == 0) {
            out.insert(encode_euler(t2).symbols);
            return;
        }
        for (const auto& root : inserter.subtree(to_node(t2, 0), k_ins)) {
            std::vector<std::int64_t> s;
            emit(root, m, s);
            out.insert(std::move(s));
        }
    };
    for (int kd = 0; kd <= (ops.del ? d : 0); ++kd)
        for_each_subset(t.n(), kd, [&](const std::vector<int>& dels) {
            auto t1 = apply_delete_reference(t, std::set<int>(dels.begin(), dels.end()));
            for (int ks = 0; ks <= (ops.sub ? d - kd : 0); ++ks)
                for_each_subset(t1.n(), ks, [&](const std::vector<int>& subs) {
                    std::function<void(std::size_t, std::vector<int>&)> relabel = [&](std::size_t idx,
                                                                                      std::vector<int>& lab) {
                        if (idx == subs.size()) {
                            auto t2 = LabeledTree(lab, t1.parents(), m);
                            int rest = d - kd - ks;
                            if (!ops.ins) {
                                if (mode == BallMode::AtMost || rest == 0) finish(t2, 0);
                                return;
                            }
                            if (mode == BallMode::Exactly) finish(t2, rest);
                            else
                                for (int ki = 0; ki <= rest; ++ki) finish(t2, ki);
                            return;
                        }
                        int v = subs[idx];
                        int old = lab[v];
                        for (int l : labels)
                            if (l != old) {
                                lab[v] = l;
                                relabel(idx + 1, lab);
                            }
                        lab[v] = old;
                    };
                    auto lab = t1.labels();
                    relabel(0, lab);
                });
        });
    return out;
}

SymbolSet general_ball(const LabeledTree& t, int d, const std::vector<int>& labels, BallOps ops, BallMode mode) {
    const int m = t.m();
    SymbolSet seen{encode_euler(t).symbols};
    std::vector<LabeledTree> frontier{t};
    for (int step = 1; step <= d; ++step) {
        std::vector<LabeledTree> next;
        SymbolSet shell;
        auto visit = [&](LabeledTree u) {
            auto s = encode_euler(u).symbols;
            if (seen.insert(s).second) {
                shell.insert(s);
                next.push_back(std::move(u));
            }
        };
        for (const auto& u : frontier) {
            for (int v = 1; v <= u.n(); ++v) {
                if (ops.del) visit(apply_edit(u, {EditKind::Delete, v}));
                if (ops.sub)
                    for (int l : labels)
                        if (l != u.label(v)) visit(apply_edit(u, {EditKind::Substitute, v, l}).with_alphabet(m));
            }
            if (ops.ins)
                for (int p = 0; p <= u.n(); ++p) {
                    int k = static_cast<int>(u.children(p).size());
                    for (int lo = 0; lo <= k; ++lo)
                        for (int hi = lo; hi <= k; ++hi)
                            for (int l : labels) visit(apply_edit(u, {EditKind::Insert, p, l, lo, hi}).with_alphabet(m));
                }
        }
        frontier = std::move(next);
        if (mode == BallMode::Exactly && step == d) return shell;
    }
    if (mode == BallMode::Exactly && d > 0) return {};
    return seen;
}

}  // namespace

std::uint64_t estimate_ball_work(const LabeledTree& t, int d, std::size_t num_labels, BallOps ops) {
    // branching factor of one operation on a tree grown by d vertices
    const double n = t.n() + d;
    double b = 0;
    if (ops.del) b += n;
    if (ops.sub) b += n * static_cast<double>(num_labels);
    if (ops.ins) b += (n + 1) * (n + 2) / 2 * static_cast<double>(num_labels) + n;
    double total = 1;
    for (int i = 0; i < d; ++i) total *= std::max(b, 1.0);
    return total > 1.8e19 ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(total);
}

SymbolSet edit_ball(const LabeledTree& t, int d, const std::vector<int>& labels, BallOps ops, BallOptions options) {
    if (d < 0) throw std::invalid_argument("negative edit budget");
    for (int l : labels)
        if (l < 1) throw std::invalid_argument("labels must be positive");
    if (max_label(t, labels) > t.m()) throw std::invalid_argument("label outside the tree's alphabet");
    if (options.cap != 0) {
        auto work = estimate_ball_work(t, d, labels.size(), ops);
        if (work > options.cap)
            throw BudgetTooLarge("edit ball needs about " + std::to_string(work) + " candidates (cap " +
                                 std::to_string(options.cap) + ")");
    }
    if (d == 0) return {encode_euler(t).symbols};
    return options.semantics == BallSemantics::Staged ? staged_ball(t, d, labels, ops, options.mode)
                                                      : general_ball(t, d, labels, ops, options.mode);
}

}  // namespace treegen
