#include "treegen/circuit.hpp"

#include <algorithm>

namespace treegen {

namespace {

Range add(const Range& a, const Range& b) { return {a.lo + b.lo, a.hi + b.hi}; }

Range scale(const Range& a, const Rational& k) {
    if (k.sign() >= 0) return {a.lo * k, a.hi * k};
    return {a.hi * k, a.lo * k};
}

}  // namespace

Expr Expr::with_range(const Rational& lo, const Rational& hi) const {
    Expr e = *this;
    e.range_ = {lo, hi};
    return e;
}

Expr& Expr::operator+=(const Expr& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    constant_ += o.constant_;
    range_ = add(range_, o.range_);
    return *this;
}

Expr& Expr::operator-=(const Expr& o) { return *this += -o; }

Expr& Expr::operator*=(const Rational& k) {
    if (k.sign() == 0) {
        terms_.clear();
        constant_ = 0;
        range_ = {0, 0};
        return *this;
    }
    for (auto& t : terms_) t.coeff *= k;
    constant_ *= k;
    range_ = scale(range_, k);
    return *this;
}

Expr Expr::operator-() const {
    Expr e = *this;
    return e *= Rational(-1);
}

Expr sum(const std::vector<Expr>& xs) {
    Expr out(0);
    for (const auto& x : xs) out += x;
    return out;
}

Circuit::Circuit(BuildOptions opts, Rational masking) : opts_(opts), C_(std::move(masking)) {}

Expr Circuit::node_expr(int id) const {
    Expr e;
    e.terms_.push_back({id, Rational(1)});
    e.range_ = nodes_[id].range;
    return e;
}

void Circuit::normalize(Expr& e) {
    auto& t = e.terms_;
    if (t.size() < 2) {
        if (t.size() == 1 && t[0].coeff.sign() == 0) t.clear();
        return;
    }
    std::sort(t.begin(), t.end(), [](const Expr::Term& a, const Expr::Term& b) { return a.node < b.node; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < t.size();) {
        Expr::Term acc = t[r];
        std::size_t s = r + 1;
        while (s < t.size() && t[s].node == acc.node) acc.coeff += t[s++].coeff;
        if (acc.coeff.sign() != 0) t[w++] = std::move(acc);
        r = s;
    }
    t.resize(w);
}

Expr Circuit::input(const Rational& lo, const Rational& hi) {
    Node n;
    n.level = 0;
    n.input_index = num_inputs_++;
    n.range = {lo, hi};
    if (nodes_.size() != static_cast<std::size_t>(n.input_index))
        throw BuildError("inputs must be declared before any unit");
    nodes_.push_back(std::move(n));
    return node_expr(static_cast<int>(nodes_.size()) - 1);
}

Expr Circuit::relu(const Expr& e0) {
    Expr e = e0;
    normalize(e);
    if (opts_.fold_constants) {
        if (e.is_constant()) return Expr(treegen::relu(e.constant_));
        if (e.hi().sign() <= 0) return Expr(0);
        if (e.lo().sign() >= 0) return e;
    }
    Node n;
    n.level = 1;
    for (const auto& t : e.terms_) n.level = std::max(n.level, nodes_[t.node].level + 1);
    n.terms = std::move(e.terms_);
    n.bias = e.constant_;
    n.range = {treegen::relu(e.lo()), treegen::relu(e.hi())};
    max_level_ = std::max(max_level_, n.level);
    nodes_.push_back(std::move(n));
    return node_expr(static_cast<int>(nodes_.size()) - 1);
}

void Circuit::trace(const std::string& name, const std::vector<Expr>& values, std::vector<int> dims,
                    std::vector<int> origins) {
    std::string full = prefix_ + name;
    for (const auto& t : traces_)
        if (t.name == full) throw BuildError("wire '" + full + "' traced twice");
    TraceEntry entry{full, std::move(dims), std::move(origins), values};
    for (auto& v : entry.values) normalize(v);
    traces_.push_back(std::move(entry));
}

void Circuit::trace(const std::string& name, const std::vector<std::vector<Expr>>& values, int origin0,
                    int origin1) {
    std::vector<Expr> flat;
    int cols = values.empty() ? 0 : static_cast<int>(values.front().size());
    for (const auto& row : values) {
        if (static_cast<int>(row.size()) != cols) throw BuildError("ragged wire '" + name + "'");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    trace(name, flat, {static_cast<int>(values.size()), cols}, {origin0, origin1});
}

void Circuit::require_grid(const Expr& e, const Rational& grid, const char* what) {
    if (e.is_constant()) {
        if (!(e.constant() / grid).is_integer())
            throw BuildError(std::string(what) + ": constant " + e.constant().str() + " off grid " + grid.str());
        return;
    }
    Expr v = e;
    normalize(v);
    contracts_.push_back({std::move(v), grid, prefix_ + what});
}

ReluNetwork Circuit::compile(const std::vector<Expr>& outputs0) const {
    const int N = static_cast<int>(nodes_.size());
    const int K = max_level_;
    std::vector<Expr> outputs = outputs0;
    for (auto& o : outputs) normalize(o);

    // last level at which each node's value is read
    std::vector<int> last_use(N, 0);
    for (int v = num_inputs_; v < N; ++v)
        for (const auto& t : nodes_[v].terms) last_use[t.node] = std::max(last_use[t.node], nodes_[v].level);
    for (const auto& o : outputs)
        for (const auto& t : o.terms()) last_use[t.node] = K + 1;

    // coordinates: own[v] in layer level(v); carry[v][l - level(v) - 1] in layer l
    std::vector<int> own(N, -1);
    std::vector<std::vector<int>> carry(N);
    std::vector<char> paired(N, 0);
    std::vector<int> width(K + 2, 0);
    width[0] = num_inputs_;
    std::vector<std::vector<int>> units_at(K + 1);
    for (int v = 0; v < N; ++v) {
        const Node& n = nodes_[v];
        if (n.input_index >= 0) {
            own[v] = n.input_index;
            paired[v] = n.range.lo.sign() < 0;
        } else {
            units_at[n.level].push_back(v);
        }
    }
    for (int l = 1; l <= K; ++l)
        for (int v : units_at[l]) own[v] = width[l]++;
    for (int v = 0; v < N; ++v) {
        int lv = nodes_[v].level;
        for (int l = lv + 1; l < last_use[v] && l <= K; ++l) {
            carry[v].push_back(width[l]);
            width[l] += paired[v] ? 2 : 1;
        }
    }

    // value of node v as read from layer l: list of (coord, sign)
    auto read = [&](int v, int l, const Rational& coeff, std::vector<Eigen::Triplet<Rational>>& trips, int row) {
        int lv = nodes_[v].level;
        if (l == lv) {
            trips.emplace_back(row, own[v], coeff);
            return;
        }
        int c = carry[v][l - lv - 1];
        trips.emplace_back(row, c, coeff);
        if (paired[v]) trips.emplace_back(row, c + 1, -coeff);
    };

    std::vector<Layer> layers;
    layers.reserve(K + 1);
    for (int l = 1; l <= K; ++l) {
        std::vector<Eigen::Triplet<Rational>> trips;
        std::vector<Rational> bias(width[l]);
        for (int v : units_at[l]) {
            const Node& n = nodes_[v];
            bias[own[v]] = n.bias;
            for (const auto& t : n.terms) read(t.node, l - 1, t.coeff, trips, own[v]);
        }
        for (int v = 0; v < N; ++v) {
            int lv = nodes_[v].level;
            if (!(lv < l && l < last_use[v])) continue;
            int c = carry[v][l - lv - 1];
            if (paired[v]) {
                if (l - 1 == lv) {
                    trips.emplace_back(c, own[v], Rational(1));
                    trips.emplace_back(c + 1, own[v], Rational(-1));
                } else {
                    int p = carry[v][l - lv - 2];
                    trips.emplace_back(c, p, Rational(1));
                    trips.emplace_back(c + 1, p + 1, Rational(1));
                }
            } else {
                read(v, l - 1, Rational(1), trips, c);
            }
        }
        SparseRational w(width[l], width[l - 1]);
        w.setFromTriplets(trips.begin(), trips.end());
        w.makeCompressed();
        layers.push_back(Layer{std::move(w), std::move(bias), true});
    }
    {
        std::vector<Eigen::Triplet<Rational>> trips;
        std::vector<Rational> bias(outputs.size());
        for (std::size_t r = 0; r < outputs.size(); ++r) {
            bias[r] = outputs[r].constant();
            for (const auto& t : outputs[r].terms()) read(t.node, K, t.coeff, trips, static_cast<int>(r));
        }
        SparseRational w(static_cast<int>(outputs.size()), width[K]);
        w.setFromTriplets(trips.begin(), trips.end());
        w.makeCompressed();
        layers.push_back(Layer{std::move(w), std::move(bias), false});
    }

    ReluNetwork net(num_inputs_, std::move(layers));
    auto ref_of = [&](const Expr& e) {
        WireRef r;
        r.constant = e.constant();
        for (const auto& t : e.terms()) r.terms.push_back({nodes_[t.node].level, own[t.node], t.coeff});
        return r;
    };
    for (const auto& t : traces_) {
        Wire w{t.dims, t.origins, {}};
        w.refs.reserve(t.values.size());
        for (const auto& v : t.values) w.refs.push_back(ref_of(v));
        net.trace()[t.name] = std::move(w);
    }
    for (const auto& c : contracts_) net.contracts().push_back({ref_of(c.value), c.grid, c.what});
    return net;
}

// ---- gadgets ---------------------------------------------------------------

Expr max_of(Circuit& c, const Expr& a, const Expr& b) { return a + c.relu(b - a); }

Expr delta(Circuit& c, const Expr& a, const Expr& b, const Rational& grid) {
    Expr e = (a - b) / grid;
    c.require_grid(a - b, grid, "delta argument");
    return c.relu(Expr(1) - c.relu(e) - c.relu(-e));
}

Expr heaviside(Circuit& c, const Expr& x) {
    c.require_grid(x, 1, "heaviside argument");
    return (c.relu(x) - c.relu(x - Expr(1))).with_range(0, 1);
}

Expr at_least(Circuit& c, const Expr& x, const Rational& theta, const Rational& grid) {
    c.require_grid(x, grid, "threshold argument");
    Rational on_grid = (theta / grid).ceil() * grid;
    Expr y = (x - Expr(on_grid)) / grid;
    return (c.relu(y + Expr(1)) - c.relu(y)).with_range(0, 1);
}

Expr at_most(Circuit& c, const Expr& x, const Rational& theta, const Rational& grid) {
    return at_least(c, -x, -theta, grid);
}

Expr interval(Circuit& c, const Expr& x, const Rational& a, const Rational& b, const Rational& grid,
              bool left_open) {
    Expr in = logical_and(c, {at_least(c, x, a, grid), at_most(c, x, b, grid)});
    if (left_open && (a / grid).is_integer()) in = (in - delta(c, x, Expr(a), grid)).with_range(0, 1);
    return in;
}

Expr logical_and(Circuit& c, const std::vector<Expr>& bits) {
    if (bits.empty()) return Expr(1);
    if (bits.size() == 1) return bits.front();
    Expr s = sum(bits);
    return c.relu(s - Expr(static_cast<std::int64_t>(bits.size()) - 1)).with_range(0, 1);
}

Expr logical_or(Circuit& c, const Expr& u, const Expr& v) {
    Expr s = u + v;
    return (s - c.relu(s - Expr(1))).with_range(0, 1);
}

namespace {

void audit(const Circuit& c, const Expr& v, const char* what) {
    if (c.masking().sign() <= 0) throw BuildError(std::string(what) + ": masking constant not set");
    if (v.hi() * Rational(2) >= c.masking())
        throw BuildError(std::string(what) + ": value bound " + v.hi().str() + " not below C/2 = " +
                         (c.masking() / Rational(2)).str());
}

}  // namespace

Expr keep_if(Circuit& c, const Expr& v, const Expr& cond) {
    audit(c, v, "keep_if");
    if (cond.lo().sign() < 0 || cond.hi() > Rational(1)) throw BuildError("keep_if: condition not binary");
    return c.relu(v - c.masking() * (Expr(1) - cond));
}

Expr drop_if(Circuit& c, const Expr& v, const Expr& cond) {
    audit(c, v, "drop_if");
    if (cond.lo().sign() < 0) throw BuildError("drop_if: negative condition");
    return c.relu(v - c.masking() * cond);
}

Expr product(Circuit& c, const Expr& t, const Expr& q) {
    if (t.is_constant() && !c.options().product_free) return t.constant() * q;
    if (t.lo().sign() < 0) throw BuildError("product: factor may be negative");
    return keep_if(c, t, q);
}

}  // namespace treegen
