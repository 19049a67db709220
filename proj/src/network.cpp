#include "treegen/network.hpp"

#include <fstream>
#include <limits>
#include <numeric>

namespace treegen {

using nlohmann::json;

namespace {

SparseRational make_sparse(int rows, int cols, const std::vector<std::map<int, Rational>>& entries) {
    std::vector<Eigen::Triplet<Rational>> trips;
    for (int r = 0; r < rows; ++r)
        for (const auto& [c, v] : entries[r])
            if (v.sign() != 0) trips.emplace_back(r, c, v);
    SparseRational m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

std::vector<std::map<int, Rational>> rows_of(const SparseRational& m) {
    std::vector<std::map<int, Rational>> out(m.rows());
    for (int r = 0; r < m.outerSize(); ++r)
        for (SparseRational::InnerIterator it(m, r); it; ++it) out[r][static_cast<int>(it.col())] = it.value();
    return out;
}

Layer identity_layer(int width, bool relu) {
    std::vector<std::map<int, Rational>> e(width);
    for (int i = 0; i < width; ++i) e[i][i] = 1;
    return Layer{make_sparse(width, width, e), std::vector<Rational>(width), relu};
}

// Rewrites a term that reads coordinate `coord` of an affine layer's output as
// terms on that layer's input (which lives at activation index `below`).
void expand_through(const Layer& affine, int below, const WireRef::Term& t, WireRef& out) {
    for (SparseRational::InnerIterator it(affine.weights, t.coord); it; ++it)
        out.terms.push_back({below, static_cast<int>(it.col()), t.coeff * it.value()});
    out.constant += t.coeff * affine.bias[t.coord];
}

std::string rat_str(const Rational& r) {
    std::string s = r.str();
    if (s.find('/') == std::string::npos) s += "/1";
    return s;
}

json ref_to_json(const WireRef& r) {
    json terms = json::array();
    for (const auto& t : r.terms) terms.push_back(json::array({t.layer, t.coord, rat_str(t.coeff)}));
    return json{{"c", rat_str(r.constant)}, {"t", std::move(terms)}};
}

WireRef ref_from_json(const json& j) {
    WireRef r;
    r.constant = Rational::parse(j.at("c").get<std::string>());
    for (const auto& t : j.at("t"))
        r.terms.push_back({t.at(0).get<int>(), t.at(1).get<int>(), Rational::parse(t.at(2).get<std::string>())});
    return r;
}

}  // namespace

ReluNetwork::ReluNetwork(int input_width, std::vector<Layer> layers)
    : input_width_(input_width), layers_(std::move(layers)) {
    check_shapes();
}

void ReluNetwork::check_shapes() const {
    if (layers_.empty()) throw WidthMismatch("network needs at least an output layer");
    int w = input_width_;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const auto& L = layers_[k];
        if (L.in_width() != w)
            throw WidthMismatch("layer " + std::to_string(k + 1) + " expects " + std::to_string(L.in_width()) +
                                " inputs, previous width is " + std::to_string(w));
        if (static_cast<int>(L.bias.size()) != L.out_width())
            throw WidthMismatch("bias length mismatch in layer " + std::to_string(k + 1));
        w = L.out_width();
    }
}

int ReluNetwork::output_width() const { return layers_.empty() ? 0 : layers_.back().out_width(); }

NetworkStats ReluNetwork::stats() const {
    NetworkStats s;
    s.depth = depth();
    for (int k = 0; k < depth(); ++k) s.widths.push_back(layers_[k].out_width());
    if (!s.widths.empty()) {
        s.total = std::accumulate(s.widths.begin(), s.widths.end(), 0LL);
        s.min_width = *std::min_element(s.widths.begin(), s.widths.end());
        s.max_width = *std::max_element(s.widths.begin(), s.widths.end());
        s.avg_width = static_cast<double>(s.total) / static_cast<double>(s.widths.size());
    }
    return s;
}

long long ReluNetwork::nonzeros() const {
    long long n = 0;
    for (const auto& L : layers_) n += L.weights.nonZeros();
    return n;
}

std::vector<std::vector<Rational>> ReluNetwork::eval_all(const std::vector<Rational>& x, bool check) const {
    if (static_cast<int>(x.size()) != input_width_)
        throw WidthMismatch("input has " + std::to_string(x.size()) + " values, network expects " +
                            std::to_string(input_width_));
    std::vector<std::vector<Rational>> acts;
    acts.reserve(layers_.size() + 1);
    acts.push_back(x);
    for (const auto& L : layers_) {
        const auto& in = acts.back();
        std::vector<Rational> out(L.out_width());
        for (int r = 0; r < L.out_width(); ++r) {
            Rational acc = L.bias[r];
            for (SparseRational::InnerIterator it(L.weights, r); it; ++it) acc += it.value() * in[it.col()];
            out[r] = L.relu ? relu(acc) : acc;
        }
        acts.push_back(std::move(out));
    }
    if (check) {
        for (const auto& c : contracts_) {
            Rational v = read_ref(c.value, acts);
            if (!(v / c.grid).is_integer())
                throw ContractViolation(c.what + ": value " + v.str() + " is not a multiple of " + c.grid.str());
        }
    }
    return acts;
}

std::vector<Rational> ReluNetwork::eval(const std::vector<Rational>& x) const {
    if (static_cast<int>(x.size()) != input_width_)
        throw WidthMismatch("input has " + std::to_string(x.size()) + " values, network expects " +
                            std::to_string(input_width_));
    std::vector<Rational> cur = x;
    std::vector<Rational> next;
    for (const auto& L : layers_) {
        next.assign(L.out_width(), Rational());
        for (int r = 0; r < L.out_width(); ++r) {
            Rational acc = L.bias[r];
            for (SparseRational::InnerIterator it(L.weights, r); it; ++it) acc += it.value() * cur[it.col()];
            next[r] = L.relu ? relu(acc) : acc;
        }
        cur.swap(next);
    }
    return cur;
}

const Wire& ReluNetwork::wire(const std::string& name) const {
    auto it = trace_.find(name);
    if (it == trace_.end()) throw std::out_of_range("no wire named '" + name + "'");
    return it->second;
}

Rational ReluNetwork::read_ref(const WireRef& ref, const std::vector<std::vector<Rational>>& acts) {
    Rational v = ref.constant;
    for (const auto& t : ref.terms) v += t.coeff * acts.at(t.layer).at(t.coord);
    return v;
}

std::vector<Rational> ReluNetwork::read_wire(const std::string& name,
                                             const std::vector<std::vector<Rational>>& acts) const {
    const auto& w = wire(name);
    std::vector<Rational> out;
    out.reserve(w.refs.size());
    for (const auto& r : w.refs) out.push_back(read_ref(r, acts));
    return out;
}

ReluNetwork compose(const ReluNetwork& f, const ReluNetwork& g) {
    if (f.input_width() != g.output_width())
        throw WidthMismatch("compose: outer net expects " + std::to_string(f.input_width()) +
                            " inputs, inner net produces " + std::to_string(g.output_width()));
    const Layer& go = g.layers().back();
    const Layer& f1 = f.layers().front();
    const int K = g.depth();

    std::vector<std::map<int, Rational>> merged(f1.out_width());
    std::vector<Rational> bias(f1.out_width());
    for (int r = 0; r < f1.out_width(); ++r) {
        bias[r] = f1.bias[r];
        for (SparseRational::InnerIterator a(f1.weights, r); a; ++a) {
            int c = static_cast<int>(a.col());
            bias[r] += a.value() * go.bias[c];
            for (SparseRational::InnerIterator b(go.weights, c); b; ++b) merged[r][static_cast<int>(b.col())] += a.value() * b.value();
        }
    }
    std::vector<Layer> layers(g.layers().begin(), g.layers().end() - 1);
    layers.push_back(Layer{make_sparse(f1.out_width(), go.in_width(), merged), std::move(bias), f1.relu});
    layers.insert(layers.end(), f.layers().begin() + 1, f.layers().end());

    ReluNetwork out(g.input_width(), std::move(layers));
    auto remap = [&](const WireRef& r, bool outer) {
        WireRef o;
        o.constant = r.constant;
        for (const auto& t : r.terms) {
            int layer = t.layer;
            bool g_output = outer ? layer == 0 : layer == K + 1;
            if (g_output)
                expand_through(go, K, t, o);
            else
                o.terms.push_back({outer ? layer + K : layer, t.coord, t.coeff});
        }
        return o;
    };
    for (const auto& [name, w] : g.trace()) {
        Wire nw{w.dims, w.origins, {}};
        for (const auto& r : w.refs) nw.refs.push_back(remap(r, false));
        out.trace()[name] = std::move(nw);
    }
    for (const auto& [name, w] : f.trace()) {
        if (out.trace().count(name)) throw std::invalid_argument("compose: wire name clash '" + name + "'");
        Wire nw{w.dims, w.origins, {}};
        for (const auto& r : w.refs) nw.refs.push_back(remap(r, true));
        out.trace()[name] = std::move(nw);
    }
    for (const auto& c : g.contracts()) out.contracts().push_back({remap(c.value, false), c.grid, c.what});
    for (const auto& c : f.contracts()) out.contracts().push_back({remap(c.value, true), c.grid, c.what});
    out.meta() = f.meta();
    return out;
}

namespace {

// Deepens a network to `depth` hidden layers by routing its output through
// positive/negative identity pairs.
ReluNetwork pad_to_depth(const ReluNetwork& net, int depth) {
    int extra = depth - net.depth();
    if (extra <= 0) return net;
    const Layer& o = net.layers().back();
    int w = o.out_width();
    int K = net.depth();
    auto rows = rows_of(o.weights);
    std::vector<std::map<int, Rational>> split(2 * w);
    std::vector<Rational> bias(2 * w);
    for (int r = 0; r < w; ++r) {
        split[r] = rows[r];
        for (const auto& [c, v] : rows[r]) split[w + r][c] = -v;
        bias[r] = o.bias[r];
        bias[w + r] = -o.bias[r];
    }
    std::vector<Layer> layers(net.layers().begin(), net.layers().end() - 1);
    layers.push_back(Layer{make_sparse(2 * w, o.in_width(), split), std::move(bias), true});
    for (int k = 1; k < extra; ++k) layers.push_back(identity_layer(2 * w, true));
    std::vector<std::map<int, Rational>> merge(w);
    for (int r = 0; r < w; ++r) {
        merge[r][r] = 1;
        merge[r][w + r] = -1;
    }
    layers.push_back(Layer{make_sparse(w, 2 * w, merge), std::vector<Rational>(w), false});
    ReluNetwork out(net.input_width(), std::move(layers));
    auto remap = [&](const WireRef& r) {
        WireRef o2;
        o2.constant = r.constant;
        for (const auto& t : r.terms) {
            if (t.layer == K + 1) {
                o2.terms.push_back({K + 1, t.coord, t.coeff});
                o2.terms.push_back({K + 1, t.coord + w, -t.coeff});
            } else {
                o2.terms.push_back(t);
            }
        }
        return o2;
    };
    for (const auto& [name, wr] : net.trace()) {
        Wire nw{wr.dims, wr.origins, {}};
        for (const auto& r : wr.refs) nw.refs.push_back(remap(r));
        out.trace()[name] = std::move(nw);
    }
    for (const auto& c : net.contracts()) out.contracts().push_back({remap(c.value), c.grid, c.what});
    out.meta() = net.meta();
    return out;
}

}  // namespace

ReluNetwork parallel(const ReluNetwork& a0, const ReluNetwork& b0) {
    int depth = std::max(a0.depth(), b0.depth());
    ReluNetwork a = pad_to_depth(a0, depth);
    ReluNetwork b = pad_to_depth(b0, depth);
    std::vector<Layer> layers;
    std::vector<int> a_width{a.input_width()};
    for (std::size_t k = 0; k < a.layers().size(); ++k) {
        const Layer& la = a.layers()[k];
        const Layer& lb = b.layers()[k];
        auto ra = rows_of(la.weights);
        auto rb = rows_of(lb.weights);
        std::vector<std::map<int, Rational>> rows(la.out_width() + lb.out_width());
        std::vector<Rational> bias = la.bias;
        for (int r = 0; r < la.out_width(); ++r) rows[r] = ra[r];
        for (int r = 0; r < lb.out_width(); ++r)
            for (const auto& [c, v] : rb[r]) rows[la.out_width() + r][la.in_width() + c] = v;
        bias.insert(bias.end(), lb.bias.begin(), lb.bias.end());
        layers.push_back(Layer{make_sparse(static_cast<int>(rows.size()), la.in_width() + lb.in_width(), rows),
                               std::move(bias), la.relu});
        a_width.push_back(la.out_width());
    }
    ReluNetwork out(a.input_width() + b.input_width(), std::move(layers));
    out.trace() = a.trace();
    out.contracts() = a.contracts();
    auto shift = [&](const WireRef& r) {
        WireRef o{r.constant, {}};
        for (const auto& t : r.terms) o.terms.push_back({t.layer, t.coord + a_width[t.layer], t.coeff});
        return o;
    };
    // names already used by `a` are kept apart with a "b/" prefix
    for (const auto& [name, w] : b.trace()) {
        Wire nw{w.dims, w.origins, {}};
        for (const auto& r : w.refs) nw.refs.push_back(shift(r));
        out.trace()[out.trace().count(name) ? "b/" + name : name] = std::move(nw);
    }
    for (const auto& c : b.contracts()) out.contracts().push_back({shift(c.value), c.grid, c.what});
    return out;
}

ReluNetwork passthrough(int width, int hidden) {
    if (width <= 0) throw WidthMismatch("passthrough width must be positive");
    if (hidden <= 0) return ReluNetwork(width, {identity_layer(width, false)});
    ReluNetwork id(width, {identity_layer(width, false)});
    return pad_to_depth(id, hidden);
}

json to_json(const ReluNetwork& net) {
    json layers = json::array();
    for (const auto& L : net.layers()) {
        json rows = json::array();
        for (int r = 0; r < L.out_width(); ++r) {
            json row = json::array();
            for (SparseRational::InnerIterator it(L.weights, r); it; ++it)
                row.push_back(json::array({static_cast<int>(it.col()), rat_str(it.value())}));
            rows.push_back(std::move(row));
        }
        json bias = json::array();
        for (const auto& b : L.bias) bias.push_back(rat_str(b));
        layers.push_back(json{{"rows", L.out_width()},
                              {"cols", L.in_width()},
                              {"relu", L.relu},
                              {"bias", std::move(bias)},
                              {"weights", std::move(rows)}});
    }
    json trace = json::object();
    for (const auto& [name, w] : net.trace()) {
        json refs = json::array();
        for (const auto& r : w.refs) refs.push_back(ref_to_json(r));
        trace[name] = json{{"dims", w.dims}, {"origins", w.origins}, {"refs", std::move(refs)}};
    }
    json contracts = json::array();
    for (const auto& c : net.contracts())
        contracts.push_back(json{{"value", ref_to_json(c.value)}, {"grid", rat_str(c.grid)}, {"what", c.what}});
    auto s = net.stats();
    return json{{"input_width", net.input_width()},
                {"output_width", net.output_width()},
                {"meta", net.meta()},
                {"stats", {{"depth", s.depth}, {"widths", s.widths}, {"total", s.total}}},
                {"layers", std::move(layers)},
                {"trace", std::move(trace)},
                {"contracts", std::move(contracts)}};
}

ReluNetwork network_from_json(const json& j) {
    std::vector<Layer> layers;
    for (const auto& jl : j.at("layers")) {
        int rows = jl.at("rows").get<int>();
        int cols = jl.at("cols").get<int>();
        std::vector<std::map<int, Rational>> entries(rows);
        const auto& jw = jl.at("weights");
        if (static_cast<int>(jw.size()) != rows) throw WidthMismatch("weight row count mismatch");
        for (int r = 0; r < rows; ++r)
            for (const auto& e : jw[r]) {
                int c = e.at(0).get<int>();
                if (c < 0 || c >= cols) throw WidthMismatch("weight column out of range");
                entries[r][c] = Rational::parse(e.at(1).get<std::string>());
            }
        std::vector<Rational> bias;
        for (const auto& b : jl.at("bias")) bias.push_back(Rational::parse(b.get<std::string>()));
        layers.push_back(Layer{make_sparse(rows, cols, entries), std::move(bias), jl.at("relu").get<bool>()});
    }
    ReluNetwork net(j.at("input_width").get<int>(), std::move(layers));
    if (j.contains("trace"))
        for (const auto& [name, jw] : j.at("trace").items()) {
            Wire w;
            w.dims = jw.at("dims").get<std::vector<int>>();
            w.origins = jw.at("origins").get<std::vector<int>>();
            for (const auto& r : jw.at("refs")) w.refs.push_back(ref_from_json(r));
            net.trace()[name] = std::move(w);
        }
    if (j.contains("contracts"))
        for (const auto& c : j.at("contracts"))
            net.contracts().push_back({ref_from_json(c.at("value")), Rational::parse(c.at("grid").get<std::string>()),
                                       c.at("what").get<std::string>()});
    if (j.contains("meta")) net.meta() = j.at("meta");
    return net;
}

void save_network(const ReluNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json(net).dump() << '\n';
}

ReluNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return network_from_json(json::parse(in));
}

// ---------------------------------------------------------------------------

namespace {

using i128 = __int128;
constexpr std::int64_t kLimit = std::int64_t{1} << 40;

std::int64_t lcm_checked(std::int64_t a, std::int64_t b, bool& ok) {
    std::int64_t g = std::gcd(a, b);
    std::int64_t r;
    if (__builtin_mul_overflow(a / g, b, &r) || r >= kLimit) {
        ok = false;
        return 1;
    }
    return r;
}

std::int64_t abs64(std::int64_t v) { return v < 0 ? -v : v; }

}  // namespace

FastEvaluator::FastEvaluator(const ReluNetwork& net) : net_(&net) {
    for (const auto& L : net.layers()) {
        FastLayer f;
        f.relu = L.relu;
        bool ok = true;
        std::int64_t den = 1;
        for (const auto& b : L.bias) {
            if (!b.is_small()) ok = false;
            else den = lcm_checked(den, b.small_den(), ok);
        }
        for (int r = 0; r < L.out_width() && ok; ++r)
            for (SparseRational::InnerIterator it(L.weights, r); it && ok; ++it) {
                if (!it.value().is_small()) ok = false;
                else den = lcm_checked(den, it.value().small_den(), ok);
            }
        if (!ok) {
            usable_ = false;
            return;
        }
        f.den = den;
        auto scaled = [&](const Rational& v) -> std::int64_t {
            Rational s = v * Rational(den);
            auto i = s.to_int64();
            if (!i || abs64(*i) >= kLimit) ok = false;
            return i ? *i : 0;
        };
        f.row_ptr.push_back(0);
        for (int r = 0; r < L.out_width(); ++r) {
            for (SparseRational::InnerIterator it(L.weights, r); it; ++it) {
                f.cols.push_back(static_cast<int>(it.col()));
                f.nums.push_back(scaled(it.value()));
            }
            f.row_ptr.push_back(static_cast<int>(f.cols.size()));
            f.bias.push_back(scaled(L.bias[r]));
        }
        if (!ok) {
            usable_ = false;
            return;
        }
        layers_.push_back(std::move(f));
    }
}

bool FastEvaluator::try_eval(const std::vector<Rational>& x, std::vector<Rational>& out) const {
    bool ok = true;
    std::int64_t dx = 1;
    for (const auto& v : x) {
        if (!v.is_small()) return false;
        dx = lcm_checked(dx, v.small_den(), ok);
        if (!ok) return false;
    }
    std::vector<std::int64_t> X(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto s = (x[i] * Rational(dx)).to_int64();
        if (!s || abs64(*s) >= kLimit) return false;
        X[i] = *s;
    }
    std::vector<i128> Y;
    std::vector<std::int64_t> next;
    for (const auto& L : layers_) {
        std::size_t rows = L.bias.size();
        Y.assign(rows, 0);
        for (std::size_t r = 0; r < rows; ++r) {
            i128 acc = static_cast<i128>(L.bias[r]) * dx;
            for (int k = L.row_ptr[r]; k < L.row_ptr[r + 1]; ++k) acc += static_cast<i128>(L.nums[k]) * X[L.cols[k]];
            if (L.relu && acc < 0) acc = 0;
            Y[r] = acc;
        }
        i128 dy = static_cast<i128>(L.den) * dx;
        if (dy != 1) {
            i128 g = dy;
            for (std::size_t r = 0; r < rows && g != 1; ++r) {
                i128 a = Y[r] < 0 ? -Y[r] : Y[r];
                while (a != 0) {
                    i128 t = g % a;
                    g = a;
                    a = t;
                }
            }
            if (g > 1) {
                dy /= g;
                for (auto& y : Y) y /= g;
            }
        }
        if (dy >= kLimit) return false;
        next.resize(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            if (Y[r] >= kLimit || Y[r] <= -kLimit) return false;
            next[r] = static_cast<std::int64_t>(Y[r]);
        }
        X.swap(next);
        dx = static_cast<std::int64_t>(dy);
    }
    out.clear();
    out.reserve(X.size());
    for (auto v : X) out.emplace_back(v, dx);
    return true;
}

std::vector<Rational> FastEvaluator::eval(const std::vector<Rational>& x) const {
    if (static_cast<int>(x.size()) != net_->input_width())
        throw WidthMismatch("input has " + std::to_string(x.size()) + " values, network expects " +
                            std::to_string(net_->input_width()));
    std::vector<Rational> out;
    if (usable_ && try_eval(x, out)) return out;
    return net_->eval(x);
}

}  // namespace treegen
