#include "treegen/enumerator.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace treegen {

std::string to_string(NetKind k) {
    switch (k) {
    case NetKind::TS: return "ts";
    case NetKind::TD: return "td";
    case NetKind::TI: return "ti";
    case NetKind::TE: return "te";
    }
    return "?";
}

std::string to_string(Strategy s) { return s == Strategy::Full ? "full" : "compositional"; }

NetKind parse_kind(const std::string& s) {
    for (auto k : {NetKind::TS, NetKind::TD, NetKind::TI, NetKind::TE})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown network kind '" + s + "' (expected ts, td, ti or te)");
}

Strategy parse_strategy(const std::string& s) {
    if (s == "full") return Strategy::Full;
    if (s == "compositional") return Strategy::Compositional;
    throw std::invalid_argument("unknown strategy '" + s + "' (expected full or compositional)");
}

int input_arity(NetKind kind, int d) {
    switch (kind) {
    case NetKind::TS: return 2 * d;
    case NetKind::TD: return d;
    case NetKind::TI: return 4 * d;
    case NetKind::TE: return 7 * d;
    }
    return 0;
}

ReluNetwork build_network(NetKind kind, const EulerString& e, int d, const Rational& delta, BuildOptions opts) {
    switch (kind) {
    case NetKind::TS: return build_ts(e, d, opts);
    case NetKind::TD: return build_td(e, d, opts);
    case NetKind::TI: return build_ti(e, d, opts);
    case NetKind::TE: return build_te(e, d, delta, opts);
    }
    throw std::invalid_argument("unknown network kind");
}

std::uint64_t InputBlock::size() const {
    std::uint64_t s = 1;
    for (const auto& f : factors) {
        if (f.tuples.empty()) return 0;
        if (s > UINT64_MAX / f.tuples.size()) return UINT64_MAX;
        s *= f.tuples.size();
    }
    return s;
}

std::vector<Rational> InputBlock::at(std::uint64_t index) const {
    auto x = base;
    for (const auto& f : factors) {
        const auto& tup = f.tuples[index % f.tuples.size()];
        index /= f.tuples.size();
        for (std::size_t i = 0; i < f.slots.size(); ++i) x[f.slots[i]] = tup[i];
    }
    return x;
}

std::optional<Rational> class_representative(int index, int classes, bool closed_first, const Rational& delta) {
    const Rational lo(index - 1, classes);
    const Rational hi(index, classes);
    Rational g = (hi / delta).floor() * delta;
    if (g >= Rational(1)) g = Rational(1) - delta;
    const bool closed = closed_first && index == 1;
    if (g < Rational(0) || g < lo || (g == lo && !closed) || g > hi) return std::nullopt;
    return g;
}

namespace {

std::vector<int> plan_labels(const SweepPlan& plan) {
    if (!plan.labels.empty()) return plan.labels;
    std::vector<int> v;
    for (int l = 1; l <= plan.tree.m(); ++l) v.push_back(l);
    return v;
}

using Tuples = std::vector<std::vector<Rational>>;

Tuples singles(const std::vector<Rational>& values) {
    Tuples t;
    for (const auto& v : values) t.push_back({v});
    return t;
}

// strictly increasing k-tuples from values
Tuples combinations(const std::vector<Rational>& values, int k) {
    Tuples out;
    std::vector<Rational> pick;
    auto rec = [&](auto&& self, std::size_t from) -> void {
        if (static_cast<int>(pick.size()) == k) {
            out.push_back(pick);
            return;
        }
        for (std::size_t i = from; i < values.size(); ++i) {
            pick.push_back(values[i]);
            self(self, i + 1);
            pick.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

std::vector<int> iota_slots(int from, int count) {
    std::vector<int> s(count);
    for (int i = 0; i < count; ++i) s[i] = from + i;
    return s;
}

}  // namespace

std::vector<InputBlock> sweep_domain(const SweepPlan& plan) {
    const int n = plan.tree.n();
    const int d = plan.d;
    const auto labels = plan_labels(plan);
    const int W = input_arity(plan.kind, d);
    const auto& sub_labels = plan.sub_labels.empty() ? labels : plan.sub_labels;
    std::vector<Rational> positions, values, sub_values, nonzero;
    auto value_points = [&](const std::vector<int>& ls) {
        std::vector<Rational> v;
        for (int l : ls) {
            if (plan.kind != NetKind::TE) v.emplace_back(l);
            else if (auto r = class_representative(l, plan.tree.m(), true, plan.delta)) v.push_back(*r);
        }
        return v;
    };
    for (int i = 0; i <= n; ++i) {
        if (plan.kind != NetKind::TE) positions.emplace_back(i);
        else if (auto r = class_representative(i, n, false, plan.delta)) positions.push_back(*r);
    }
    values = value_points(labels);
    sub_values = value_points(sub_labels);
    nonzero.assign(positions.begin() + 1, positions.end());

    // substitution values sit in slots d..2d-1 (TS) or 2d..3d-1 (TE)
    auto slot_values = [&](int j) -> const std::vector<Rational>& {
        bool sub = (plan.kind == NetKind::TS && j >= d) || (plan.kind == NetKind::TE && j / d == 2);
        return sub ? sub_values : values;
    };
    std::vector<InputBlock> blocks;
    auto full_block = [&](const std::vector<bool>& is_value) {
        InputBlock b{std::vector<Rational>(W, Rational(0)), {}};
        for (int j = 0; j < W; ++j) b.factors.push_back({{j}, singles(is_value[j] ? slot_values(j) : positions)});
        blocks.push_back(std::move(b));
    };
    std::vector<bool> is_value(W, false);
    switch (plan.kind) {
    case NetKind::TS:
        for (int j = d; j < 2 * d; ++j) is_value[j] = true;
        break;
    case NetKind::TI:
        for (int j = 3 * d; j < 4 * d; ++j) is_value[j] = true;
        break;
    case NetKind::TE:
        for (int j = 0; j < W; ++j) is_value[j] = slot_kind(j, d) == SlotKind::Value;
        break;
    case NetKind::TD: break;
    }

    if (plan.strategy == Strategy::Full || plan.kind == NetKind::TI) {
        full_block(is_value);
        return blocks;
    }
    const Rational filler = plan.kind == NetKind::TE || sub_values.empty() ? Rational(0) : sub_values.front();
    if (plan.kind == NetKind::TS || plan.kind == NetKind::TD) {
        for (int k = 0; k <= d; ++k) {
            InputBlock b{std::vector<Rational>(W, Rational(0)), {}};
            if (plan.kind == NetKind::TS)
                for (int j = d; j < 2 * d; ++j) b.base[j] = filler;
            if (k > 0) b.factors.push_back({iota_slots(0, k), combinations(nonzero, k)});
            if (plan.kind == NetKind::TS)
                for (int j = 0; j < k; ++j) b.factors.push_back({{d + j}, singles(sub_values)});
            blocks.push_back(std::move(b));
        }
        return blocks;
    }
    // TE: k_del deletions and k_sub substitutions on distinct positions; the
    // budget masks the first k_del + k_sub insertion slots and the rest are live.
    for (int kd = 0; kd <= d; ++kd)
        for (int ks = 0; kd + ks <= d; ++ks) {
            InputBlock b{std::vector<Rational>(W, Rational(0)), {}};
            if (kd > 0) b.factors.push_back({iota_slots(0, kd), combinations(nonzero, kd)});
            if (ks > 0) b.factors.push_back({iota_slots(d, ks), combinations(nonzero, ks)});
            for (int j = 0; j < ks; ++j) b.factors.push_back({{2 * d + j}, singles(sub_values)});
            for (int h = kd + ks; h < d; ++h)
                for (int seg = 3; seg <= 6; ++seg) {
                    int j = seg * d + h;
                    b.factors.push_back({{j}, singles(is_value[j] ? values : positions)});
                }
            blocks.push_back(std::move(b));
        }
    return blocks;
}

std::uint64_t sweep_size(const SweepPlan& plan) {
    if (plan.d == 0) return 1;
    std::uint64_t total = 0;
    for (const auto& b : sweep_domain(plan)) {
        auto s = b.size();
        if (s > UINT64_MAX - total) return UINT64_MAX;
        total += s;
    }
    return total;
}

namespace {

struct Partial {
    std::set<std::vector<std::int64_t>> outputs;
    long long invalid = 0;
    long long mismatches = 0;
};

std::vector<int> as_ints(const std::vector<Rational>& x) {
    std::vector<int> v;
    for (const auto& r : x) v.push_back(static_cast<int>(r.to_int64().value()));
    return v;
}

std::vector<std::int64_t> reference_output(const SweepPlan& plan, const EulerString& e, const std::vector<Rational>& x) {
    switch (plan.kind) {
    case NetKind::TS: return encode_euler(apply_subst_reference(plan.tree, subst_ops_from_input(as_ints(x)))).symbols;
    case NetKind::TD: return encode_euler(apply_delete_reference(plan.tree, delete_ops_from_input(as_ints(x)))).symbols;
    case NetKind::TI: return insert_reference_symbols(e.symbols, e.m, insert_ops_from_input(as_ints(x)));
    case NetKind::TE: return te_reference(e, plan.d, x, plan.delta);
    }
    return {};
}

}  // namespace

EnumerationReport sweep(const SweepPlan& plan) {
    const auto t0 = std::chrono::steady_clock::now();
    if (plan.d < 0) throw std::invalid_argument("d must be nonnegative");
    const int m = plan.tree.m();
    for (int l : plan.labels)
        if (l < 1 || l > m) throw std::invalid_argument("label " + std::to_string(l) + " outside 1.." + std::to_string(m));
    for (int l : plan.sub_labels)
        if (l < 1 || l > m) throw std::invalid_argument("label " + std::to_string(l) + " outside 1.." + std::to_string(m));
    EnumerationReport r;
    r.tree = plan.tree;
    r.kind = plan.kind;
    r.d = plan.d;
    r.strategy = plan.strategy;
    r.labels = plan_labels(plan);
    r.sub_labels = plan.sub_labels;
    const auto e = encode_euler(plan.tree);
    if (plan.d == 0) {
        r.outputs = {e.symbols};
        r.distances[0] = 1;
        r.sweep_size = 1;
        r.reference_mismatches = plan.check_reference ? 0 : -1;
        return r;
    }
    r.sweep_size = sweep_size(plan);
    if (plan.cap != 0 && r.sweep_size > plan.cap) {
        std::string hint = plan.strategy == Strategy::Full && plan.kind != NetKind::TI
                               ? "; try the compositional strategy"
                               : "";
        throw SweepTooLarge("sweep needs " + std::to_string(r.sweep_size) + " evaluations (cap " +
                            std::to_string(plan.cap) + ")" + hint);
    }

    BuildOptions opts;
    opts.fold_constants = true;
    const auto net = build_network(plan.kind, e, plan.d, plan.delta, opts);
    r.stats = net.stats();
    std::optional<std::int64_t> B;
    if (net.meta().contains("B") && (plan.kind == NetKind::TD || plan.kind == NetKind::TE))
        B = net.meta()["B"].get<std::int64_t>();
    const FastEvaluator fast(net);
    const auto blocks = sweep_domain(plan);
    std::vector<std::uint64_t> offsets{0};
    for (const auto& b : blocks) offsets.push_back(offsets.back() + b.size());
    const std::uint64_t total = offsets.back();

    auto run = [&](std::uint64_t lo, std::uint64_t hi, Partial& part) {
        std::size_t bi = 0;
        for (std::uint64_t g = lo; g < hi; ++g) {
            while (g >= offsets[bi + 1]) ++bi;
            auto x = blocks[bi].at(g - offsets[bi]);
            auto y = fast.eval(x);
            std::vector<std::int64_t> raw;
            bool integral = true;
            for (const auto& v : y) {
                auto iv = v.to_int64();
                if (!iv) integral = false;
                raw.push_back(iv.value_or(-1));
            }
            if (plan.check_reference) {
                // the deletion reference is a tree, so compare without sentinels
                const auto& mine = plan.kind == NetKind::TD ? strip_sentinels(raw, *B) : raw;
                if (!integral || mine != reference_output(plan, e, x)) ++part.mismatches;
            }
            auto sym = B ? strip_sentinels(raw, *B) : raw;
            if (!integral || !validate_euler(sym, m).ok) {
                ++part.invalid;
                continue;
            }
            part.outputs.insert(std::move(sym));
        }
    };

    const int jobs = std::max(1, std::min<int>(plan.jobs, static_cast<int>(std::min<std::uint64_t>(total, 256))));
    std::vector<Partial> parts(jobs);
    if (jobs == 1) {
        run(0, total, parts[0]);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) {
            std::uint64_t lo = total * w / jobs;
            std::uint64_t hi = total * (w + 1) / jobs;
            pool.emplace_back([&, lo, hi, w] { run(lo, hi, parts[w]); });
        }
        for (auto& t : pool) t.join();
    }
    std::set<std::vector<std::int64_t>> merged;
    long long mismatches = 0;
    for (auto& p : parts) {
        merged.insert(p.outputs.begin(), p.outputs.end());
        r.invalid += p.invalid;
        mismatches += p.mismatches;
    }
    if (plan.check_reference) r.reference_mismatches = mismatches;
    r.outputs.assign(merged.begin(), merged.end());
    for (const auto& s : r.outputs) ++r.distances[ted(plan.tree, decode_euler(s, m))];
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

nlohmann::json to_json(const EnumerationReport& r) {
    nlohmann::json j;
    j["tree"] = {{"labels", r.tree.labels()}, {"parents", r.tree.parents()}, {"m", r.tree.m()}};
    j["kind"] = to_string(r.kind);
    j["d"] = r.d;
    j["strategy"] = to_string(r.strategy);
    j["labels"] = r.labels;
    if (!r.sub_labels.empty()) j["sub_labels"] = r.sub_labels;
    j["count"] = r.count();
    nlohmann::json dist = nlohmann::json::object();
    for (auto [k, c] : r.distances) dist[std::to_string(k)] = c;
    j["distances"] = dist;
    j["stats"] = {{"depth", r.stats.depth}, {"widths", r.stats.widths}, {"total", r.stats.total},
                  {"min", r.stats.min_width}, {"avg", r.stats.avg_width}, {"max", r.stats.max_width}};
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& s : r.outputs) outs.push_back(format_symbols(s));
    j["outputs"] = outs;
    j["invalid"] = r.invalid;
    if (r.reference_mismatches >= 0) j["reference_mismatches"] = r.reference_mismatches;
    j["wall_time"] = r.wall_time;
    j["sweep_size"] = r.sweep_size;
    return j;
}

EnumerationReport report_from_json(const nlohmann::json& j) {
    EnumerationReport r;
    const auto& t = j.at("tree");
    r.tree = LabeledTree(t.at("labels").get<std::vector<int>>(), t.at("parents").get<std::vector<int>>(),
                         t.at("m").get<int>());
    r.kind = parse_kind(j.at("kind").get<std::string>());
    r.d = j.at("d").get<int>();
    r.strategy = parse_strategy(j.at("strategy").get<std::string>());
    r.labels = j.value("labels", std::vector<int>{});
    r.sub_labels = j.value("sub_labels", std::vector<int>{});
    for (const auto& s : j.at("outputs")) r.outputs.push_back(parse_symbols(s.get<std::string>()));
    for (auto& [k, c] : j.at("distances").items()) r.distances[std::stoi(k)] = c.get<long long>();
    if (j.contains("stats")) {
        const auto& s = j["stats"];
        r.stats.depth = s.value("depth", 0);
        r.stats.widths = s.value("widths", std::vector<int>{});
        r.stats.total = s.value("total", 0LL);
        r.stats.min_width = s.value("min", 0);
        r.stats.avg_width = s.value("avg", 0.0);
        r.stats.max_width = s.value("max", 0);
    }
    r.invalid = j.value("invalid", 0LL);
    r.reference_mismatches = j.value("reference_mismatches", -1LL);
    r.wall_time = j.value("wall_time", 0.0);
    r.sweep_size = j.value("sweep_size", std::uint64_t{0});
    return r;
}

std::string format_report(const EnumerationReport& r) {
    std::ostringstream os;
    os << "tree        " << format_symbols(encode_euler(r.tree).symbols) << "\n";
    os << "kind        " << to_string(r.kind) << "\n";
    os << "d           " << r.d << "\n";
    os << "strategy    " << to_string(r.strategy) << "\n";
    os << "sweep size  " << r.sweep_size << "\n";
    os << "count       " << r.count() << "\n";
    os << "invalid     " << r.invalid << "\n";
    if (r.reference_mismatches >= 0) os << "mismatches  " << r.reference_mismatches << "\n";
    os << std::fixed << std::setprecision(3) << "wall time   " << r.wall_time << " s\n";
    os << "distance  count\n";
    for (auto [k, c] : r.distances) os << std::setw(8) << k << std::setw(7) << c << "\n";
    os << "#L " << r.stats.depth << "  #TN " << r.stats.total << "  MinN " << r.stats.min_width << "  AvgN "
       << std::setprecision(1) << r.stats.avg_width << "  MaxN " << r.stats.max_width << "\n";
    return os.str();
}

OracleDiff compare_with_oracle(const EnumerationReport& r, const SymbolSet& ball) {
    OracleDiff diff;
    SymbolSet got(r.outputs.begin(), r.outputs.end());
    std::set_difference(ball.begin(), ball.end(), got.begin(), got.end(), std::inserter(diff.missing, diff.missing.end()));
    std::set_difference(got.begin(), got.end(), ball.begin(), ball.end(), std::inserter(diff.extra, diff.extra.end()));
    return diff;
}

SymbolSet oracle_ball(NetKind kind, const LabeledTree& tree, int d, const std::vector<int>& labels,
                      BallSemantics semantics, std::uint64_t cap) {
    std::vector<int> ls = labels;
    if (ls.empty())
        for (int l = 1; l <= tree.m(); ++l) ls.push_back(l);
    BallOptions opt{BallMode::AtMost, semantics, cap};
    switch (kind) {
    case NetKind::TS: return edit_ball(tree, d, ls, {.sub = true}, opt);
    case NetKind::TD: return edit_ball(tree, d, ls, {.del = true}, opt);
    case NetKind::TI: opt.mode = BallMode::Exactly; return edit_ball(tree, d, ls, {.ins = true}, opt);
    case NetKind::TE: return edit_ball(tree, d, ls, {true, true, true}, opt);
    }
    return {};
}

StatsTable stats_table(const std::vector<NamedStats>& rows) {
    StatsTable t;
    std::map<NetKind, int> depth;
    std::size_t name_w = 8;
    for (const auto& r : rows) name_w = std::max(name_w, r.name.size() + 2);
    const int nw = static_cast<int>(name_w);
    std::ostringstream os;
    os << std::left << std::setw(nw) << "network" << std::setw(6) << "kind" << std::right << std::setw(5) << "#L"
       << std::setw(10) << "#TN" << std::setw(8) << "MinN" << std::setw(10) << "AvgN" << std::setw(8) << "MaxN"
       << "  widths\n";
    for (const auto& r : rows) {
        auto [it, fresh] = depth.emplace(r.kind, r.stats.depth);
        if (!fresh && it->second != r.stats.depth) t.constant_depth = false;
        os << std::left << std::setw(nw) << r.name << std::setw(6) << to_string(r.kind) << std::right << std::setw(5)
           << r.stats.depth << std::setw(10) << r.stats.total << std::setw(8) << r.stats.min_width << std::setw(10)
           << std::fixed << std::setprecision(1) << r.stats.avg_width << std::setw(8) << r.stats.max_width << "  ";
        for (std::size_t i = 0; i < r.stats.widths.size(); ++i) os << (i ? "," : "") << r.stats.widths[i];
        os << "\n";
    }
    os << "constant depth per kind: " << (t.constant_depth ? "yes" : "no") << "\n";
    t.text = os.str();
    return t;
}

}  // namespace treegen
