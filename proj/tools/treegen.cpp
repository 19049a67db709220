#include "treegen/enumerator.hpp"
#include "treegen/locator.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace treegen;

namespace {

enum Exit { kOk = 0, kVerify = 1, kInput = 2, kGuard = 3 };

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (auto v : parse_symbols(text)) out.push_back(static_cast<int>(v));
    return out;
}

std::vector<Rational> parse_rationals(const std::string& text) {
    std::vector<Rational> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (tok.find_first_not_of(" \t") != std::string::npos) out.push_back(Rational::parse(tok));
    return out;
}

std::string join(const std::vector<Rational>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i].str();
    return s;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return nlohmann::json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

ReluNetwork build_any(const std::string& kind, const LabeledTree& tree, int d, const Rational& delta, bool fold) {
    if (d < 1) throw InputError("d must be at least 1");
    BuildOptions opts;
    opts.fold_constants = fold;
    auto e = encode_euler(tree);
    if (kind == "inward") return build_inward_locator(e, d, opts);
    if (kind == "outward") return build_outward_locator(e, d, opts);
    return build_network(parse_kind(kind), e, d, delta, opts);
}

void check_domain(const ReluNetwork& net, const std::vector<Rational>& x) {
    const auto& meta = net.meta();
    if (static_cast<int>(x.size()) != net.input_width())
        throw InputError("expected " + std::to_string(net.input_width()) + " inputs, got " + std::to_string(x.size()));
    const std::string kind = meta.value("kind", "");
    if (kind == "te") {
        check_on_grid(x, Rational::parse(meta.value("delta", "1/100")));
        return;
    }
    const int n = meta.value("n", 0);
    const int m = meta.value("m", 1);
    const int d = meta.value("d", 1);
    for (std::size_t j = 0; j < x.size(); ++j) {
        auto v = x[j].to_int64();
        bool label = (kind == "ts" && static_cast<int>(j) >= d) || (kind == "ti" && static_cast<int>(j) >= 3 * d);
        std::int64_t lo = label ? 1 : 0;
        std::int64_t hi = label ? m : n;
        if (!v || *v < lo || *v > hi)
            throw InputError("x_" + std::to_string(j + 1) + " = " + x[j].str() + " outside " + std::to_string(lo) +
                             ".." + std::to_string(hi));
    }
}

struct Args {
    std::string kind, tree, out, net, x, trace, labels, sub_labels, strategy = "compositional", report, ops = "sub,del,ins",
                                                                    mode = "at_most", semantics = "staged",
                                                                    delta = "1/100";
    std::vector<std::string> nets, trees;
    int d = 1, jobs = 1;
    bool fold = false, strip = false, check_reference = false, print = false;
    std::uint64_t cap = 20'000'000;
};

int cmd_build(const Args& a) {
    auto tree = read_tree_file(a.tree);
    auto net = build_any(a.kind, tree, a.d, Rational::parse(a.delta), a.fold);
    save_network(net, a.out);
    auto s = net.stats();
    std::cout << "kind " << a.kind << "  n " << tree.n() << "  m " << tree.m() << "  d " << a.d << "\n";
    std::cout << "#L " << s.depth << "  #TN " << s.total << "  MinN " << s.min_width << "  AvgN " << s.avg_width
              << "  MaxN " << s.max_width << "\n";
    std::cout << "wrote " << a.out << "\n";
    return kOk;
}

int cmd_eval(const Args& a) {
    auto net = load_network(a.net);
    auto x = parse_rationals(a.x);
    check_domain(net, x);
    if (!a.trace.empty()) {
        if (!net.has_wire(a.trace)) throw InputError("no wire named '" + a.trace + "'");
        std::cout << join(net.read_wire(a.trace, net.eval_all(x))) << "\n";
        return kOk;
    }
    auto y = net.eval(x);
    std::vector<std::int64_t> sym;
    for (const auto& v : y) {
        auto iv = v.to_int64();
        if (!iv) {
            std::cout << join(y) << "\n";
            return kOk;
        }
        sym.push_back(*iv);
    }
    std::optional<std::int64_t> B;
    if (net.meta().contains("B")) B = net.meta()["B"].get<std::int64_t>();
    if (a.strip && B) sym = strip_sentinels(sym, *B);
    std::cout << format_symbols(sym, B) << "\n";
    return kOk;
}

int cmd_enumerate(const Args& a) {
    SweepPlan p;
    p.kind = parse_kind(a.kind);
    p.tree = read_tree_file(a.tree);
    p.d = a.d;
    if (!a.labels.empty()) p.labels = parse_int_list(a.labels);
    if (!a.sub_labels.empty()) p.sub_labels = parse_int_list(a.sub_labels);
    p.strategy = parse_strategy(a.strategy);
    p.delta = Rational::parse(a.delta);
    p.cap = a.cap;
    p.jobs = a.jobs;
    p.check_reference = a.check_reference;
    auto r = sweep(p);
    if (!a.report.empty()) write_text(a.report, to_json(r).dump(2) + "\n");
    std::cout << format_report(r);
    if (a.print)
        for (const auto& s : r.outputs) std::cout << format_symbols(s) << "\n";
    return r.invalid == 0 && r.reference_mismatches <= 0 ? kOk : kVerify;
}

int cmd_validate(const Args& a) {
    auto r = report_from_json(read_json(a.report));
    auto tree = read_tree_file(a.tree);
    int bad = 0;
    if (!(r.tree == tree)) {
        std::cout << "report tree differs from " << a.tree << "\n";
        ++bad;
    }
    if (r.d != a.d) {
        std::cout << "report d = " << r.d << ", expected " << a.d << "\n";
        ++bad;
    }
    for (const auto& s : r.outputs) {
        auto diag = validate_euler(s, tree.m());
        if (!diag.ok) {
            std::cout << "invalid: " << format_symbols(s) << " (" << diag.message << ")\n";
            ++bad;
            continue;
        }
        int dist = ted(tree, decode_euler(s, tree.m()));
        bool ok = r.kind == NetKind::TI ? dist == a.d : dist <= a.d;
        if (!ok) {
            std::cout << "distance " << dist << ": " << format_symbols(s) << "\n";
            ++bad;
        }
    }
    std::cout << "outputs: " << r.outputs.size() << ", distance violations: " << bad << "\n";
    if (r.kind == NetKind::TE) {
        std::cout << "ball: skipped (unified sweeps are checked by distance only)\n";
    } else {
        try {
            auto ball = oracle_ball(r.kind, tree, a.d, r.labels, BallSemantics::Staged, a.cap);
            auto diff = compare_with_oracle(r, ball);
            for (const auto& s : diff.missing) std::cout << "missing: " << format_symbols(s) << "\n";
            for (const auto& s : diff.extra) std::cout << "extra: " << format_symbols(s) << "\n";
            std::cout << "ball: " << ball.size() << " trees, missing " << diff.missing.size() << ", extra "
                      << diff.extra.size() << "\n";
            bad += static_cast<int>(diff.missing.size() + diff.extra.size());
        } catch (const BudgetTooLarge& e) {
            std::cout << "ball: skipped (" << e.what() << ")\n";
        }
    }
    std::cout << (bad == 0 ? "OK" : "FAILED") << "\n";
    return bad == 0 ? kOk : kVerify;
}

int cmd_stats(const Args& a) {
    std::vector<NamedStats> rows;
    for (const auto& path : a.nets) {
        auto net = load_network(path);
        rows.push_back({path, parse_kind(net.meta().value("kind", "ts")), net.stats()});
    }
    for (const auto& path : a.trees) {
        if (a.kind.empty()) throw InputError("--kind is required with --tree");
        auto net = build_any(a.kind, read_tree_file(path), a.d, Rational::parse(a.delta), a.fold);
        rows.push_back({path, parse_kind(a.kind), net.stats()});
    }
    if (rows.empty()) throw InputError("give at least one --net or --tree");
    auto t = stats_table(rows);
    std::cout << t.text;
    return kOk;
}

int cmd_ball(const Args& a) {
    auto tree = read_tree_file(a.tree);
    std::vector<int> labels;
    if (!a.labels.empty()) labels = parse_int_list(a.labels);
    else
        for (int l = 1; l <= tree.m(); ++l) labels.push_back(l);
    BallOps ops;
    std::stringstream ss(a.ops);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "sub") ops.sub = true;
        else if (tok == "del") ops.del = true;
        else if (tok == "ins") ops.ins = true;
        else throw InputError("unknown operation '" + tok + "'");
    }
    BallOptions opt;
    if (a.mode == "exactly") opt.mode = BallMode::Exactly;
    else if (a.mode != "at_most") throw InputError("mode must be at_most or exactly");
    if (a.semantics == "general") opt.semantics = BallSemantics::General;
    else if (a.semantics != "staged") throw InputError("semantics must be staged or general");
    opt.cap = a.cap;
    auto ball = edit_ball(tree, a.d, labels, ops, opt);
    std::cout << "count " << ball.size() << "\n";
    if (a.print)
        for (const auto& s : ball) std::cout << format_symbols(s) << "\n";
    if (!a.out.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& s : ball) j.push_back(format_symbols(s));
        write_text(a.out, j.dump(2) + "\n");
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate trees within a tree edit distance using exact ReLU networks"};
    app.require_subcommand(1);
    Args a;
    const std::vector<std::string> kinds{"ts", "td", "ti", "te", "inward", "outward"};

    auto* build = app.add_subcommand("build", "build a network for a tree and save it as JSON");
    build->add_option("--kind", a.kind, "ts, td, ti, te (or inward/outward locators)")
        ->required()
        ->check(CLI::IsMember(kinds));
    build->add_option("--tree", a.tree, "tree file")->required();
    build->add_option("--d", a.d, "edit budget (>= 1)")->required();
    build->add_option("--delta", a.delta, "grid step of te inputs")->capture_default_str();
    build->add_flag("--fold", a.fold, "fold constant subexpressions");
    build->add_option("--out", a.out, "output JSON")->required();

    auto* eval = app.add_subcommand("eval", "evaluate a saved network");
    eval->add_option("--net", a.net, "network JSON")->required();
    eval->add_option("--x", a.x, "comma-separated inputs (integers, decimals or p/q)")->required();
    eval->add_option("--trace", a.trace, "print a named intermediate wire instead of the output");
    eval->add_flag("--strip", a.strip, "remove leading and trailing sentinels");

    auto* enumerate = app.add_subcommand("enumerate", "sweep a network's inputs and collect distinct trees");
    enumerate->add_option("--kind", a.kind, "ts, td, ti or te")->required()->check(CLI::IsMember({"ts", "td", "ti", "te"}));
    enumerate->add_option("--tree", a.tree, "tree file")->required();
    enumerate->add_option("--d", a.d, "edit budget")->required();
    enumerate->add_option("--labels", a.labels, "labels for insertions/substitutions, e.g. 7,7");
    enumerate->add_option("--sub-labels", a.sub_labels, "labels for substitutions when they differ");
    enumerate->add_option("--strategy", a.strategy, "compositional or full")->capture_default_str();
    enumerate->add_option("--delta", a.delta, "grid step of te inputs")->capture_default_str();
    enumerate->add_option("--cap", a.cap, "maximum number of evaluations (0: none)")->capture_default_str();
    enumerate->add_option("--jobs", a.jobs, "worker threads")->capture_default_str();
    enumerate->add_flag("--check-reference", a.check_reference, "compare each output with the symbolic reference");
    enumerate->add_flag("--print", a.print, "print every generated Euler string");
    enumerate->add_option("--report", a.report, "JSON report path");

    auto* validate = app.add_subcommand("validate", "cross-check a report against the edit distance oracle");
    validate->add_option("--report", a.report, "JSON report")->required();
    validate->add_option("--tree", a.tree, "tree file")->required();
    validate->add_option("--d", a.d, "edit budget")->required();
    validate->add_option("--cap", a.cap, "edit ball size guard (0: none)")->capture_default_str();

    auto* stats = app.add_subcommand("stats", "layer statistics of networks");
    stats->add_option("--net", a.nets, "network JSON (repeatable)");
    stats->add_option("--tree", a.trees, "tree file to build from (repeatable)");
    stats->add_option("--kind", a.kind, "kind for --tree")->check(CLI::IsMember({"ts", "td", "ti", "te"}));
    stats->add_option("--d", a.d, "edit budget for --tree");
    stats->add_option("--delta", a.delta, "grid step of te inputs")->capture_default_str();
    stats->add_flag("--fold", a.fold, "fold constant subexpressions");

    auto* ball = app.add_subcommand("ball", "enumerate an edit ball directly");
    ball->add_option("--tree", a.tree, "tree file")->required();
    ball->add_option("--d", a.d, "edit budget")->required();
    ball->add_option("--labels", a.labels, "label set (default 1..m)");
    ball->add_option("--ops", a.ops, "comma-separated subset of sub,del,ins")->capture_default_str();
    ball->add_option("--mode", a.mode, "at_most or exactly")->capture_default_str();
    ball->add_option("--semantics", a.semantics, "staged or general")->capture_default_str();
    ball->add_option("--cap", a.cap, "size guard (0: none)")->capture_default_str();
    ball->add_flag("--print", a.print, "print every Euler string");
    ball->add_option("--out", a.out, "JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kInput;
    }

    try {
        if (*build) return cmd_build(a);
        if (*eval) return cmd_eval(a);
        if (*enumerate) return cmd_enumerate(a);
        if (*validate) return cmd_validate(a);
        if (*stats) return cmd_stats(a);
        if (*ball) return cmd_ball(a);
    } catch (const SweepTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kGuard;
    } catch (const BudgetTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kGuard;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    }
    return kInput;
}
