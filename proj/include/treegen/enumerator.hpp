#ifndef TREEGEN_ENUMERATOR_HPP
#define TREEGEN_ENUMERATOR_HPP

#include "treegen/network.hpp"
#include "treegen/ted.hpp"
#include "treegen/unified.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace treegen {

class SweepTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class NetKind { TS, TD, TI, TE };
enum class Strategy { Full, Compositional };

std::string to_string(NetKind k);
std::string to_string(Strategy s);
NetKind parse_kind(const std::string& s);
Strategy parse_strategy(const std::string& s);

// Number of network inputs for a kind: d, 2d, 4d or 7d.
int input_arity(NetKind kind, int d);
ReluNetwork build_network(NetKind kind, const EulerString& e, int d, const Rational& delta = Rational(1, 100),
                          BuildOptions opts = {});

struct SweepPlan {
    NetKind kind = NetKind::TD;
    LabeledTree tree;
    int d = 1;
    // Labels for insertions (and substitutions unless sub_labels is set); empty means 1..m.
    std::vector<int> labels;
    std::vector<int> sub_labels;
    Strategy strategy = Strategy::Full;
    Rational delta{1, 100};
    std::uint64_t cap = 20'000'000;
    int jobs = 1;
    // Compare every network output with the symbolic reference of its kind.
    bool check_reference = false;
};

// A block is a product of factors; each factor assigns one of its tuples to
// its slots. Slots no factor touches stay at `base`.
struct InputFactor {
    std::vector<int> slots;
    std::vector<std::vector<Rational>> tuples;
};
struct InputBlock {
    std::vector<Rational> base;
    std::vector<InputFactor> factors;
    std::uint64_t size() const;
    std::vector<Rational> at(std::uint64_t index) const;
};
std::vector<InputBlock> sweep_domain(const SweepPlan& plan);
std::uint64_t sweep_size(const SweepPlan& plan);

// Largest grid point in [0, 1) inside discretization class `index` of `classes`
// (class i is ((i-1)/k, i/k], the first one closed when `closed_first`).
std::optional<Rational> class_representative(int index, int classes, bool closed_first, const Rational& delta);

struct EnumerationReport {
    LabeledTree tree;
    NetKind kind = NetKind::TD;
    int d = 0;
    Strategy strategy = Strategy::Full;
    std::vector<int> labels;
    std::vector<int> sub_labels;
    std::vector<std::vector<std::int64_t>> outputs;  // sentinel-free, sorted
    std::map<int, long long> distances;
    NetworkStats stats;
    long long invalid = 0;
    long long reference_mismatches = -1;  // -1: not checked
    double wall_time = 0;
    std::uint64_t sweep_size = 0;

    long long count() const { return static_cast<long long>(outputs.size()); }
};

EnumerationReport sweep(const SweepPlan& plan);

nlohmann::json to_json(const EnumerationReport& r);
EnumerationReport report_from_json(const nlohmann::json& j);
std::string format_report(const EnumerationReport& r);

struct OracleDiff {
    SymbolSet missing;  // in the ball, not generated
    SymbolSet extra;    // generated, not in the ball
    bool exact() const { return missing.empty() && extra.empty(); }
};
OracleDiff compare_with_oracle(const EnumerationReport& r, const SymbolSet& ball);

// The staged ball a sweep of this kind should reproduce: at most d
// substitutions (TS) or deletions (TD), exactly d insertions (TI), and for TE
// every staged combination of at most d operations.
SymbolSet oracle_ball(NetKind kind, const LabeledTree& tree, int d, const std::vector<int>& labels,
                      BallSemantics semantics = BallSemantics::Staged, std::uint64_t cap = 20'000'000);

struct NamedStats {
    std::string name;
    NetKind kind;
    NetworkStats stats;
};
struct StatsTable {
    std::string text;
    bool constant_depth = true;  // equal depth within each kind
};
StatsTable stats_table(const std::vector<NamedStats>& rows);

}  // namespace treegen

#endif
