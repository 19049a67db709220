#ifndef TREEGEN_NETWORK_HPP
#define TREEGEN_NETWORK_HPP

#include "treegen/rational.hpp"

#include <Eigen/SparseCore>
#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace treegen {

class WidthMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ContractViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using SparseRational = Eigen::SparseMatrix<Rational, Eigen::RowMajor>;

struct Layer {
    SparseRational weights;  // rows = outputs, cols = inputs
    std::vector<Rational> bias;
    bool relu = true;

    int in_width() const { return static_cast<int>(weights.cols()); }
    int out_width() const { return static_cast<int>(weights.rows()); }
};

// A value readable from a forward pass: constant + sum of coeff * activation,
// where layer 0 is the input and layer k the output of the k-th layer.
struct WireRef {
    struct Term {
        int layer;
        int coord;
        Rational coeff;
    };
    Rational constant;
    std::vector<Term> terms;
};

struct Wire {
    std::vector<int> dims;     // shape of the named variable
    std::vector<int> origins;  // first index along each dimension
    std::vector<WireRef> refs; // row-major
};

// Declares that a value must lie on the grid `grid` (an integer when grid = 1).
struct GridContract {
    WireRef value;
    Rational grid;
    std::string what;
};

struct NetworkStats {
    int depth = 0;  // hidden layers
    std::vector<int> widths;
    long long total = 0;
    int min_width = 0;
    int max_width = 0;
    double avg_width = 0;
};

class ReluNetwork {
public:
    ReluNetwork() = default;
    ReluNetwork(int input_width, std::vector<Layer> layers);

    int input_width() const { return input_width_; }
    int output_width() const;
    int depth() const { return static_cast<int>(layers_.size()) - 1; }
    const std::vector<Layer>& layers() const { return layers_; }
    NetworkStats stats() const;
    long long nonzeros() const;

    std::vector<Rational> eval(const std::vector<Rational>& x) const;
    // Every layer's activations; index 0 is the input. Checks grid contracts when asked.
    std::vector<std::vector<Rational>> eval_all(const std::vector<Rational>& x, bool check_contracts = false) const;

    const std::map<std::string, Wire>& trace() const { return trace_; }
    std::map<std::string, Wire>& trace() { return trace_; }
    const std::vector<GridContract>& contracts() const { return contracts_; }
    std::vector<GridContract>& contracts() { return contracts_; }
    bool has_wire(const std::string& name) const { return trace_.count(name) != 0; }
    const Wire& wire(const std::string& name) const;
    std::vector<Rational> read_wire(const std::string& name, const std::vector<std::vector<Rational>>& acts) const;
    static Rational read_ref(const WireRef& ref, const std::vector<std::vector<Rational>>& acts);

    // Free-form metadata (kind, n, m, d, constants) carried through serialization.
    nlohmann::json& meta() { return meta_; }
    const nlohmann::json& meta() const { return meta_; }

private:
    void check_shapes() const;

    int input_width_ = 0;
    std::vector<Layer> layers_;
    std::map<std::string, Wire> trace_;
    std::vector<GridContract> contracts_;
    nlohmann::json meta_ = nlohmann::json::object();
};

// f after g. The affine output layer of g merges into the first layer of f.
ReluNetwork compose(const ReluNetwork& f, const ReluNetwork& g);
// Juxtaposition: inputs and outputs concatenated, shallower nets padded.
ReluNetwork parallel(const ReluNetwork& a, const ReluNetwork& b);
// Identity on `width` coordinates through `hidden` hidden layers.
ReluNetwork passthrough(int width, int hidden = 0);

nlohmann::json to_json(const ReluNetwork& net);
ReluNetwork network_from_json(const nlohmann::json& j);
void save_network(const ReluNetwork& net, const std::string& path);
ReluNetwork load_network(const std::string& path);

// Exact integer-backed evaluator for sweeps. Weights are stored as int64
// numerators over a per-layer denominator and activations as int64 over a
// running common denominator; anything that would not fit falls back to the
// exact rational path, so results are always exact.
class FastEvaluator {
public:
    explicit FastEvaluator(const ReluNetwork& net);
    std::vector<Rational> eval(const std::vector<Rational>& x) const;
    bool usable() const { return usable_; }

private:
    struct FastLayer {
        std::vector<int> row_ptr;
        std::vector<int> cols;
        std::vector<std::int64_t> nums;
        std::vector<std::int64_t> bias;
        std::int64_t den = 1;
        bool relu = true;
    };
    bool try_eval(const std::vector<Rational>& x, std::vector<Rational>& out) const;

    const ReluNetwork* net_;
    std::vector<FastLayer> layers_;
    bool usable_ = true;
};

}  // namespace treegen

#endif
