#ifndef TREEGEN_CIRCUIT_HPP
#define TREEGEN_CIRCUIT_HPP

#include "treegen/network.hpp"
#include "treegen/rational.hpp"

#include <concepts>
#include <stdexcept>
#include <string>
#include <vector>

namespace treegen {

class BuildError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Range {
    Rational lo;
    Rational hi;
};

// Affine expression over circuit nodes, with a conservative value range.
class Expr {
public:
    struct Term {
        int node;
        Rational coeff;
    };

    Expr() = default;
    Expr(const Rational& c) : constant_(c), range_{c, c} {}  // NOLINT(implicit)
    template <std::integral I>
    Expr(I v) : Expr(Rational(v)) {}  // NOLINT(implicit)

    bool is_constant() const { return terms_.empty(); }
    const Rational& constant() const { return constant_; }
    const std::vector<Term>& terms() const { return terms_; }
    const Range& range() const { return range_; }
    const Rational& lo() const { return range_.lo; }
    const Rational& hi() const { return range_.hi; }

    // Replaces the computed range by a tighter one the caller can vouch for
    // (one-hot selections, for instance).
    Expr with_range(const Rational& lo, const Rational& hi) const;

    Expr& operator+=(const Expr& o);
    Expr& operator-=(const Expr& o);
    Expr& operator*=(const Rational& k);
    Expr operator-() const;
    friend Expr operator+(Expr a, const Expr& b) { return a += b; }
    friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
    friend Expr operator*(Expr a, const Rational& k) { return a *= k; }
    friend Expr operator*(const Rational& k, Expr a) { return a *= k; }
    friend Expr operator/(Expr a, const Rational& k) { return a *= Rational(1) / k; }

private:
    friend class Circuit;
    std::vector<Term> terms_;
    Rational constant_;
    Range range_{Rational(0), Rational(0)};
};

Expr sum(const std::vector<Expr>& xs);

struct BuildOptions {
    // Evaluate constant subexpressions at build time and skip ReLUs whose sign
    // is known from ranges. Off by default so the network mirrors every equation.
    bool fold_constants = false;
    // Use gated ReLU forms for products even when one factor is a constant.
    bool product_free = false;
};

// Builds a layered ReLU program unit by unit; compile() lays units out by
// level and inserts carrier units so every layer reads only the previous one.
class Circuit {
public:
    explicit Circuit(BuildOptions opts = {}, Rational masking = Rational(0));

    const BuildOptions& options() const { return opts_; }
    const Rational& masking() const { return C_; }

    Expr input(const Rational& lo, const Rational& hi);
    Expr relu(const Expr& e);

    void trace(const std::string& name, const std::vector<Expr>& values, std::vector<int> dims,
               std::vector<int> origins);
    void trace(const std::string& name, const std::vector<Expr>& values, int origin = 1) {
        trace(name, values, {static_cast<int>(values.size())}, {origin});
    }
    void trace(const std::string& name, const std::vector<std::vector<Expr>>& values, int origin0 = 1,
               int origin1 = 1);
    void require_grid(const Expr& e, const Rational& grid, const char* what);

    class Scope {
    public:
        Scope(Circuit& c, std::string prefix) : c_(c), saved_(c.prefix_) { c.prefix_ += prefix; }
        ~Scope() { c_.prefix_ = saved_; }
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        Circuit& c_;
        std::string saved_;
    };
    Scope scope(const std::string& prefix) { return Scope(*this, prefix); }

    int num_inputs() const { return num_inputs_; }
    long long num_units() const { return static_cast<long long>(nodes_.size()) - num_inputs_; }
    int depth() const { return max_level_; }

    ReluNetwork compile(const std::vector<Expr>& outputs) const;

private:
    struct Node {
        int level = 0;
        int input_index = -1;  // >= 0 for inputs
        std::vector<Expr::Term> terms;
        Rational bias;
        Range range;
    };
    struct TraceEntry {
        std::string name;
        std::vector<int> dims;
        std::vector<int> origins;
        std::vector<Expr> values;
    };
    struct Contract {
        Expr value;
        Rational grid;
        std::string what;
    };

    Expr node_expr(int id) const;
    static void normalize(Expr& e);

    BuildOptions opts_;
    Rational C_;
    std::vector<Node> nodes_;
    int num_inputs_ = 0;
    int max_level_ = 0;
    std::string prefix_;
    std::vector<TraceEntry> traces_;
    std::vector<Contract> contracts_;
};

// ---- gadgets ---------------------------------------------------------------
// Values marked "binary" are in {0, 1}; comparisons assume their argument is a
// multiple of `grid` (checked in debug evaluation through grid contracts).

Expr max_of(Circuit& c, const Expr& a, const Expr& b);
// 1 if a = b else 0.
Expr delta(Circuit& c, const Expr& a, const Expr& b, const Rational& grid = 1);
// 1 if x >= 1 else 0 on integers.
Expr heaviside(Circuit& c, const Expr& x);
// [x >= theta] and [x <= theta] for x on the grid; theta may lie off the grid.
Expr at_least(Circuit& c, const Expr& x, const Rational& theta, const Rational& grid = 1);
Expr at_most(Circuit& c, const Expr& x, const Rational& theta, const Rational& grid = 1);
// [x >= 0].
inline Expr nonneg(Circuit& c, const Expr& x) { return at_least(c, x, 0); }
// [a <= x <= b], or (a, b] when left_open.
Expr interval(Circuit& c, const Expr& x, const Rational& a, const Rational& b, const Rational& grid = 1,
              bool left_open = false);
Expr logical_and(Circuit& c, const std::vector<Expr>& bits);
Expr logical_or(Circuit& c, const Expr& u, const Expr& v);
// v if cond = 1 else 0 (cond binary, 0 <= v < C/2).
Expr keep_if(Circuit& c, const Expr& v, const Expr& cond);
// v if cond = 0 else 0 (cond a nonnegative integer).
Expr drop_if(Circuit& c, const Expr& v, const Expr& cond);
// t * q for binary q; linear when t is a build-time constant unless product_free.
Expr product(Circuit& c, const Expr& t, const Expr& q);

}  // namespace treegen

#endif
