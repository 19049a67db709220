#ifndef TREEGEN_RATIONAL_HPP
#define TREEGEN_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/Core>

#include <compare>
#include <concepts>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace treegen {

// Exact rational number. Values whose numerator and denominator fit in 64 bits
// are stored inline; anything larger transparently moves to an arbitrary
// precision representation, so no operation ever rounds.
class Rational {
public:
    using Big = boost::multiprecision::cpp_rational;

    Rational() = default;
    template <std::integral I>
    Rational(I v) : num_(static_cast<std::int64_t>(v)) {}  // NOLINT(implicit)
    Rational(std::int64_t num, std::int64_t den);
    explicit Rational(const Big& v);

    // Accepts "a", "a/b" and decimal literals such as "-0.38".
    static Rational parse(std::string_view text);

    std::string str() const;
    Big to_big() const;
    double to_double() const;

    bool is_small() const { return !big_; }
    // Inline numerator/denominator; only meaningful when is_small().
    std::int64_t small_num() const { return num_; }
    std::int64_t small_den() const { return den_; }
    bool is_integer() const;
    std::optional<std::int64_t> to_int64() const;
    int sign() const;

    Rational floor() const;
    Rational ceil() const;
    Rational abs() const { return sign() < 0 ? -*this : *this; }

    Rational operator-() const;
    Rational& operator+=(const Rational& o);
    Rational& operator-=(const Rational& o);
    Rational& operator*=(const Rational& o);
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b);
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    void assign_big(const Big& v);

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
    std::shared_ptr<const Big> big_;
};

inline Rational relu(const Rational& x) { return x.sign() > 0 ? x : Rational(0); }

}  // namespace treegen

namespace Eigen {
template <>
struct NumTraits<treegen::Rational> : GenericNumTraits<treegen::Rational> {
    using Real = treegen::Rational;
    using NonInteger = treegen::Rational;
    using Literal = treegen::Rational;
    using Nested = treegen::Rational;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 4,
        AddCost = 8,
        MulCost = 8
    };
    static inline Real epsilon() { return 0; }
    static inline Real dummy_precision() { return 0; }
    static inline int digits10() { return 0; }
};
}  // namespace Eigen

#endif
