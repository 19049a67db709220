#include "treegen/rational.hpp"

#include <cctype>
#include <limits>
#include <stdexcept>

namespace treegen {

namespace {

using i128 = __int128;
using u128 = unsigned __int128;

constexpr i128 kMin64 = std::numeric_limits<std::int64_t>::min();
constexpr i128 kMax64 = std::numeric_limits<std::int64_t>::max();

u128 gcd128(u128 a, u128 b) {
    while (b != 0) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

u128 abs128(i128 v) { return v < 0 ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v); }

// Reduces num/den (den != 0) and stores it inline if it fits.
bool reduce_into(i128 num, i128 den, std::int64_t& out_num, std::int64_t& out_den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    if (num == 0) {
        out_num = 0;
        out_den = 1;
        return true;
    }
    u128 g = gcd128(abs128(num), static_cast<u128>(den));
    if (g > 1) {
        num /= static_cast<i128>(g);
        den /= static_cast<i128>(g);
    }
    if (num < kMin64 || num > kMax64 || den > kMax64) return false;
    out_num = static_cast<std::int64_t>(num);
    out_den = static_cast<std::int64_t>(den);
    return true;
}

Rational::Big big_of(i128 num, i128 den) {
    using boost::multiprecision::cpp_int;
    auto conv = [](i128 v) {
        bool neg = v < 0;
        u128 mag = abs128(v);
        cpp_int r = static_cast<std::uint64_t>(mag >> 64);
        r <<= 64;
        r += static_cast<std::uint64_t>(mag);
        return neg ? cpp_int(-r) : r;
    };
    return Rational::Big(conv(num), conv(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    if (!reduce_into(num, den, num_, den_)) assign_big(big_of(num, den));
}

Rational::Rational(const Big& v) { assign_big(v); }

void Rational::assign_big(const Big& v) {
    using boost::multiprecision::cpp_int;
    const cpp_int& n = boost::multiprecision::numerator(v);
    const cpp_int& d = boost::multiprecision::denominator(v);
    static const cpp_int lo = std::numeric_limits<std::int64_t>::min();
    static const cpp_int hi = std::numeric_limits<std::int64_t>::max();
    if (n >= lo && n <= hi && d <= hi) {
        num_ = n.convert_to<std::int64_t>();
        den_ = d.convert_to<std::int64_t>();
        big_.reset();
    } else {
        num_ = 0;
        den_ = 1;
        big_ = std::make_shared<const Big>(v);
    }
}

Rational Rational::parse(std::string_view text) {
    std::string s(text);
    auto trim = [](std::string& t) {
        while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
        while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    };
    trim(s);
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    auto parse_int = [&](const std::string& t) {
        if (t.empty()) throw std::invalid_argument("bad rational literal: " + s);
        std::size_t start = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (start == t.size()) throw std::invalid_argument("bad rational literal: " + s);
        for (std::size_t i = start; i < t.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(t[i])))
                throw std::invalid_argument("bad rational literal: " + s);
        // cpp_int reads a leading 0 as an octal prefix
        std::size_t digits = t.find_first_not_of('0', start);
        std::string body = digits == std::string::npos ? "0" : t.substr(digits);
        boost::multiprecision::cpp_int v(body);
        return t[0] == '-' ? boost::multiprecision::cpp_int(-v) : v;
    };
    if (auto slash = s.find('/'); slash != std::string::npos) {
        auto n = parse_int(s.substr(0, slash));
        auto d = parse_int(s.substr(slash + 1));
        if (d == 0) throw std::domain_error("rational with zero denominator");
        return Rational(Big(n, d));
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
        std::string whole = s.substr(0, dot);
        std::string frac = s.substr(dot + 1);
        bool neg = !whole.empty() && whole[0] == '-';
        if (whole.empty() || whole == "-" || whole == "+") whole += "0";
        if (frac.empty()) throw std::invalid_argument("bad rational literal: " + s);
        auto w = parse_int(whole);
        auto f = parse_int(frac);
        boost::multiprecision::cpp_int scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        if (neg) w = -w;
        boost::multiprecision::cpp_int num = w * scale + f;
        if (neg) num = -num;
        return Rational(Big(num, scale));
    }
    return Rational(Big(parse_int(s)));
}

std::string Rational::str() const {
    if (big_) {
        std::string n = boost::multiprecision::numerator(*big_).str();
        auto d = boost::multiprecision::denominator(*big_);
        return d == 1 ? n : n + "/" + d.str();
    }
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational::Big Rational::to_big() const {
    if (big_) return *big_;
    return Big(num_, den_);
}

double Rational::to_double() const {
    if (big_) return big_->convert_to<double>();
    return static_cast<double>(num_) / static_cast<double>(den_);
}

bool Rational::is_integer() const {
    return big_ ? boost::multiprecision::denominator(*big_) == 1 : den_ == 1;
}

std::optional<std::int64_t> Rational::to_int64() const {
    if (big_ || den_ != 1) return std::nullopt;
    return num_;
}

int Rational::sign() const {
    if (big_) return big_->sign();
    return (num_ > 0) - (num_ < 0);
}

Rational Rational::floor() const {
    if (big_) {
        using boost::multiprecision::cpp_int;
        cpp_int n = boost::multiprecision::numerator(*big_);
        cpp_int d = boost::multiprecision::denominator(*big_);
        cpp_int q = n / d;
        if (n % d != 0 && n < 0) q -= 1;
        return Rational(Big(q));
    }
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return Rational(q);
}

Rational Rational::ceil() const { return -(-*this).floor(); }

Rational Rational::operator-() const {
    if (big_) return Rational(Big(-*big_));
    if (num_ == std::numeric_limits<std::int64_t>::min()) return Rational(Big(-to_big()));
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

Rational& Rational::operator+=(const Rational& o) {
    if (!big_ && !o.big_) {
        if (den_ == 1 && o.den_ == 1) {
            std::int64_t s;
            if (!__builtin_add_overflow(num_, o.num_, &s)) {
                num_ = s;
                return *this;
            }
        }
        i128 n = static_cast<i128>(num_) * o.den_ + static_cast<i128>(o.num_) * den_;
        i128 d = static_cast<i128>(den_) * o.den_;
        if (!reduce_into(n, d, num_, den_)) assign_big(big_of(n, d));
        return *this;
    }
    assign_big(to_big() + o.to_big());
    return *this;
}

Rational& Rational::operator-=(const Rational& o) {
    if (!big_ && !o.big_) {
        if (den_ == 1 && o.den_ == 1) {
            std::int64_t s;
            if (!__builtin_sub_overflow(num_, o.num_, &s)) {
                num_ = s;
                return *this;
            }
        }
        i128 n = static_cast<i128>(num_) * o.den_ - static_cast<i128>(o.num_) * den_;
        i128 d = static_cast<i128>(den_) * o.den_;
        if (!reduce_into(n, d, num_, den_)) assign_big(big_of(n, d));
        return *this;
    }
    assign_big(to_big() - o.to_big());
    return *this;
}

Rational& Rational::operator*=(const Rational& o) {
    if (!big_ && !o.big_) {
        if (den_ == 1 && o.den_ == 1) {
            std::int64_t p;
            if (!__builtin_mul_overflow(num_, o.num_, &p)) {
                num_ = p;
                return *this;
            }
        }
        i128 n = static_cast<i128>(num_) * o.num_;
        i128 d = static_cast<i128>(den_) * o.den_;
        if (!reduce_into(n, d, num_, den_)) assign_big(big_of(n, d));
        return *this;
    }
    assign_big(to_big() * o.to_big());
    return *this;
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.sign() == 0) throw std::domain_error("division by zero");
    if (!big_ && !o.big_) {
        i128 n = static_cast<i128>(num_) * o.den_;
        i128 d = static_cast<i128>(den_) * o.num_;
        if (!reduce_into(n, d, num_, den_)) assign_big(big_of(n, d));
        return *this;
    }
    assign_big(to_big() / o.to_big());
    return *this;
}

bool operator==(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) return a.num_ == b.num_ && a.den_ == b.den_;
    return a.to_big() == b.to_big();
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) {
        i128 l = static_cast<i128>(a.num_) * b.den_;
        i128 r = static_cast<i128>(b.num_) * a.den_;
        return l <=> r;
    }
    auto x = a.to_big();
    auto y = b.to_big();
    if (x < y) return std::strong_ordering::less;
    if (x > y) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

}  // namespace treegen
