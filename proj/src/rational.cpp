#include "amalgam/rational.hpp"

#include <numeric>
#include <ostream>
#include <stdexcept>

namespace amalgam {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v, const char* ctx)
{
    if (v > INT64_MAX || v < INT64_MIN)
        throw std::overflow_error(std::string("rational overflow in ") + ctx);
    return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b)
{
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

} // namespace

Rational::Rational(std::int64_t n, std::int64_t d)
{
    if (d == 0)
        throw std::invalid_argument("rational with zero denominator");
    i128 nn = n, dd = d;
    if (dd < 0) {
        nn = -nn;
        dd = -dd;
    }
    i128 g = gcd128(nn, dd);
    if (g == 0) g = 1;
    num_ = narrow(nn / g, "construction");
    den_ = narrow(dd / g, "construction");
}

Rational Rational::operator+(const Rational& o) const
{
    i128 n = i128(num_) * o.den_ + i128(o.num_) * den_;
    i128 d = i128(den_) * o.den_;
    i128 g = gcd128(n, d);
    if (g == 0) g = 1;
    Rational r;
    r.num_ = narrow(n / g, "addition");
    r.den_ = narrow(d / g, "addition");
    return r;
}

Rational Rational::operator-(const Rational& o) const
{
    return *this + (-o);
}

Rational Rational::operator*(const Rational& o) const
{
    i128 n = i128(num_) * o.num_;
    i128 d = i128(den_) * o.den_;
    i128 g = gcd128(n, d);
    if (g == 0) g = 1;
    Rational r;
    r.num_ = narrow(n / g, "multiplication");
    r.den_ = narrow(d / g, "multiplication");
    return r;
}

Rational Rational::operator/(const Rational& o) const
{
    if (o.num_ == 0)
        throw std::invalid_argument("rational division by zero");
    i128 n = i128(num_) * o.den_;
    i128 d = i128(den_) * o.num_;
    if (d < 0) {
        n = -n;
        d = -d;
    }
    i128 g = gcd128(n, d);
    if (g == 0) g = 1;
    Rational r;
    r.num_ = narrow(n / g, "division");
    r.den_ = narrow(d / g, "division");
    return r;
}

bool Rational::operator<(const Rational& o) const
{
    return i128(num_) * o.den_ < i128(o.num_) * den_;
}

std::string Rational::str() const
{
    if (den_ == 1)
        return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(const std::string& s)
{
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos)
            return Rational(std::stoll(s));
        std::int64_t n = std::stoll(s.substr(0, slash));
        std::int64_t d = std::stoll(s.substr(slash + 1));
        return Rational(n, d);
    } catch (const std::logic_error&) {
        throw std::invalid_argument("malformed rational: " + s);
    }
}

bool Rational::is_dyadic() const
{
    std::int64_t d = den_;
    while (d % 2 == 0)
        d /= 2;
    return d == 1;
}

std::ostream& operator<<(std::ostream& os, const Rational& r)
{
    return os << r.str();
}

std::int64_t checked_lcm(std::int64_t a, std::int64_t b)
{
    if (a <= 0 || b <= 0)
        throw std::invalid_argument("lcm of non-positive values");
    std::int64_t g = std::gcd(a, b);
    i128 l = i128(a) / g * b;
    return narrow(l, "lcm");
}

} // namespace amalgam
