#ifndef AMALGAM_RATIONAL_HPP
#define AMALGAM_RATIONAL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

namespace amalgam {

// Exact rational arithmetic on 64-bit components.  Values are kept in
// lowest terms with a positive denominator; every operation re-normalises.
// Intermediate products are computed in 128-bit and overflow of the reduced
// result raises, rather than silently wrapping.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    Rational operator-() const { return Rational(-num_, den_); }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    bool operator==(const Rational& o) const {
        return num_ == o.num_ && den_ == o.den_;
    }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const;
    bool operator<=(const Rational& o) const { return *this < o || *this == o; }
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator>=(const Rational& o) const { return o <= *this; }

    // Serialised as "p/q" ("p" when q == 1); parse accepts both forms.
    std::string str() const;
    static Rational parse(const std::string& s);

    // True when the denominator is a power of two.
    bool is_dyadic() const;

private:
    std::int64_t num_;
    std::int64_t den_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

// Least common multiple of two positive 64-bit values, overflow-checked.
std::int64_t checked_lcm(std::int64_t a, std::int64_t b);

} // namespace amalgam

#endif
