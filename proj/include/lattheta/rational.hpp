#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <stdexcept>
#include <string>

namespace lattheta {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline int sign(const Rat& r) { return r.sign(); }
inline int sign(const Int& n) { return n.sign(); }

inline Rat abs_rat(const Rat& r) { return r < 0 ? Rat(-r) : r; }

// floor(n/d) with d > 0; cpp_int division truncates toward zero.
inline Int floor_div(const Int& n, const Int& d) {
    Int q = n / d;
    if (n % d != 0 && n < 0) --q;
    return q;
}

inline Int floor_rat(const Rat& r) { return floor_div(rat_num(r), rat_den(r)); }

inline Int ceil_rat(const Rat& r) {
    Int f = floor_rat(r);
    return (Rat(f) == r) ? f : Int(f + 1);
}

inline Rat pow_rat(const Rat& base, long e) {
    if (e < 0) {
        if (base == 0) throw std::domain_error("pow_rat: zero base with negative exponent");
        return Rat(1) / pow_rat(base, -e);
    }
    Rat result = 1, b = base;
    unsigned long n = static_cast<unsigned long>(e);
    while (n != 0) {
        if (n & 1u) result *= b;
        b *= b;
        n >>= 1;
    }
    return result;
}

// Strict "[-]digits[/digits]" parser; used by the lattice spec grammar and the
// CLI matrix reader. Throws std::invalid_argument with a description on junk.
inline Rat parse_rational(const std::string& text) {
    std::size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        neg = (text[i] == '-');
        ++i;
    }
    auto read_digits = [&](const char* what) {
        std::size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (i == start) throw std::invalid_argument(std::string("parse_rational: expected ") + what + " in '" + text + "'");
        return Int(text.substr(start, i - start));
    };
    Int num = read_digits("numerator digits");
    Int den = 1;
    if (i < text.size() && text[i] == '/') {
        ++i;
        den = read_digits("denominator digits");
        if (den == 0) throw std::invalid_argument("parse_rational: zero denominator in '" + text + "'");
    }
    if (i != text.size()) throw std::invalid_argument("parse_rational: trailing characters in '" + text + "'");
    Rat r(num, den);
    return neg ? Rat(-r) : r;
}

inline std::string to_string(const Rat& r) {
    std::string s = rat_num(r).str();
    if (rat_den(r) != 1) s += "/" + rat_den(r).str();
    return s;
}

} // namespace lattheta
