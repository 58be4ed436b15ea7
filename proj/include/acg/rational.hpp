// rational.hpp — exact rational scalars: parsing, printing, Gaussian rationals

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <stdexcept>
#include <string>

namespace acg {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }

// Exact conversion: every finite double is a dyadic rational.
inline Rational rational_from_double(double x) { return Rational(x); }

// Accepts "p", "p/q", or a finite decimal like "-0.25".
inline Rational parse_rational(std::string s) {
    if (!s.empty() && s[0] == '+') s.erase(0, 1);
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        boost::multiprecision::cpp_int num(s.substr(0, slash));
        boost::multiprecision::cpp_int den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
        return Rational(num, den);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(boost::multiprecision::cpp_int(s));
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    bool neg = !digits.empty() && digits[0] == '-';
    if (neg || (!digits.empty() && digits[0] == '+')) digits.erase(0, 1);
    while (digits.size() > 1 && digits[0] == '0') digits.erase(0, 1); // cpp_int reads 0-prefix as octal
    if (digits.empty()) throw std::invalid_argument("malformed rational '" + s + "'");
    boost::multiprecision::cpp_int num(digits);
    boost::multiprecision::cpp_int den = 1;
    for (size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    if (neg) num = -num;
    return Rational(num, den);
}

inline std::string to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

// Gaussian rational: exact complex number with rational real/imaginary parts.
struct GRational {
    Rational re, im;

    GRational() = default;
    GRational(Rational r) : re(std::move(r)) {}
    GRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

    static GRational from_complex(std::complex<double> z) {
        return {rational_from_double(z.real()), rational_from_double(z.imag())};
    }
    std::complex<double> to_complex() const { return {to_double(re), to_double(im)}; }

    GRational conj() const { return {re, -im}; }
    bool is_zero() const { return re == 0 && im == 0; }

    friend GRational operator+(const GRational& a, const GRational& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend GRational operator-(const GRational& a, const GRational& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend GRational operator-(const GRational& a) { return {-a.re, -a.im}; }
    friend GRational operator*(const GRational& a, const GRational& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend GRational operator*(const Rational& s, const GRational& a) {
        return {s * a.re, s * a.im};
    }
    friend bool operator==(const GRational& a, const GRational& b) {
        return a.re == b.re && a.im == b.im;
    }
    GRational& operator+=(const GRational& o) { re += o.re; im += o.im; return *this; }
};

} // namespace acg
