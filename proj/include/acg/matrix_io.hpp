// matrix_io.hpp — line-oriented matrix text format, shared by strategy and
// witness files.  First line `dim d`, then d rows of d entries written
// `re` or `re+imi` / `re-imi` with decimal or rational `p/q` components.

#pragma once

#include "acg/matrix.hpp"
#include "acg/rational.hpp"
#include "acg/rational_matrix.hpp"

#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace acg {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Splits "a+bi" / "a-bi" / "a" at the sign that separates the two components
// (a sign is a separator only when preceded by a digit or '.').
inline GRational parse_complex_entry(const std::string& tok) {
    if (tok.empty()) throw ParseError("empty matrix entry");
    size_t split = std::string::npos;
    for (size_t i = 1; i < tok.size(); ++i) {
        if ((tok[i] == '+' || tok[i] == '-') &&
            (std::isdigit(static_cast<unsigned char>(tok[i - 1])) || tok[i - 1] == '.'))
            split = i;
    }
    auto strip_i = [](std::string s) {
        if (s.empty() || s.back() != 'i') throw ParseError("imaginary component missing 'i'");
        s.pop_back();
        if (s.empty() || s == "+") return std::string("1");
        if (s == "-") return std::string("-1");
        return s;
    };
    try {
        if (tok.back() == 'i') {
            if (split == std::string::npos) return GRational(Rational(0), parse_rational(strip_i(tok)));
            return GRational(parse_rational(tok.substr(0, split)),
                             parse_rational(strip_i(tok.substr(split))));
        }
        if (split != std::string::npos) throw ParseError("real entry with two components: " + tok);
        return GRational(parse_rational(tok));
    } catch (const std::invalid_argument& e) {
        throw ParseError("bad matrix entry '" + tok + "': " + e.what());
    }
}

inline std::string format_complex_entry(const GRational& z) {
    if (z.im == 0) return to_string(z.re);
    std::string im = to_string(z.im);
    std::string sep = (im[0] == '-') ? "" : "+";
    return to_string(z.re) + sep + im + "i";
}

inline void write_matrix(std::ostream& os, const RationalMatrix& m) {
    os << "dim " << m.dim() << "\n";
    for (int i = 0; i < m.dim(); ++i) {
        for (int j = 0; j < m.dim(); ++j) os << (j ? " " : "") << format_complex_entry(m.at(i, j));
        os << "\n";
    }
}

// Doubles are written as exact dyadic rationals so that read-back is lossless.
inline void write_matrix(std::ostream& os, const Matrix& m) {
    write_matrix(os, RationalMatrix::from_complex(m));
}

inline RationalMatrix read_rational_matrix(std::istream& is) {
    std::string key;
    int d = 0;
    if (!(is >> key) || key != "dim" || !(is >> d) || d < 1)
        throw ParseError("matrix block must start with 'dim d'");
    RationalMatrix m(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            std::string tok;
            if (!(is >> tok)) throw ParseError("matrix block truncated");
            m.at(i, j) = parse_complex_entry(tok);
        }
    return m;
}

inline Matrix read_matrix(std::istream& is) { return read_rational_matrix(is).to_complex(); }

} // namespace acg
