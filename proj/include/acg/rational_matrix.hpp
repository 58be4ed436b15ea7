// rational_matrix.hpp — exact Gaussian-rational matrices and the exact
// linear algebra used by witness certification

#pragma once

#include "acg/matrix.hpp"
#include "acg/rational.hpp"

#include <stdexcept>
#include <vector>

namespace acg {

class RationalMatrix {
public:
    RationalMatrix() : dim_(0) {}
    explicit RationalMatrix(int dim) : dim_(dim), e_(static_cast<size_t>(dim) * dim) {}

    static RationalMatrix identity(int d) {
        RationalMatrix m(d);
        for (int i = 0; i < d; ++i) m.at(i, i) = GRational(Rational(1));
        return m;
    }

    // Exact: every double entry is a dyadic rational.
    static RationalMatrix from_complex(const Matrix& m) {
        RationalMatrix out(static_cast<int>(m.rows()));
        for (int i = 0; i < out.dim_; ++i)
            for (int j = 0; j < out.dim_; ++j)
                out.at(i, j) = GRational::from_complex(m(i, j));
        return out;
    }

    int dim() const { return dim_; }
    GRational& at(int i, int j) { return e_[static_cast<size_t>(i) * dim_ + j]; }
    const GRational& at(int i, int j) const { return e_[static_cast<size_t>(i) * dim_ + j]; }

    Matrix to_complex() const {
        Matrix m(dim_, dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) m(i, j) = at(i, j).to_complex();
        return m;
    }

    bool is_hermitian() const {
        for (int i = 0; i < dim_; ++i)
            for (int j = i; j < dim_; ++j)
                if (!(at(i, j) == at(j, i).conj())) return false;
        return true;
    }

    bool is_zero() const {
        for (const auto& z : e_)
            if (!z.is_zero()) return false;
        return true;
    }

    friend RationalMatrix operator+(const RationalMatrix& a, const RationalMatrix& b) {
        check_dims(a, b);
        RationalMatrix c(a.dim_);
        for (size_t i = 0; i < a.e_.size(); ++i) c.e_[i] = a.e_[i] + b.e_[i];
        return c;
    }
    friend RationalMatrix operator-(const RationalMatrix& a, const RationalMatrix& b) {
        check_dims(a, b);
        RationalMatrix c(a.dim_);
        for (size_t i = 0; i < a.e_.size(); ++i) c.e_[i] = a.e_[i] - b.e_[i];
        return c;
    }
    friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
        check_dims(a, b);
        RationalMatrix c(a.dim_);
        for (int i = 0; i < a.dim_; ++i)
            for (int k = 0; k < a.dim_; ++k) {
                if (a.at(i, k).is_zero()) continue;
                for (int j = 0; j < a.dim_; ++j) c.at(i, j) += a.at(i, k) * b.at(k, j);
            }
        return c;
    }
    friend RationalMatrix operator*(const Rational& s, const RationalMatrix& a) {
        RationalMatrix c(a.dim_);
        for (size_t i = 0; i < a.e_.size(); ++i) c.e_[i] = s * a.e_[i];
        return c;
    }
    friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
        return a.dim_ == b.dim_ && a.e_ == b.e_;
    }

private:
    static void check_dims(const RationalMatrix& a, const RationalMatrix& b) {
        if (a.dim_ != b.dim_) throw std::invalid_argument("RationalMatrix: dim mismatch");
    }
    int dim_;
    std::vector<GRational> e_;
};

inline RationalMatrix commutator(const RationalMatrix& a, const RationalMatrix& b) {
    return a * b - b * a;
}

using RationalVector = std::vector<GRational>;

inline RationalVector rational_vector_from_complex(const Vector& v) {
    RationalVector out(static_cast<size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = GRational::from_complex(v(i));
    return out;
}

// Exact Rayleigh quotient Re(v* M v) / (v* v) of a Hermitian rational matrix.
// For PSD M this is an unconditional lower bound on the top eigenvalue.
inline Rational rayleigh_quotient_exact(const RationalMatrix& m, const RationalVector& v) {
    if (static_cast<int>(v.size()) != m.dim())
        throw std::invalid_argument("rayleigh_quotient_exact: dim mismatch");
    Rational num = 0, den = 0;
    for (int i = 0; i < m.dim(); ++i) {
        den += v[i].re * v[i].re + v[i].im * v[i].im;
        for (int j = 0; j < m.dim(); ++j) {
            GRational t = v[i].conj() * m.at(i, j) * v[j];
            num += t.re;
        }
    }
    if (den == 0) throw std::invalid_argument("rayleigh_quotient_exact: zero vector");
    return num / den;
}

} // namespace acg
