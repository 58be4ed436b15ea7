// matrix.hpp — dense Hermitian calculus: eigendecomposition, PSD square roots,
// positive parts, operator norm, PSD-cone distance, commutators, state pairing

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace acg {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kEigTol = 1e-10;     // reconstruction tolerance per unit dim
inline constexpr double kPsdClampTol = 1e-9; // eigenvalues in [-tol, 0) treated as 0

struct NotPsdError : std::runtime_error {
    double offending_eigenvalue;
    explicit NotPsdError(double lam)
        : std::runtime_error("matrix is not PSD: eigenvalue " + std::to_string(lam)),
          offending_eigenvalue(lam) {}
};

struct EigError : std::runtime_error {
    double residual;
    explicit EigError(double res)
        : std::runtime_error("eigensolver failed, residual " + std::to_string(res)),
          residual(res) {}
};

// Hermitian matrix; symmetrized (m + m*)/2 on construction to absorb roundoff.
class HermMatrix {
public:
    HermMatrix() = default;
    explicit HermMatrix(const Matrix& m) {
        if (m.rows() != m.cols()) throw std::invalid_argument("HermMatrix: not square");
        m_ = 0.5 * (m + m.adjoint().eval());
    }
    static HermMatrix identity(int d) { return HermMatrix(Matrix::Identity(d, d)); }
    static HermMatrix zero(int d) { return HermMatrix(Matrix::Zero(d, d)); }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& mat() const { return m_; }

private:
    Matrix m_;
};

// Eigenvalues descending, eigenvector columns matching that order.
struct SpectralDecomp {
    Eigen::VectorXd eigenvalues;
    Matrix eigenvectors;

    Matrix reconstruct() const {
        return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint();
    }
};

inline SpectralDecomp eig_herm(const HermMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
    if (es.info() != Eigen::Success) throw EigError(m.mat().norm());
    const int d = m.dim();
    SpectralDecomp out;
    out.eigenvalues.resize(d);
    out.eigenvectors.resize(d, d);
    for (int i = 0; i < d; ++i) { // Eigen sorts ascending; flip to descending
        out.eigenvalues(i) = es.eigenvalues()(d - 1 - i);
        out.eigenvectors.col(i) = es.eigenvectors().col(d - 1 - i);
    }
    double res = (out.reconstruct() - m.mat()).cwiseAbs().maxCoeff();
    if (res > kEigTol * d) throw EigError(res);
    return out;
}

inline HermMatrix sqrt_psd(const HermMatrix& m) {
    SpectralDecomp sd = eig_herm(m);
    Eigen::VectorXd lam = sd.eigenvalues;
    for (int i = 0; i < lam.size(); ++i) {
        if (lam(i) < -kPsdClampTol) throw NotPsdError(lam(i));
        lam(i) = std::sqrt(std::max(0.0, lam(i)));
    }
    return HermMatrix(sd.eigenvectors * lam.asDiagonal() * sd.eigenvectors.adjoint());
}

// V max(Lambda,0) V*
inline HermMatrix positive_part(const HermMatrix& m) {
    SpectralDecomp sd = eig_herm(m);
    Eigen::VectorXd lam = sd.eigenvalues.cwiseMax(0.0);
    return HermMatrix(sd.eigenvectors * lam.asDiagonal() * sd.eigenvectors.adjoint());
}

// Largest singular value (= max |eigenvalue| for Hermitian input).
inline double op_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

inline double op_norm(const HermMatrix& m) {
    if (m.dim() == 0) return 0.0;
    SpectralDecomp sd = eig_herm(m);
    double hi = sd.eigenvalues(0), lo = sd.eigenvalues(sd.eigenvalues.size() - 1);
    return std::max(std::abs(hi), std::abs(lo));
}

// Operator-norm distance from m to the PSD cone {Z*Z}: max(0, -lambda_min).
inline double psd_cone_distance(const HermMatrix& m) {
    SpectralDecomp sd = eig_herm(m);
    return std::max(0.0, -sd.eigenvalues(sd.eigenvalues.size() - 1));
}

inline Matrix commutator(const HermMatrix& a, const HermMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("commutator: dimension mismatch");
    return a.mat() * b.mat() - b.mat() * a.mat();
}

// Density matrix; Hermitian PSD with unit trace.
class State {
public:
    State() = default;
    explicit State(const Matrix& rho) : rho_(0.5 * (rho + rho.adjoint().eval())) {
        if (rho.rows() != rho.cols()) throw std::invalid_argument("State: not square");
        double tr = rho_.trace().real();
        if (std::abs(tr - 1.0) > 1e-10) throw std::invalid_argument("State: trace != 1");
        double dist = psd_cone_distance(HermMatrix(rho_));
        if (dist > 1e-10) throw NotPsdError(-dist);
    }

    static State maximally_mixed(int d) {
        return State(Matrix::Identity(d, d) / static_cast<double>(d));
    }
    static State pure(const Vector& v) {
        double nn = v.squaredNorm();
        if (nn <= 0) throw std::invalid_argument("State::pure: zero vector");
        return State(v * v.adjoint() / nn);
    }

    int dim() const { return static_cast<int>(rho_.rows()); }
    const Matrix& rho() const { return rho_; }

private:
    Matrix rho_;
};

// trace(rho m); real up to roundoff when m is Hermitian
inline Complex state_expect(const State& phi, const Matrix& m) {
    if (phi.dim() != m.rows() || m.rows() != m.cols())
        throw std::invalid_argument("state_expect: dimension mismatch");
    return (phi.rho() * m).trace();
}

inline Complex state_expect(const State& phi, const HermMatrix& m) {
    return state_expect(phi, m.mat());
}

} // namespace acg
