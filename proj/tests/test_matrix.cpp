#include "acg/matrix.hpp"
#include "acg/matrix_io.hpp"
#include "acg/rational_matrix.hpp"

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace acg;
using namespace acg::testutil;

namespace {
Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}
} // namespace

TEST_CASE("eig_herm diagonal and zero cases") {
    auto sd = eig_herm(HermMatrix(diag2(3, 1)));
    CHECK(sd.eigenvalues(0) == Catch::Approx(3.0));
    CHECK(sd.eigenvalues(1) == Catch::Approx(1.0));
    auto zd = eig_herm(HermMatrix::zero(4));
    for (int i = 0; i < 4; ++i) CHECK(zd.eigenvalues(i) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("eig_herm reconstructs random Hermitian matrices") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + int(rng() % 7);
        HermMatrix h = random_herm(rng, d);
        auto sd = eig_herm(h);
        CHECK((sd.reconstruct() - h.mat()).cwiseAbs().maxCoeff() < 1e-10 * d);
        // descending order and orthonormal columns
        for (int i = 1; i < d; ++i) CHECK(sd.eigenvalues(i - 1) >= sd.eigenvalues(i));
        Matrix gram = sd.eigenvectors.adjoint() * sd.eigenvectors;
        CHECK((gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("sqrt_psd examples and roundtrip oracle") {
    Matrix r = sqrt_psd(HermMatrix(diag2(4, 9))).mat();
    CHECK(r(0, 0).real() == Catch::Approx(2.0));
    CHECK(r(1, 1).real() == Catch::Approx(3.0));
    CHECK((sqrt_psd(HermMatrix::identity(3)).mat() - Matrix::Identity(3, 3)).norm() < 1e-12);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        int d = 2 + int(rng() % 5);
        HermMatrix p = random_psd(rng, d);
        Matrix s = sqrt_psd(p).mat();
        CHECK(op_norm(Matrix(s * s - p.mat())) < 1e-8 * std::max(1.0, op_norm(p)));
        CHECK(psd_cone_distance(HermMatrix(s)) < 1e-10);
    }
    CHECK_THROWS_AS(sqrt_psd(HermMatrix(diag2(1, -1))), NotPsdError);
}

TEST_CASE("positive_part examples") {
    Matrix pp = positive_part(HermMatrix(diag2(1, -2))).mat();
    CHECK(pp(0, 0).real() == Catch::Approx(1.0));
    CHECK(pp(1, 1).real() == Catch::Approx(0.0).margin(1e-14));

    std::mt19937_64 rng(3);
    HermMatrix p = random_psd(rng, 3);
    CHECK(op_norm(Matrix(positive_part(p).mat() - p.mat())) < 1e-10);
    HermMatrix neg(Matrix(-p.mat()));
    CHECK(op_norm(positive_part(neg)) < 1e-10);
}

TEST_CASE("op_norm examples") {
    CHECK(op_norm(HermMatrix(diag2(1, -3))) == Catch::Approx(3.0));
    CHECK(op_norm(HermMatrix::zero(3)) == Catch::Approx(0.0).margin(1e-15));
    Matrix nil = Matrix::Zero(2, 2);
    nil(0, 1) = 1.0;
    // oracle: singular value via sqrt of conjugate-transpose product
    Eigen::SelfAdjointEigenSolver<Matrix> es(nil.adjoint() * nil);
    double oracle = std::sqrt(es.eigenvalues().maxCoeff());
    CHECK(op_norm(nil) == Catch::Approx(oracle));
    CHECK(op_norm(nil) == Catch::Approx(1.0));
}

TEST_CASE("psd_cone_distance examples") {
    CHECK(psd_cone_distance(HermMatrix(diag2(1, -0.5))) == Catch::Approx(0.5));
    std::mt19937_64 rng(5);
    CHECK(psd_cone_distance(random_psd(rng, 4)) == Catch::Approx(0.0).margin(1e-12));
    CHECK(psd_cone_distance(HermMatrix(Matrix(-Matrix::Identity(2, 2)))) == Catch::Approx(1.0));
}

TEST_CASE("psd_cone_distance equals distance to positive part (property)") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        int d = 2 + int(rng() % 7);
        HermMatrix m = random_herm(rng, d);
        double closed = psd_cone_distance(m);
        double witness = op_norm(Matrix(positive_part(m).mat() - m.mat()));
        CHECK(std::abs(closed - witness) < 1e-10);
    }
}

TEST_CASE("random Z*Z search never beats the closed-form distance") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        HermMatrix m = random_herm(rng, 2);
        double closed = psd_cone_distance(m);
        double best = 1e300;
        for (int i = 0; i < 2000; ++i) {
            Matrix z = random_complex(rng, 2) * (0.25 * (1 + i % 8));
            best = std::min(best, op_norm(Matrix(z.adjoint() * z - m.mat())));
        }
        CHECK(best >= closed - 1e-6);
    }
}

TEST_CASE("commutator identities") {
    std::mt19937_64 rng(19);
    HermMatrix a = random_herm(rng, 3), b = random_herm(rng, 3);
    CHECK(op_norm(Matrix(commutator(a, b) + commutator(b, a))) == 0.0);
    CHECK(op_norm(commutator(a, a)) < 1e-14);
    CHECK(op_norm(commutator(HermMatrix(diag2(1, 2)), HermMatrix(diag2(5, -1)))) < 1e-15);

    Matrix px(2, 2), pz(2, 2);
    px << 0, 1, 1, 0;
    pz << 1, 0, 0, -1;
    CHECK(op_norm(commutator(HermMatrix(px), HermMatrix(pz))) == Catch::Approx(2.0));
    // skew-Hermitian for Hermitian inputs
    Matrix c = commutator(a, b);
    CHECK((c + c.adjoint()).norm() < 1e-14);
    CHECK_THROWS(commutator(a, random_herm(rng, 4)));
}

TEST_CASE("state_expect examples") {
    std::mt19937_64 rng(23);
    HermMatrix m = random_herm(rng, 4);
    State mixed = State::maximally_mixed(4);
    CHECK(state_expect(mixed, m).real() == Catch::Approx(m.mat().trace().real() / 4.0));

    Vector e1 = Vector::Zero(2);
    e1(0) = 1.0;
    State pure = State::pure(e1);
    CHECK(state_expect(pure, HermMatrix(diag2(0.7, -0.2))).real() == Catch::Approx(0.7));

    State any = random_state(rng, 3);
    CHECK(state_expect(any, HermMatrix::identity(3)).real() == Catch::Approx(1.0));
    CHECK(std::abs(state_expect(any, m = random_herm(rng, 3)).imag()) < 1e-12);
}

TEST_CASE("op_norm subadditivity and state bound (property)") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 2 + int(rng() % 5);
        HermMatrix a = random_herm(rng, d), b = random_herm(rng, d);
        CHECK(op_norm(HermMatrix(Matrix(a.mat() + b.mat()))) <=
              op_norm(a) + op_norm(b) + 1e-10);
        State phi = random_state(rng, d);
        CHECK(std::abs(state_expect(phi, a)) <= op_norm(a) + 1e-10);
    }
}

TEST_CASE("matrix text format roundtrip") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        int d = 1 + int(rng() % 5);
        Matrix m = random_complex(rng, d);
        std::ostringstream os;
        write_matrix(os, m);
        std::istringstream is(os.str());
        Matrix back = read_matrix(is);
        CHECK((back - m).cwiseAbs().maxCoeff() == 0.0); // dyadic writeout is lossless
    }
}

TEST_CASE("matrix format accepts rational and decimal components") {
    std::istringstream is("dim 2\n1/2+1/3i 0.25\n0.25 -1i\n");
    RationalMatrix m = read_rational_matrix(is);
    CHECK(m.at(0, 0).re == Rational(1, 2));
    CHECK(m.at(0, 0).im == Rational(1, 3));
    CHECK(m.at(0, 1).re == Rational(1, 4));
    CHECK(m.at(1, 1).im == Rational(-1));
    CHECK(m.is_hermitian() == false);
    std::istringstream bad("dim 2\n1 2\n3\n");
    CHECK_THROWS_AS(read_rational_matrix(bad), ParseError);
}

TEST_CASE("exact rational Rayleigh quotient") {
    RationalMatrix m(2);
    m.at(0, 0) = GRational(Rational(3, 4));
    m.at(1, 1) = GRational(Rational(1, 4));
    RationalVector v(2, GRational(Rational(1)));
    CHECK(rayleigh_quotient_exact(m, v) == Rational(1, 2));
    v[1] = GRational(Rational(0));
    CHECK(rayleigh_quotient_exact(m, v) == Rational(3, 4));
}
