// strategy.hpp — POVMs, G-measurements, strategies, the bullet product,
// correlation tables, game values, commutation defects, the phi_k functional
// and constructive near-POVM rounding

#pragma once

#include "acg/game.hpp"
#include "acg/matrix.hpp"
#include "acg/matrix_io.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace acg {

inline constexpr double kPovmTol = 1e-9;

// Length-k positive decomposition of the identity.
struct Povm {
    int dim = 0;
    std::vector<HermMatrix> effects;

    Povm() = default;
    Povm(int dim_, std::vector<HermMatrix> effects_) : dim(dim_), effects(std::move(effects_)) {
        Matrix sum = Matrix::Zero(dim, dim);
        for (const auto& e : effects) {
            if (e.dim() != dim) throw std::invalid_argument("Povm: effect dim mismatch");
            double neg = psd_cone_distance(e);
            if (neg > kPovmTol) throw NotPsdError(-neg);
            sum += e.mat();
        }
        if (op_norm(Matrix(sum - Matrix::Identity(dim, dim))) > kPovmTol)
            throw std::invalid_argument("Povm: effects do not sum to identity");
    }

    static Povm uniform(int dim, int k) {
        std::vector<HermMatrix> eff(k, HermMatrix(Matrix::Identity(dim, dim) / double(k)));
        return Povm(dim, std::move(eff));
    }

    int length() const { return static_cast<int>(effects.size()); }
};

// One POVM per question, all of length k on a common dimension.
struct MeasurementFamily {
    int n = 0, k = 0, dim = 0;
    std::vector<Povm> povms;

    MeasurementFamily() = default;
    MeasurementFamily(int n_, int k_, std::vector<Povm> povms_)
        : n(n_), k(k_), povms(std::move(povms_)) {
        if (static_cast<int>(povms.size()) != n)
            throw std::invalid_argument("MeasurementFamily: wrong POVM count");
        if (n < 1) throw std::invalid_argument("MeasurementFamily: n must be >= 1");
        dim = povms[0].dim;
        for (const auto& p : povms) {
            if (p.dim != dim) throw std::invalid_argument("MeasurementFamily: mixed dims");
            if (p.length() != k) throw std::invalid_argument("MeasurementFamily: mixed lengths");
        }
    }

    static MeasurementFamily uniform(int n, int k, int dim) {
        return MeasurementFamily(n, k, std::vector<Povm>(n, Povm::uniform(dim, k)));
    }

    // 1-based
    const HermMatrix& effect(int x, int a) const { return povms[x - 1].effects[a - 1]; }
};

struct Strategy {
    MeasurementFamily alice, bob;
    State phi;

    Strategy() = default;
    Strategy(MeasurementFamily a, MeasurementFamily b, State s)
        : alice(std::move(a)), bob(std::move(b)), phi(std::move(s)) {
        if (alice.dim != bob.dim || alice.dim != phi.dim())
            throw std::invalid_argument("Strategy: dimension mismatch");
        if (alice.n != bob.n || alice.k != bob.k)
            throw std::invalid_argument("Strategy: (n,k) mismatch between players");
    }

    int dim() const { return alice.dim; }
    int n() const { return alice.n; }
    int k() const { return alice.k; }
};

// A . B := (A^{1/2} B A^{1/2} + B^{1/2} A B^{1/2}) / 2
inline HermMatrix bullet(const HermMatrix& a, const HermMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("bullet: dimension mismatch");
    Matrix ra = sqrt_psd(a).mat(), rb = sqrt_psd(b).mat();
    return HermMatrix(0.5 * (ra * b.mat() * ra + rb * a.mat() * rb));
}

namespace detail {
// Square roots of every effect, cached once per evaluation pass.
inline std::vector<Matrix> effect_sqrts(const MeasurementFamily& f) {
    std::vector<Matrix> out;
    out.reserve(static_cast<size_t>(f.n) * f.k);
    for (const auto& p : f.povms)
        for (const auto& e : p.effects) out.push_back(sqrt_psd(e).mat());
    return out;
}
inline HermMatrix bullet_cached(const HermMatrix& a, const Matrix& ra,
                                const HermMatrix& b, const Matrix& rb) {
    return HermMatrix(0.5 * (ra * b.mat() * ra + rb * a.mat() * rb));
}
} // namespace detail

struct CorrelationTable {
    int n = 0, k = 0;
    std::vector<double> p; // (x,y,a,b), 1-based accessor

    double at(int x, int y, int a, int b) const {
        return p[((static_cast<size_t>(x - 1) * n + (y - 1)) * k + (a - 1)) * k + (b - 1)];
    }
    double& at(int x, int y, int a, int b) {
        return p[((static_cast<size_t>(x - 1) * n + (y - 1)) * k + (a - 1)) * k + (b - 1)];
    }
};

// p(a,b|x,y) = phi(A^x_a . B^y_b), clamped to >= 0 on output.
inline CorrelationTable correlation_table(const Strategy& s) {
    CorrelationTable t;
    t.n = s.n();
    t.k = s.k();
    t.p.assign(static_cast<size_t>(t.n) * t.n * t.k * t.k, 0.0);
    auto ras = detail::effect_sqrts(s.alice);
    auto rbs = detail::effect_sqrts(s.bob);
    for (int x = 1; x <= t.n; ++x)
        for (int y = 1; y <= t.n; ++y)
            for (int a = 1; a <= t.k; ++a)
                for (int b = 1; b <= t.k; ++b) {
                    HermMatrix ab = detail::bullet_cached(
                        s.alice.effect(x, a), ras[(x - 1) * t.k + (a - 1)],
                        s.bob.effect(y, b), rbs[(y - 1) * t.k + (b - 1)]);
                    double v = state_expect(s.phi, ab).real();
                    if (v < -kPovmTol)
                        throw std::runtime_error("correlation_table: probability below -1e-9");
                    t.at(x, y, a, b) = std::max(0.0, v);
                }
    return t;
}

// G(A,B) = sum_{x,y} pi(x,y) sum_{a,b} D(x,y,a,b) (A^x_a . B^y_b)
inline HermMatrix game_operator(const Game& g, const MeasurementFamily& a,
                                const MeasurementFamily& b) {
    if (a.n != g.n || b.n != g.n || a.k != g.k || b.k != g.k || a.dim != b.dim)
        throw std::invalid_argument("game_operator: shape mismatch");
    auto ras = detail::effect_sqrts(a);
    auto rbs = detail::effect_sqrts(b);
    Matrix acc = Matrix::Zero(a.dim, a.dim);
    for (int x = 1; x <= g.n; ++x)
        for (int y = 1; y <= g.n; ++y) {
            if (g.pi_at(x, y) == 0) continue;
            double w = to_double(g.pi_at(x, y));
            for (int aa = 1; aa <= g.k; ++aa)
                for (int bb = 1; bb <= g.k; ++bb)
                    if (g.d_at(x, y, aa, bb))
                        acc += w * detail::bullet_cached(
                                       a.effect(x, aa), ras[(x - 1) * g.k + (aa - 1)],
                                       b.effect(y, bb), rbs[(y - 1) * g.k + (bb - 1)]).mat();
        }
    return HermMatrix(acc);
}

// val(G, sigma) = phi(G(A,B)); cross-checked against sum pi D p_sigma.
inline double game_value(const Game& g, const Strategy& s) {
    HermMatrix op = game_operator(g, s.alice, s.bob);
    double via_operator = state_expect(s.phi, op).real();
    CorrelationTable t = correlation_table(s);
    double via_table = 0.0;
    for (int x = 1; x <= g.n; ++x)
        for (int y = 1; y <= g.n; ++y) {
            double w = to_double(g.pi_at(x, y));
            for (int a = 1; a <= g.k; ++a)
                for (int b = 1; b <= g.k; ++b)
                    if (g.d_at(x, y, a, b)) via_table += w * t.at(x, y, a, b);
        }
    if (std::abs(via_operator - via_table) > 1e-8)
        throw std::runtime_error("game_value: operator and table formulas disagree");
    if (via_operator < -1e-8 || via_operator > 1.0 + 1e-8)
        throw std::runtime_error("game_value: value outside [0,1] beyond tolerance");
    return std::clamp(via_operator, 0.0, 1.0);
}

enum class DefectMode { Sum, PerPairMax };

// Per-question-pair op- and st-defects and their maxima.
struct DefectReport {
    int n = 0;
    std::vector<double> op, st; // (x,y) 1-based via at()
    double op_max = 0.0, st_max = 0.0;

    double op_at(int x, int y) const { return op[static_cast<size_t>(x - 1) * n + (y - 1)]; }
    double st_at(int x, int y) const { return st[static_cast<size_t>(x - 1) * n + (y - 1)]; }
    bool is_delta_op(double delta) const { return op_max < delta; }
    bool is_delta_st(double delta) const { return st_max < delta; }
};

inline DefectReport defects(const Strategy& s, DefectMode mode = DefectMode::Sum) {
    DefectReport r;
    r.n = s.n();
    r.op.assign(static_cast<size_t>(r.n) * r.n, 0.0);
    r.st.assign(static_cast<size_t>(r.n) * r.n, 0.0);
    for (int x = 1; x <= r.n; ++x)
        for (int y = 1; y <= r.n; ++y) {
            double op_acc = 0.0, st_acc = 0.0;
            for (int a = 1; a <= s.k(); ++a)
                for (int b = 1; b <= s.k(); ++b) {
                    Matrix c = commutator(s.alice.effect(x, a), s.bob.effect(y, b));
                    double nrm = op_norm(c);
                    double stv = std::abs(state_expect(s.phi, c));
                    if (mode == DefectMode::Sum) {
                        op_acc += nrm;
                        st_acc += stv;
                    } else {
                        op_acc = std::max(op_acc, nrm);
                        st_acc = std::max(st_acc, stv);
                    }
                }
            r.op[(x - 1) * r.n + (y - 1)] = op_acc;
            r.st[(x - 1) * r.n + (y - 1)] = st_acc;
        }
    r.op_max = *std::max_element(r.op.begin(), r.op.end());
    r.st_max = *std::max_element(r.st.begin(), r.st.end());
    return r;
}

// max( max_i dist(X_i, PSD cone), ||sum X_i - I|| )
inline double phi_k_eval(const std::vector<HermMatrix>& xs) {
    if (xs.empty()) throw std::invalid_argument("phi_k_eval: empty sequence");
    int d = xs[0].dim();
    double worst = 0.0;
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& x : xs) {
        if (x.dim() != d) throw std::invalid_argument("phi_k_eval: dim mismatch");
        worst = std::max(worst, psd_cone_distance(x));
        sum += x.mat();
    }
    return std::max(worst, op_norm(Matrix(sum - Matrix::Identity(d, d))));
}

struct RoundResult {
    Povm povm;
    double distance = 0.0; // max_i ||B_i - X_i||
    double phi_k = 0.0;
};

// Constructive rounding behind the existential Lemma: positive parts, then an
// eps-ridge conjugation that restores exact completeness.
inline RoundResult round_to_povm(const std::vector<HermMatrix>& xs) {
    int d = xs[0].dim();
    int k = static_cast<int>(xs.size());
    RoundResult out;
    out.phi_k = phi_k_eval(xs);
    double eps = out.phi_k + 1e-12;
    std::vector<HermMatrix> pos;
    pos.reserve(xs.size());
    Matrix ssum = eps * Matrix::Identity(d, d);
    for (const auto& x : xs) {
        pos.push_back(positive_part(x));
        ssum += pos.back().mat();
    }
    SpectralDecomp sd = eig_herm(HermMatrix(ssum));
    Eigen::VectorXd inv = sd.eigenvalues.cwiseInverse().cwiseSqrt();
    Matrix t = sd.eigenvectors * inv.asDiagonal() * sd.eigenvectors.adjoint();
    std::vector<HermMatrix> eff;
    eff.reserve(xs.size());
    for (int i = 0; i < k; ++i) {
        Matrix bi = t * (pos[i].mat() + (eps / k) * Matrix::Identity(d, d)) * t;
        eff.push_back(HermMatrix(bi));
        out.distance = std::max(out.distance, op_norm(Matrix(bi - xs[i].mat())));
    }
    out.povm = Povm(d, std::move(eff));
    return out;
}

// Local measurements become A (x) I and I (x) B; the factors commute exactly.
inline Strategy tensor_commuting_strategy(const MeasurementFamily& alice_local,
                                          const MeasurementFamily& bob_local,
                                          const State& state) {
    if (alice_local.n != bob_local.n || alice_local.k != bob_local.k)
        throw std::invalid_argument("tensor_commuting_strategy: (n,k) mismatch");
    int da = alice_local.dim, db = bob_local.dim;
    if (state.dim() != da * db)
        throw std::invalid_argument("tensor_commuting_strategy: state dim != d_A*d_B");
    Matrix ia = Matrix::Identity(da, da), ib = Matrix::Identity(db, db);
    std::vector<Povm> ap, bp;
    for (const auto& p : alice_local.povms) {
        std::vector<HermMatrix> eff;
        for (const auto& e : p.effects)
            eff.push_back(HermMatrix(Eigen::kroneckerProduct(e.mat(), ib).eval()));
        ap.emplace_back(da * db, std::move(eff));
    }
    for (const auto& p : bob_local.povms) {
        std::vector<HermMatrix> eff;
        for (const auto& e : p.effects)
            eff.push_back(HermMatrix(Eigen::kroneckerProduct(ia, e.mat()).eval()));
        bp.emplace_back(da * db, std::move(eff));
    }
    return Strategy(MeasurementFamily(alice_local.n, alice_local.k, std::move(ap)),
                    MeasurementFamily(bob_local.n, bob_local.k, std::move(bp)), state);
}

// ---- strategy file format ------------------------------------------------

inline std::string serialize_strategy(const Strategy& s) {
    std::ostringstream os;
    os << "strategy dim " << s.dim() << " n " << s.n() << " k " << s.k() << "\n";
    for (int x = 1; x <= s.n(); ++x)
        for (int a = 1; a <= s.k(); ++a) {
            os << "A " << x << " " << a << "\n";
            write_matrix(os, s.alice.effect(x, a).mat());
        }
    for (int y = 1; y <= s.n(); ++y)
        for (int b = 1; b <= s.k(); ++b) {
            os << "B " << y << " " << b << "\n";
            write_matrix(os, s.bob.effect(y, b).mat());
        }
    os << "rho\n";
    write_matrix(os, s.phi.rho());
    return os.str();
}

inline Strategy parse_strategy(const std::string& text) {
    std::istringstream is(text);
    std::string key;
    if (!(is >> key) || key != "strategy") throw ParseError("strategy file must start with 'strategy'");
    int d = 0, n = 0, k = 0;
    std::string kd, kn, kk;
    if (!(is >> kd >> d >> kn >> n >> kk >> k) || kd != "dim" || kn != "n" || kk != "k")
        throw ParseError("malformed strategy header");
    std::map<std::pair<int, int>, HermMatrix> amats, bmats;
    Matrix rho;
    bool have_rho = false;
    while (is >> key) {
        if (key == "A" || key == "B") {
            int x = 0, a = 0;
            if (!(is >> x >> a)) throw ParseError("malformed measurement block header");
            if (x < 1 || x > n || a < 1 || a > k) throw ParseError("measurement index out of range");
            Matrix m = read_matrix(is);
            if (m.rows() != d) throw ParseError("measurement matrix has wrong dim");
            (key == "A" ? amats : bmats).insert_or_assign({x, a}, HermMatrix(m));
        } else if (key == "rho") {
            rho = read_matrix(is);
            if (rho.rows() != d) throw ParseError("rho has wrong dim");
            have_rho = true;
        } else {
            throw ParseError("unknown strategy block '" + key + "'");
        }
    }
    if (!have_rho) throw ParseError("strategy file missing rho block");
    auto build = [&](const std::map<std::pair<int, int>, HermMatrix>& mats, const char* who) {
        std::vector<Povm> povms;
        for (int x = 1; x <= n; ++x) {
            std::vector<HermMatrix> eff;
            for (int a = 1; a <= k; ++a) {
                auto it = mats.find({x, a});
                if (it == mats.end())
                    throw ParseError(std::string("missing ") + who + " effect (" +
                                     std::to_string(x) + "," + std::to_string(a) + ")");
                eff.push_back(it->second);
            }
            povms.emplace_back(d, std::move(eff));
        }
        return MeasurementFamily(n, k, std::move(povms));
    };
    return Strategy(build(amats, "A"), build(bmats, "B"), State(rho));
}

} // namespace acg
