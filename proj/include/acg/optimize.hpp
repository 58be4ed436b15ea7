// optimize.hpp — value estimation: exact classical value, optimal states,
// see-saw over commuting tensor strategies, and penalty-based search for
// delta-constrained almost-commuting strategies.  Gradients flow through the
// POVM parametrization and matrix square roots via eigendecomposition
// differentials.

#pragma once

#include "acg/game.hpp"
#include "acg/matrix.hpp"
#include "acg/strategy.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <future>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace acg {

enum class SearchMode { Op, St, Unconstrained };

struct OptimizerConfig {
    uint64_t seed = 0;
    int restarts = 8;
    int max_iters = 400;
    double step_size = 0.25;       // base step; halved on objective decrease
    double penalty_weight = 1e4;   // lambda_pen at the final continuation round
    int dim = 4;                   // single-space search dimension
    int dim_a = 2, dim_b = 2;      // see-saw tensor factor dimensions
    Rational delta = Rational(1);  // the delta of the constrained values
    SearchMode mode = SearchMode::Unconstrained;
    double tol_conv = 1e-9;

    void check() const {
        if (restarts < 1) throw std::invalid_argument("OptimizerConfig: restarts >= 1");
        if (delta < 0) throw std::invalid_argument("OptimizerConfig: delta >= 0");
        if (step_size <= 0) throw std::invalid_argument("OptimizerConfig: step sizes positive");
    }
};

struct BoundReport {
    double value = 0.0;
    Strategy best;
    DefectReport defect;
    std::vector<double> trace;   // objective after each accepted sweep/iteration
    bool feasible = false;
    bool converged = true;
    int restarts_used = 0;
    long iterations = 0;
};

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- exact classical value ----------------------------------------------

// Max over deterministic answer functions, in exact rational arithmetic.
inline Rational classical_value(const Game& g) {
    double pairs = std::pow(double(g.k), 2.0 * g.n);
    if (pairs > 1e7) throw BudgetExceeded("classical_value: k^(2n) exceeds 10^7");
    long per_player = 1;
    for (int i = 0; i < g.n; ++i) per_player *= g.k;
    std::vector<int> f(g.n), h(g.n);
    Rational best = 0;
    for (long fi = 0; fi < per_player; ++fi) {
        long t = fi;
        for (int i = 0; i < g.n; ++i) { f[i] = int(t % g.k) + 1; t /= g.k; }
        for (long hi = 0; hi < per_player; ++hi) {
            t = hi;
            for (int i = 0; i < g.n; ++i) { h[i] = int(t % g.k) + 1; t /= g.k; }
            Rational v = 0;
            for (int x = 1; x <= g.n; ++x)
                for (int y = 1; y <= g.n; ++y)
                    if (g.d_at(x, y, f[x - 1], h[y - 1])) v += g.pi_at(x, y);
            if (v > best) best = v;
        }
    }
    return best;
}

// ---- optimal state -------------------------------------------------------

// Top-eigenvector pure state of G(A,B); its value is lambda_max.
inline std::pair<State, double> optimal_state(const Game& g, const MeasurementFamily& a,
                                              const MeasurementFamily& b) {
    SpectralDecomp sd = eig_herm(game_operator(g, a, b));
    return {State::pure(sd.eigenvectors.col(0)), sd.eigenvalues(0)};
}

// ---- parametrization and analytic gradients -----------------------------

namespace opt_detail {

inline constexpr double kRidge = 1e-8;     // POVM parametrization ridge
inline constexpr double kDegenFloor = 1e-12;

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
inline double gauss(std::mt19937_64& rng) {
    double u1 = uniform01(rng), u2 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline Matrix herm_part(const Matrix& m) { return 0.5 * (m + m.adjoint().eval()); }

// Daleckii-Krein divided-difference map for a spectral function f; the map is
// self-adjoint in the Frobenius inner product, so it is its own adjoint in
// backpropagation.  Near-equal eigenvalues use f' at the midpoint.
inline Matrix dk_map(const SpectralDecomp& sd, const std::function<double(double)>& f,
                     const std::function<double(double)>& fp, const Matrix& x) {
    const int d = static_cast<int>(sd.eigenvalues.size());
    Matrix xt = sd.eigenvectors.adjoint() * x * sd.eigenvectors;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double li = sd.eigenvalues(i), lj = sd.eigenvalues(j);
            double c = (std::abs(li - lj) < kDegenFloor) ? fp(0.5 * (li + lj))
                                                         : (f(li) - f(lj)) / (li - lj);
            xt(i, j) *= c;
        }
    return sd.eigenvectors * xt * sd.eigenvectors.adjoint();
}

// Raw parameters: one complex matrix per (question, answer), plus a state seed.
struct StrategyParams {
    int n = 0, k = 0, d = 0;
    std::vector<Matrix> alice, bob; // n*k each
    Matrix state_v;

    static StrategyParams random(int n, int k, int d, std::mt19937_64& rng) {
        StrategyParams p;
        p.n = n; p.k = k; p.d = d;
        auto rnd = [&] {
            Matrix m(d, d);
            double s = 1.0 / std::sqrt(double(d));
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) m(i, j) = Complex(gauss(rng) * s, gauss(rng) * s);
            return m;
        };
        for (int i = 0; i < n * k; ++i) p.alice.push_back(rnd());
        for (int i = 0; i < n * k; ++i) p.bob.push_back(rnd());
        p.state_v = rnd();
        return p;
    }

    long coord_count() const { return (2L * n * k + 1) * d * d * 2; }

    // Linear coordinates: alice matrices, bob matrices, state seed; each matrix
    // row-major with (re, im) per entry.
    double get_coord(long idx) const { return *locate(const_cast<StrategyParams&>(*this), idx).first; }
    void add_coord(long idx, double v) {
        auto [ptr, is_im] = locate(*this, idx);
        *ptr += v;
        (void)is_im;
    }

private:
    static std::pair<double*, bool> locate(StrategyParams& p, long idx) {
        long per_matrix = 2L * p.d * p.d;
        long nm = static_cast<long>(p.alice.size());
        Matrix* m;
        if (idx < nm * per_matrix) m = &p.alice[idx / per_matrix];
        else if (idx < 2 * nm * per_matrix) m = &p.bob[idx / per_matrix - nm];
        else m = &p.state_v;
        long off = idx % per_matrix;
        int row = int(off / (2 * p.d)), col = int((off / 2) % p.d);
        bool im = off % 2;
        auto* z = reinterpret_cast<double*>(&(*m)(row, col));
        return {z + (im ? 1 : 0), im};
    }
};

struct QuestionForward {
    SpectralDecomp s_decomp;           // of S = sum raw*raw + eps I
    Matrix t;                          // S^{-1/2}
    std::vector<Matrix> p;             // raw*raw + (eps/k) I
    std::vector<HermMatrix> effects;
    std::vector<SpectralDecomp> eff_decomp;
    std::vector<Matrix> eff_sqrt;
};

inline QuestionForward forward_question(const std::vector<Matrix>& raws, int first, int k) {
    QuestionForward q;
    const int d = static_cast<int>(raws[first].rows());
    Matrix s = kRidge * Matrix::Identity(d, d);
    for (int a = 0; a < k; ++a) {
        q.p.push_back(raws[first + a].adjoint() * raws[first + a] +
                      (kRidge / k) * Matrix::Identity(d, d));
        s += raws[first + a].adjoint() * raws[first + a];
    }
    q.s_decomp = eig_herm(HermMatrix(s));
    Eigen::VectorXd inv = q.s_decomp.eigenvalues.cwiseInverse().cwiseSqrt();
    q.t = q.s_decomp.eigenvectors * inv.asDiagonal() * q.s_decomp.eigenvectors.adjoint();
    for (int a = 0; a < k; ++a) {
        q.effects.emplace_back(Matrix(q.t * q.p[a] * q.t));
        q.eff_decomp.push_back(eig_herm(q.effects.back()));
        Eigen::VectorXd lam = q.eff_decomp.back().eigenvalues.cwiseMax(0.0).cwiseSqrt();
        q.eff_sqrt.push_back(q.eff_decomp.back().eigenvectors * lam.asDiagonal() *
                             q.eff_decomp.back().eigenvectors.adjoint());
    }
    return q;
}

// Backpropagates Hermitian effect cotangents through one question's POVM
// parametrization; writes complex gradient matrices (real part = d/dRe,
// imaginary part = d/dIm).
inline void backprop_question(const QuestionForward& q, const std::vector<Matrix>& raws,
                              int first, int k, const std::vector<Matrix>& cotangents,
                              std::vector<Matrix>& grad_out) {
    auto inv_sqrt = [](double x) { return 1.0 / std::sqrt(x); };
    auto inv_sqrt_d = [](double x) { return -0.5 / (x * std::sqrt(x)); };
    Matrix wt = Matrix::Zero(q.t.rows(), q.t.cols());
    std::vector<Matrix> k_direct(k);
    for (int a = 0; a < k; ++a) {
        const Matrix& g = cotangents[a];
        k_direct[a] = q.t * g * q.t;
        wt += q.p[a] * q.t * g + g * q.t * q.p[a];
    }
    Matrix h = dk_map(q.s_decomp, inv_sqrt, inv_sqrt_d, herm_part(wt));
    for (int a = 0; a < k; ++a) {
        Matrix kk = herm_part(k_direct[a] + h);
        grad_out[first + a] += 2.0 * (raws[first + a] * kk);
    }
}

struct StrategyForward {
    std::vector<QuestionForward> alice, bob;
    Matrix rho;
    double state_norm = 0.0;
};

inline StrategyForward forward_strategy(const StrategyParams& p) {
    StrategyForward f;
    for (int x = 0; x < p.n; ++x) {
        f.alice.push_back(forward_question(p.alice, x * p.k, p.k));
        f.bob.push_back(forward_question(p.bob, x * p.k, p.k));
    }
    Matrix vv = p.state_v.adjoint() * p.state_v;
    f.state_norm = vv.trace().real();
    if (f.state_norm < 1e-300) {
        f.state_norm = 1e-300; // degenerate seed; rho collapses toward zero matrix
        vv += 1e-300 * Matrix::Identity(p.d, p.d);
    }
    f.rho = vv / f.state_norm;
    return f;
}

inline Strategy materialize(const StrategyParams& p, const StrategyForward& f) {
    std::vector<Povm> ap, bp;
    for (int x = 0; x < p.n; ++x) {
        ap.emplace_back(p.d, f.alice[x].effects);
        bp.emplace_back(p.d, f.bob[x].effects);
    }
    return Strategy(MeasurementFamily(p.n, p.k, std::move(ap)),
                    MeasurementFamily(p.n, p.k, std::move(bp)), State(f.rho));
}

struct SingularTriple {
    double sigma = 0.0;
    Vector u, v;
};

// Converged power iteration on C*C; at convergence the u v* differential of
// the top singular value is exact (away from degeneracies).
inline SingularTriple top_singular(const Matrix& c) {
    const int d = static_cast<int>(c.rows());
    SingularTriple out;
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = 1.0 + 0.013 * i;
    v.normalize();
    for (int it = 0; it < 400; ++it) {
        Vector w = c.adjoint() * (c * v);
        double nn = w.norm();
        if (nn < 1e-28) {
            out.sigma = 0.0;
            out.u = Vector::Zero(d);
            out.v = v;
            return out;
        }
        Vector vn = w / nn;
        double drift = (vn - v).norm();
        v = vn;
        if (drift < 1e-13) break;
    }
    Vector cv = c * v;
    out.sigma = cv.norm();
    out.v = v;
    out.u = (out.sigma > 1e-28) ? Vector(cv / out.sigma) : Vector(Vector::Zero(d));
    return out;
}

struct Objective {
    double value = 0.0;
    double defect_max = 0.0;   // in the active mode (0 for Unconstrained)
    double penalty = 0.0;
    double objective = 0.0;
};

// Penalized objective and (optionally) its analytic gradient.
inline Objective eval_objective(const Game& g, const StrategyParams& p, SearchMode mode,
                                double threshold, double lambda_pen, StrategyParams* grad) {
    StrategyForward f = forward_strategy(p);
    const int d = p.d, n = p.n, k = p.k;
    Objective out;

    // value = tr(rho G) with G assembled from cached bullet products
    Matrix gop = Matrix::Zero(d, d);
    for (int x = 1; x <= n; ++x)
        for (int y = 1; y <= n; ++y) {
            if (g.pi_at(x, y) == 0) continue;
            double w = to_double(g.pi_at(x, y));
            for (int a = 1; a <= k; ++a)
                for (int b = 1; b <= k; ++b) {
                    if (!g.d_at(x, y, a, b)) continue;
                    const Matrix& am = f.alice[x - 1].effects[a - 1].mat();
                    const Matrix& bm = f.bob[y - 1].effects[b - 1].mat();
                    const Matrix& ra = f.alice[x - 1].eff_sqrt[a - 1];
                    const Matrix& rb = f.bob[y - 1].eff_sqrt[b - 1];
                    gop += (0.5 * w) * (ra * bm * ra + rb * am * rb);
                }
        }
    gop = herm_part(gop);
    out.value = (f.rho * gop).trace().real();

    // defect in the active mode; the penalty sums over every question pair
    // above threshold, which keeps the objective smooth across argmax ties
    std::vector<double> pair_defect(n * n, 0.0);
    std::vector<std::vector<Eigen::JacobiSVD<Matrix>>> svds(n * n);
    std::vector<std::vector<Complex>> stv(n * n);
    if (mode != SearchMode::Unconstrained) {
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                double acc = 0.0;
                for (int a = 0; a < k; ++a)
                    for (int b = 0; b < k; ++b) {
                        Matrix c = f.alice[x].effects[a].mat() * f.bob[y].effects[b].mat() -
                                   f.bob[y].effects[b].mat() * f.alice[x].effects[a].mat();
                        if (mode == SearchMode::Op) {
                            svds[x * n + y].emplace_back(c, Eigen::ComputeThinU |
                                                                 Eigen::ComputeThinV);
                            acc += svds[x * n + y].back().singularValues()(0);
                        } else {
                            Complex z = (f.rho * c).trace();
                            acc += std::abs(z);
                            stv[x * n + y].push_back(z);
                        }
                    }
                pair_defect[x * n + y] = acc;
                out.defect_max = std::max(out.defect_max, acc);
                if (acc > threshold)
                    out.penalty += lambda_pen * (acc - threshold) * (acc - threshold);
            }
    }
    out.objective = out.value - out.penalty;
    if (!grad) return out;

    // ---- backward pass ----
    grad->n = n; grad->k = k; grad->d = d;
    grad->alice.assign(n * k, Matrix::Zero(d, d));
    grad->bob.assign(n * k, Matrix::Zero(d, d));
    grad->state_v = Matrix::Zero(d, d);

    std::vector<Matrix> cot_a(n * k, Matrix::Zero(d, d)), cot_b(n * k, Matrix::Zero(d, d));
    Matrix cot_rho = gop; // value part

    auto sqrt_f = [](double x) { return std::sqrt(std::max(0.0, x)); };
    auto sqrt_fp = [](double x) { return 0.5 / std::sqrt(std::max(1e-18, x)); };

    for (int x = 1; x <= n; ++x)
        for (int y = 1; y <= n; ++y) {
            if (g.pi_at(x, y) == 0) continue;
            double w = to_double(g.pi_at(x, y));
            for (int a = 1; a <= k; ++a)
                for (int b = 1; b <= k; ++b) {
                    if (!g.d_at(x, y, a, b)) continue;
                    const Matrix& am = f.alice[x - 1].effects[a - 1].mat();
                    const Matrix& bm = f.bob[y - 1].effects[b - 1].mat();
                    const Matrix& ra = f.alice[x - 1].eff_sqrt[a - 1];
                    const Matrix& rb = f.bob[y - 1].eff_sqrt[b - 1];
                    Matrix c = (0.5 * w) * f.rho; // cotangent into the bullet
                    // through sqrt(A): W = B ra C + C ra B
                    Matrix wa = bm * ra * c + c * ra * bm;
                    cot_a[(x - 1) * k + (a - 1)] +=
                        rb * c * rb + dk_map(f.alice[x - 1].eff_decomp[a - 1], sqrt_f, sqrt_fp,
                                             herm_part(wa));
                    Matrix wb = am * rb * c + c * rb * am;
                    cot_b[(y - 1) * k + (b - 1)] +=
                        ra * c * ra + dk_map(f.bob[y - 1].eff_decomp[b - 1], sqrt_f, sqrt_fp,
                                             herm_part(wb));
                }
        }

    if (mode != SearchMode::Unconstrained) {
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                double excess = pair_defect[x * n + y] - threshold;
                if (excess <= 0.0) continue;
                double coeff = -2.0 * lambda_pen * excess; // d objective / d pair defect
                int idx = 0;
                for (int a = 0; a < k; ++a)
                    for (int b = 0; b < k; ++b, ++idx) {
                        const Matrix& am = f.alice[x].effects[a].mat();
                        const Matrix& bm = f.bob[y].effects[b].mat();
                        Matrix m;
                        if (mode == SearchMode::Op) {
                            const auto& svd = svds[x * n + y][idx];
                            if (svd.singularValues()(0) < 1e-14) continue;
                            m = svd.matrixV().col(0) * svd.matrixU().col(0).adjoint();
                        } else {
                            Complex z = stv[x * n + y][idx];
                            double az = std::abs(z);
                            if (az < 1e-14) continue;
                            Complex s = std::conj(z) / az;
                            m = s * f.rho;
                            Matrix c = am * bm - bm * am;
                            cot_rho += coeff * herm_part(s * c);
                        }
                        cot_a[x * k + a] += coeff * herm_part(bm * m - m * bm);
                        cot_b[y * k + b] += coeff * herm_part(m * am - am * m);
                    }
            }
    }

    for (int x = 0; x < n; ++x) {
        backprop_question(f.alice[x], p.alice, x * k, k, {cot_a.begin() + x * k, cot_a.begin() + (x + 1) * k}, grad->alice);
        backprop_question(f.bob[x], p.bob, x * k, k, {cot_b.begin() + x * k, cot_b.begin() + (x + 1) * k}, grad->bob);
    }
    Matrix kk = (herm_part(cot_rho) -
                 (f.rho * herm_part(cot_rho)).trace().real() * Matrix::Identity(d, d)) /
                f.state_norm;
    grad->state_v = 2.0 * (p.state_v * kk);
    return out;
}

// Gradient matrices carry d/dRe in the real part and d/dIm in the imaginary
// part, so the ascent update is plain complex addition.
inline void axpy(StrategyParams& p, double step, const StrategyParams& g) {
    for (size_t i = 0; i < p.alice.size(); ++i) {
        p.alice[i] += step * g.alice[i];
        p.bob[i] += step * g.bob[i];
    }
    p.state_v += step * g.state_v;
}

inline int worker_count() {
    const char* env = std::getenv("ACG_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    return v <= 0 ? 1 : v;
}

} // namespace opt_detail

// ---- delta-constrained search -------------------------------------------

// Quadratic penalty with a 5% margin; feasibility is re-validated strictly on
// the exact reconstructed strategy, independent of the optimizer.
inline BoundReport optimize_delta(const Game& g, const OptimizerConfig& cfg) {
    using namespace opt_detail;
    cfg.check();
    if (cfg.dim < 2) throw std::invalid_argument("optimize_delta: dim >= 2 required");

    const double delta = to_double(cfg.delta);
    const double threshold =
        (cfg.mode == SearchMode::Unconstrained) ? 0.0 : delta * 0.95; // 5% margin

    struct RestartResult {
        double value = -1.0;
        bool feasible = false;
        bool converged = true;
        long iterations = 0;
        std::optional<Strategy> strat;
        std::vector<double> trace;
    };

    auto run_restart = [&](int r) {
        std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 0x51ed2701 + r);
        StrategyParams p = StrategyParams::random(g.n, g.k, cfg.dim, rng);
        RestartResult res;
        std::vector<double> lambdas;
        if (cfg.mode == SearchMode::Unconstrained) lambdas = {0.0};
        else lambdas = {cfg.penalty_weight / 100, cfg.penalty_weight / 10, cfg.penalty_weight};
        for (double lam : lambdas) {
            double step = cfg.step_size;
            StrategyParams grad;
            Objective cur = eval_objective(g, p, cfg.mode, threshold, lam, &grad);
            int small_gains = 0;
            for (int it = 0; it < cfg.max_iters; ++it) {
                ++res.iterations;
                StrategyParams trial = p;
                axpy(trial, step, grad);
                Objective next = eval_objective(g, trial, cfg.mode, threshold, lam, nullptr);
                if (next.objective > cur.objective) {
                    double gain = next.objective - cur.objective;
                    p = std::move(trial);
                    cur = eval_objective(g, p, cfg.mode, threshold, lam, &grad);
                    res.trace.push_back(cur.objective);
                    step = std::min(step * 1.3, 4.0 * cfg.step_size);
                    small_gains = (gain < cfg.tol_conv) ? small_gains + 1 : 0;
                } else {
                    step *= 0.5;
                    if (step < 1e-14) break;
                    small_gains++;
                }
                if (small_gains >= 25) break;
            }
            if (res.iterations >= long(cfg.max_iters) * long(lambdas.size())) res.converged = false;
        }
        // strict re-validation on the exact reconstructed strategy
        StrategyForward f = forward_strategy(p);
        Strategy s = materialize(p, f);
        DefectReport dr = defects(s);
        res.strat = s;
        res.value = game_value(g, s);
        double relevant = (cfg.mode == SearchMode::St) ? dr.st_max : dr.op_max;
        res.feasible = (cfg.mode == SearchMode::Unconstrained) || (relevant < delta);
        return res;
    };

    std::vector<RestartResult> results(cfg.restarts);
    int workers = std::min(worker_count(), cfg.restarts);
    if (workers <= 1) {
        for (int r = 0; r < cfg.restarts; ++r) results[r] = run_restart(r);
    } else {
        std::vector<std::future<RestartResult>> futs;
        for (int r = 0; r < cfg.restarts; ++r)
            futs.push_back(std::async(std::launch::async, run_restart, r));
        for (int r = 0; r < cfg.restarts; ++r) results[r] = futs[r].get();
    }

    BoundReport rep;
    rep.restarts_used = cfg.restarts;
    int best = -1;
    bool any_feasible = false;
    for (int r = 0; r < cfg.restarts; ++r) {
        rep.iterations += results[r].iterations;
        bool better;
        if (best < 0) better = true;
        else if (results[r].feasible != results[best].feasible) better = results[r].feasible;
        else better = results[r].value > results[best].value; // ties keep lower index
        if (better) best = r;
        any_feasible = any_feasible || results[r].feasible;
    }
    rep.best = *results[best].strat;
    rep.value = results[best].value;
    rep.defect = defects(rep.best);
    rep.trace = results[best].trace;
    rep.feasible = results[best].feasible;
    rep.converged = results[best].converged;
    return rep;
}

// ---- see-saw over commuting tensor strategies ---------------------------

namespace opt_detail {

inline Matrix partial_trace_b(const Matrix& rho, const Matrix& b, int da, int db) {
    Matrix e = Matrix::Zero(da, da);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j) {
            Complex acc = 0;
            for (int kk = 0; kk < db; ++kk)
                for (int l = 0; l < db; ++l) acc += rho(i * db + kk, j * db + l) * b(l, kk);
            e(i, j) = acc;
        }
    return e;
}

inline Matrix partial_trace_a(const Matrix& rho, const Matrix& a, int da, int db) {
    Matrix e = Matrix::Zero(db, db);
    for (int kk = 0; kk < db; ++kk)
        for (int l = 0; l < db; ++l) {
            Complex acc = 0;
            for (int i = 0; i < da; ++i)
                for (int j = 0; j < da; ++j) acc += rho(i * db + kk, j * db + l) * a(j, i);
            e(kk, l) = acc;
        }
    return e;
}

// For commuting tensor strategies the bullet is the plain product, so the
// game operator is a weighted sum of Kronecker products.
inline HermMatrix tensor_game_operator(const Game& g, const MeasurementFamily& af,
                                       const MeasurementFamily& bf) {
    int d = af.dim * bf.dim;
    Matrix acc = Matrix::Zero(d, d);
    for (int x = 1; x <= g.n; ++x)
        for (int y = 1; y <= g.n; ++y) {
            if (g.pi_at(x, y) == 0) continue;
            double w = to_double(g.pi_at(x, y));
            for (int a = 1; a <= g.k; ++a)
                for (int b = 1; b <= g.k; ++b)
                    if (g.d_at(x, y, a, b))
                        acc += w * Eigen::kroneckerProduct(af.effect(x, a).mat(),
                                                           bf.effect(y, b).mat()).eval();
        }
    return HermMatrix(acc);
}

// Linear objective sum_x sum_a tr(E^x_a A^x_a) maximized over one player's
// parametrized POVMs by backtracking gradient ascent.
inline double ascend_local(std::vector<Matrix>& raws, const std::vector<Matrix>& targets,
                           int n, int k, int iters, double base_step) {
    auto value_of = [&](const std::vector<Matrix>& r) {
        double v = 0.0;
        for (int x = 0; x < n; ++x) {
            QuestionForward q = forward_question(r, x * k, k);
            for (int a = 0; a < k; ++a)
                v += (targets[x * k + a] * q.effects[a].mat()).trace().real();
        }
        return v;
    };
    double cur = value_of(raws);
    double step = base_step;
    for (int it = 0; it < iters; ++it) {
        std::vector<Matrix> grad(raws.size(), Matrix::Zero(raws[0].rows(), raws[0].cols()));
        for (int x = 0; x < n; ++x) {
            QuestionForward q = forward_question(raws, x * k, k);
            std::vector<Matrix> cots(targets.begin() + x * k, targets.begin() + (x + 1) * k);
            backprop_question(q, raws, x * k, k, cots, grad);
        }
        std::vector<Matrix> trial = raws;
        for (size_t i = 0; i < trial.size(); ++i)
            trial[i] += step * grad[i].real().cast<Complex>() +
                        Complex(0, step) * grad[i].imag().cast<Complex>();
        double nv = value_of(trial);
        if (nv > cur) {
            raws = std::move(trial);
            cur = nv;
            step = std::min(step * 1.3, 4.0 * base_step);
        } else {
            step *= 0.5;
            if (step < 1e-13) break;
        }
    }
    return cur;
}

} // namespace opt_detail

// Alternating maximization: exact state step, gradient-ascent player steps.
// The per-sweep value is non-decreasing by construction.
inline BoundReport seesaw_commuting(const Game& g, const OptimizerConfig& cfg) {
    using namespace opt_detail;
    cfg.check();
    if (cfg.dim_a < 1 || cfg.dim_b < 1)
        throw std::invalid_argument("seesaw_commuting: dims >= 1 required");
    const int da = cfg.dim_a, db = cfg.dim_b, n = g.n, k = g.k;

    struct RestartResult {
        double value = -1.0;
        std::optional<Strategy> strat;
        std::vector<double> trace;
        bool converged = true;
        long iterations = 0;
    };

    auto build_family = [&](const std::vector<Matrix>& raws, int d) {
        std::vector<Povm> povms;
        for (int x = 0; x < n; ++x) {
            QuestionForward q = forward_question(raws, x * k, k);
            povms.emplace_back(d, q.effects);
        }
        return MeasurementFamily(n, k, std::move(povms));
    };

    auto run_restart = [&](int r) {
        std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 0x7b1c9d03 + r);
        auto rnd = [&](int d) {
            Matrix m(d, d);
            double s = 1.0 / std::sqrt(double(d));
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) m(i, j) = Complex(gauss(rng) * s, gauss(rng) * s);
            return m;
        };
        std::vector<Matrix> araw, braw;
        for (int i = 0; i < n * k; ++i) araw.push_back(rnd(da));
        for (int i = 0; i < n * k; ++i) braw.push_back(rnd(db));

        RestartResult res;
        double last = -1.0;
        Matrix rho;
        for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
            ++res.iterations;
            MeasurementFamily af = build_family(araw, da), bf = build_family(braw, db);
            SpectralDecomp sd = eig_herm(tensor_game_operator(g, af, bf));
            double lmax = sd.eigenvalues(0);
            rho = State::pure(sd.eigenvectors.col(0)).rho();
            res.trace.push_back(lmax);
            if (lmax < last - 1e-9)
                throw std::runtime_error("seesaw_commuting: value decreased across sweeps");
            if (lmax - last < cfg.tol_conv && sweep > 2) { last = lmax; break; }
            last = lmax;

            // Alice step: targets E^x_a from rho and Bob
            std::vector<Matrix> ta(n * k, Matrix::Zero(da, da));
            for (int x = 1; x <= n; ++x)
                for (int a = 1; a <= k; ++a) {
                    Matrix e = Matrix::Zero(da, da);
                    for (int y = 1; y <= n; ++y) {
                        if (g.pi_at(x, y) == 0) continue;
                        double w = to_double(g.pi_at(x, y));
                        for (int b = 1; b <= k; ++b)
                            if (g.d_at(x, y, a, b))
                                e += w * partial_trace_b(rho, bf.effect(y, b).mat(), da, db);
                    }
                    ta[(x - 1) * k + (a - 1)] = herm_part(e);
                }
            ascend_local(araw, ta, n, k, 40, cfg.step_size);

            // Bob step
            af = build_family(araw, da);
            std::vector<Matrix> tb(n * k, Matrix::Zero(db, db));
            for (int y = 1; y <= n; ++y)
                for (int b = 1; b <= k; ++b) {
                    Matrix e = Matrix::Zero(db, db);
                    for (int x = 1; x <= n; ++x) {
                        if (g.pi_at(x, y) == 0) continue;
                        double w = to_double(g.pi_at(x, y));
                        for (int a = 1; a <= k; ++a)
                            if (g.d_at(x, y, a, b))
                                e += w * partial_trace_a(rho, af.effect(x, a).mat(), da, db);
                    }
                    tb[(y - 1) * k + (b - 1)] = herm_part(e);
                }
            ascend_local(braw, tb, n, k, 40, cfg.step_size);
        }
        MeasurementFamily af = build_family(araw, da), bf = build_family(braw, db);
        SpectralDecomp sd = eig_herm(tensor_game_operator(g, af, bf));
        Strategy s = tensor_commuting_strategy(af, bf, State::pure(sd.eigenvectors.col(0)));
        res.strat = s;
        res.value = game_value(g, s);
        res.converged = res.iterations < cfg.max_iters;
        return res;
    };

    std::vector<RestartResult> results(cfg.restarts);
    int workers = std::min(worker_count(), cfg.restarts);
    if (workers <= 1) {
        for (int r = 0; r < cfg.restarts; ++r) results[r] = run_restart(r);
    } else {
        std::vector<std::future<RestartResult>> futs;
        for (int r = 0; r < cfg.restarts; ++r)
            futs.push_back(std::async(std::launch::async, run_restart, r));
        for (int r = 0; r < cfg.restarts; ++r) results[r] = futs[r].get();
    }

    BoundReport rep;
    rep.restarts_used = cfg.restarts;
    int best = 0;
    for (int r = 1; r < cfg.restarts; ++r) {
        rep.iterations += results[r].iterations;
        if (results[r].value > results[best].value) best = r; // ties keep lower index
    }
    rep.iterations += results[0].iterations;
    rep.best = *results[best].strat;
    rep.value = results[best].value;
    rep.defect = defects(rep.best);
    rep.trace = results[best].trace;
    rep.feasible = true; // tensor strategies commute exactly
    rep.converged = results[best].converged;
    return rep;
}

// ---- gradient check ------------------------------------------------------

struct GradientCheckReport {
    bool ok = true;
    double max_rel_error = 0.0;
    std::vector<std::string> failures;
};

// Analytic gradients vs central finite differences (step 1e-5).
inline GradientCheckReport gradient_check(const OptimizerConfig& cfg, int points = 50,
                                          int coords_per_point = 8) {
    using namespace opt_detail;
    GradientCheckReport rep;
    Game g = make_chsh();
    const double h = 1e-5;
    std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 0xabcdef);
    for (int pt = 0; pt < points; ++pt) {
        SearchMode mode = (pt % 2 == 0) ? SearchMode::Op : SearchMode::St;
        double threshold = 0.1; // keep the penalty active at random points
        double lam = 10.0;
        int d = std::max(2, cfg.dim > 4 ? 4 : cfg.dim);
        StrategyParams p = StrategyParams::random(g.n, g.k, d, rng);
        StrategyParams grad;
        eval_objective(g, p, mode, threshold, lam, &grad);
        for (int c = 0; c < coords_per_point; ++c) {
            long idx = long(rng() % uint64_t(p.coord_count()));
            StrategyParams plus = p, minus = p;
            plus.add_coord(idx, h);
            minus.add_coord(idx, -h);
            double fp = eval_objective(g, plus, mode, threshold, lam, nullptr).objective;
            double fm = eval_objective(g, minus, mode, threshold, lam, nullptr).objective;
            double fd = (fp - fm) / (2 * h);
            double an = grad.get_coord(idx);
            double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-3});
            rep.max_rel_error = std::max(rep.max_rel_error, rel);
            if (rel > 1e-4) {
                rep.ok = false;
                rep.failures.push_back("point " + std::to_string(pt) + " coord " +
                                       std::to_string(idx) + " analytic " + std::to_string(an) +
                                       " fd " + std::to_string(fd));
            }
        }
    }
    return rep;
}

} // namespace acg
