// semidecide.hpp — the enumeration-based semidecision harness: certified norm
// lower bounds, accepting witnesses with exact rational certificates, witness
// files, and language families.

#pragma once

#include "acg/enumeration.hpp"
#include "acg/game.hpp"
#include "acg/matrix_io.hpp"
#include "acg/optimize.hpp"
#include "acg/rational_matrix.hpp"
#include "acg/strategy.hpp"

#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace acg {

struct CertifiedBound {
    double bound = 0.0;   // Rayleigh quotient v* G v, a lower bound on ||G||
    Vector vector;
    double residual = 0.0;
    bool converged = false;
};

// Power iteration on the PSD game operator until ||Gv - lambda v|| <= 1/8 or
// the iteration cap; the Rayleigh quotient is an unconditional lower bound
// either way, the residual target only matters for completeness.
inline CertifiedBound certify_norm(const Game& g, const MeasurementFamily& a,
                                   const MeasurementFamily& b) {
    HermMatrix gop = game_operator(g, a, b);
    const int d = gop.dim();
    CertifiedBound out;
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = 1.0 + 0.013 * i;
    v.normalize();
    double lam = 0.0;
    for (int it = 0; it < 500; ++it) {
        Vector w = gop.mat() * v;
        lam = w.dot(v).real();
        out.residual = (w - lam * v).norm();
        if (out.residual <= 0.125) {
            out.converged = true;
            break;
        }
        double nn = w.norm();
        if (nn < 1e-28) break; // G annihilates v; bound 0 is already tight
        v = w / nn;
    }
    Vector w = gop.mat() * v;
    out.bound = std::max(0.0, w.dot(v).real());
    out.residual = (w - out.bound * v).norm();
    out.converged = out.converged || out.residual <= 0.125;
    out.vector = v;
    return out;
}

struct Witness {
    std::string game_name;
    uint64_t cursor_index = 0;
    int dim = 0, n = 0, k = 0;
    Rational delta;
    std::vector<RationalMatrix> a_eff, b_eff; // n*k each, question-major
    RationalVector rayleigh;
    Rational bound; // exact Rayleigh quotient, > 1/2 on accept
};

struct LanguageFamily {
    std::string name;
    std::function<Game(const std::string&)> compiler; // z as a bit string
    std::function<Rational(size_t)> delta_fn;         // |z| -> delta in [0,1]
};

inline LanguageFamily toy_language_family() {
    LanguageFamily fam;
    fam.name = "toy";
    fam.compiler = [](const std::string& z) {
        // z is little-endian, so the parity of the encoded number is its first bit
        bool odd = !z.empty() && z.front() == '1';
        return make_constant_game(2, 2, odd ? 0 : 1, odd ? "toy-lose" : "toy-win");
    };
    fam.delta_fn = [](size_t) { return Rational(1, 10); };
    return fam;
}

inline LanguageFamily chsh_constant_family() {
    LanguageFamily fam;
    fam.name = "chsh";
    fam.compiler = [](const std::string&) { return make_chsh(); };
    fam.delta_fn = [](size_t) { return Rational(1, 10); };
    return fam;
}

inline LanguageFamily family_by_name(const std::string& name) {
    if (name == "toy") return toy_language_family();
    if (name == "chsh") return chsh_constant_family();
    throw std::invalid_argument("unknown language family '" + name + "'");
}

namespace sd_detail {

inline double op_defect_max(const MeasurementFamily& a, const MeasurementFamily& b) {
    double worst = 0.0;
    for (int x = 1; x <= a.n; ++x)
        for (int y = 1; y <= a.n; ++y) {
            double acc = 0.0;
            for (int aa = 1; aa <= a.k; ++aa)
                for (int bb = 1; bb <= a.k; ++bb)
                    acc += op_norm(commutator(a.effect(x, aa), b.effect(y, bb)));
            worst = std::max(worst, acc);
        }
    return worst;
}

inline bool exactly_commuting(const CandidatePair& c, int n, int k) {
    for (int xa = 0; xa < n * k; ++xa)
        for (int yb = 0; yb < n * k; ++yb)
            if (!commutator(c.a_eff[xa], c.b_eff[yb]).is_zero()) return false;
    return true;
}

// For exactly commuting pairs the bullet is the plain product, so the game
// operator is assembled entry-exactly over the Gaussian rationals.
inline RationalMatrix exact_game_operator(const Game& g, const CandidatePair& c) {
    RationalMatrix acc(c.dim);
    for (int x = 1; x <= g.n; ++x)
        for (int y = 1; y <= g.n; ++y) {
            if (g.pi_at(x, y) == 0) continue;
            for (int a = 1; a <= g.k; ++a)
                for (int b = 1; b <= g.k; ++b)
                    if (g.d_at(x, y, a, b))
                        acc = acc + g.pi_at(x, y) * (c.a_eff[(x - 1) * g.k + (a - 1)] *
                                                     c.b_eff[(y - 1) * g.k + (b - 1)]);
        }
    return acc;
}

// Accept requires every check to pass: guarded float defect, float Rayleigh
// prefilter, exact commutation, exact rational Rayleigh bound above 1/2.
inline std::optional<Witness> try_certify(const Game& g, const Rational& delta,
                                          const CandidatePair& cand) {
    double delta_f = to_double(delta);
    if (!(op_defect_max(cand.alice, cand.bob) < delta_f - 1e-9)) return std::nullopt;
    CertifiedBound cb = certify_norm(g, cand.alice, cand.bob);
    if (!(cb.bound > 0.5)) return std::nullopt;
    if (!exactly_commuting(cand, g.n, g.k)) return std::nullopt;
    RationalMatrix gop = exact_game_operator(g, cand);
    RationalVector v = rational_vector_from_complex(cb.vector);
    Rational bound = rayleigh_quotient_exact(gop, v);
    if (!(bound > Rational(1, 2))) return std::nullopt;
    Witness w;
    w.game_name = g.name;
    w.cursor_index = cand.index;
    w.dim = cand.dim;
    w.n = g.n;
    w.k = g.k;
    w.delta = delta;
    w.a_eff = cand.a_eff;
    w.b_eff = cand.b_eff;
    w.rayleigh = std::move(v);
    w.bound = bound;
    return w;
}

} // namespace sd_detail

struct SemidecideResult {
    bool accepted = false;
    std::optional<Witness> witness;
    uint64_t scanned = 0;
};

// Scans cursor indices 0..budget-1 in order; Accept on the first certified
// candidate, Timeout otherwise.  Batches may be checked concurrently; the
// lowest accepting index wins, so the outcome is schedule-independent.
inline SemidecideResult semidecide(const LanguageFamily& fam, const std::string& z,
                                   uint64_t budget) {
    if (budget < 1) throw std::invalid_argument("semidecide: budget >= 1");
    Game g = fam.compiler(z);
    Rational delta = fam.delta_fn(z.size());
    SemidecideResult res;
    int workers = opt_detail::worker_count();
    const uint64_t batch = (workers > 1) ? 256 : 1;
    for (uint64_t start = 0; start < budget; start += batch) {
        uint64_t stop = std::min(budget, start + batch);
        std::vector<std::optional<Witness>> found(stop - start);
        if (workers > 1 && stop - start > 1) {
            std::vector<std::future<void>> futs;
            uint64_t chunk = (stop - start + workers - 1) / workers;
            for (int t = 0; t < workers; ++t) {
                uint64_t lo = start + t * chunk, hi = std::min(stop, lo + chunk);
                if (lo >= hi) break;
                futs.push_back(std::async(std::launch::async, [&, lo, hi] {
                    for (uint64_t i = lo; i < hi; ++i)
                        found[i - start] = sd_detail::try_certify(g, delta, decode_candidate(g, i));
                }));
            }
            for (auto& f : futs) f.get();
        } else {
            for (uint64_t i = start; i < stop; ++i)
                found[i - start] = sd_detail::try_certify(g, delta, decode_candidate(g, i));
        }
        for (uint64_t i = start; i < stop; ++i) {
            if (found[i - start]) {
                res.accepted = true;
                res.witness = std::move(found[i - start]);
                res.scanned = i + 1;
                return res;
            }
        }
        res.scanned = stop;
    }
    return res;
}

struct VerifyReport {
    bool ok = false;
    std::vector<std::string> diagnostics;
};

// Full independent replay of the acceptance checks from the witness alone.
inline VerifyReport verify_witness_report(const Witness& w, const LanguageFamily& fam,
                                          const std::string& z) {
    VerifyReport rep;
    Game g = fam.compiler(z);
    if (g.n != w.n || g.k != w.k) {
        rep.diagnostics.push_back("game shape mismatch");
        return rep;
    }
    if (fam.delta_fn(z.size()) != w.delta) {
        rep.diagnostics.push_back("delta mismatch");
        return rep;
    }
    if (static_cast<int>(w.a_eff.size()) != w.n * w.k ||
        static_cast<int>(w.b_eff.size()) != w.n * w.k) {
        rep.diagnostics.push_back("effect count mismatch");
        return rep;
    }
    MeasurementFamily af, bf;
    try {
        auto build = [&](const std::vector<RationalMatrix>& effs) {
            std::vector<Povm> povms;
            for (int x = 0; x < w.n; ++x) {
                std::vector<HermMatrix> q;
                for (int a = 0; a < w.k; ++a) {
                    if (effs[size_t(x) * w.k + a].dim() != w.dim)
                        throw std::invalid_argument("effect dim mismatch");
                    if (!effs[size_t(x) * w.k + a].is_hermitian())
                        throw std::invalid_argument("effect not Hermitian");
                    q.emplace_back(effs[size_t(x) * w.k + a].to_complex());
                }
                povms.emplace_back(w.dim, std::move(q));
            }
            return MeasurementFamily(w.n, w.k, std::move(povms));
        };
        af = build(w.a_eff);
        bf = build(w.b_eff);
    } catch (const std::exception& e) {
        rep.diagnostics.push_back(std::string("POVM validation failed: ") + e.what());
        return rep;
    }
    if (!(sd_detail::op_defect_max(af, bf) < to_double(w.delta) - 1e-9)) {
        rep.diagnostics.push_back("op-defect not below delta");
        return rep;
    }
    CandidatePair c;
    c.dim = w.dim;
    c.a_eff = w.a_eff;
    c.b_eff = w.b_eff;
    if (!sd_detail::exactly_commuting(c, w.n, w.k)) {
        rep.diagnostics.push_back("cross commutators not exactly zero");
        return rep;
    }
    Rational bound = rayleigh_quotient_exact(sd_detail::exact_game_operator(g, c), w.rayleigh);
    if (bound != w.bound) {
        rep.diagnostics.push_back("stored bound does not match exact Rayleigh quotient");
        return rep;
    }
    if (!(bound > Rational(1, 2))) {
        rep.diagnostics.push_back("exact bound does not exceed 1/2");
        return rep;
    }
    rep.ok = true;
    return rep;
}

inline bool verify_witness(const Witness& w, const LanguageFamily& fam, const std::string& z) {
    return verify_witness_report(w, fam, z).ok;
}

// ---- witness file format -------------------------------------------------

inline std::string serialize_witness(const Witness& w) {
    std::ostringstream os;
    os << "witness index " << w.cursor_index << " dim " << w.dim << " n " << w.n << " k "
       << w.k << "\n";
    os << "game " << w.game_name << "\n";
    os << "delta " << to_string(w.delta) << "\n";
    os << "bound " << to_string(w.bound) << "\n";
    for (int x = 1; x <= w.n; ++x)
        for (int a = 1; a <= w.k; ++a) {
            os << "A " << x << " " << a << "\n";
            write_matrix(os, w.a_eff[size_t(x - 1) * w.k + (a - 1)]);
        }
    for (int y = 1; y <= w.n; ++y)
        for (int b = 1; b <= w.k; ++b) {
            os << "B " << y << " " << b << "\n";
            write_matrix(os, w.b_eff[size_t(y - 1) * w.k + (b - 1)]);
        }
    os << "vector";
    for (const auto& z : w.rayleigh) os << " " << format_complex_entry(z);
    os << "\n";
    return os.str();
}

inline Witness parse_witness(const std::string& text) {
    std::istringstream is(text);
    std::string key;
    Witness w;
    if (!(is >> key) || key != "witness") throw ParseError("witness file must start with 'witness'");
    std::string ki, kd, kn, kk;
    if (!(is >> ki >> w.cursor_index >> kd >> w.dim >> kn >> w.n >> kk >> w.k) ||
        ki != "index" || kd != "dim" || kn != "n" || kk != "k" || w.dim < 1 || w.n < 1 || w.k < 1)
        throw ParseError("malformed witness header");
    w.a_eff.assign(size_t(w.n) * w.k, RationalMatrix(w.dim));
    w.b_eff.assign(size_t(w.n) * w.k, RationalMatrix(w.dim));
    std::vector<bool> have_a(size_t(w.n) * w.k, false), have_b(size_t(w.n) * w.k, false);
    bool have_vec = false;
    while (is >> key) {
        if (key == "game") {
            if (!(is >> w.game_name)) throw ParseError("malformed game line");
        } else if (key == "delta" || key == "bound") {
            std::string tok;
            if (!(is >> tok)) throw ParseError("malformed " + key + " line");
            (key == "delta" ? w.delta : w.bound) = parse_rational(tok);
        } else if (key == "A" || key == "B") {
            int x = 0, a = 0;
            if (!(is >> x >> a) || x < 1 || x > w.n || a < 1 || a > w.k)
                throw ParseError("bad effect block header");
            RationalMatrix m = read_rational_matrix(is);
            if (m.dim() != w.dim) throw ParseError("effect matrix has wrong dim");
            size_t idx = size_t(x - 1) * w.k + (a - 1);
            (key == "A" ? w.a_eff : w.b_eff)[idx] = std::move(m);
            (key == "A" ? have_a : have_b)[idx] = true;
        } else if (key == "vector") {
            for (int i = 0; i < w.dim; ++i) {
                std::string tok;
                if (!(is >> tok)) throw ParseError("vector line truncated");
                w.rayleigh.push_back(parse_complex_entry(tok));
            }
            have_vec = true;
        } else {
            throw ParseError("unknown witness block '" + key + "'");
        }
    }
    for (bool h : have_a)
        if (!h) throw ParseError("witness missing an A effect");
    for (bool h : have_b)
        if (!h) throw ParseError("witness missing a B effect");
    if (!have_vec) throw ParseError("witness missing the Rayleigh vector");
    return w;
}

} // namespace acg
