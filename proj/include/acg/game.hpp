// game.hpp — nonlocal-game data model: question distribution pi (exact
// rationals), binary decision predicate D, canonical games, file format

#pragma once

#include "acg/rational.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace acg {

// (pi, D) with n questions and k answers.  Indices are 1-based externally,
// matching [n] = {1,...,n}; storage is 0-based.
struct Game {
    int n = 0;
    int k = 0;
    std::vector<Rational> pi;   // n*n, row-major over (x,y)
    std::vector<uint8_t> D;     // n*n*k*k over (x,y,a,b)
    std::string name;

    Game() = default;
    Game(int n_, int k_, std::string name_ = "")
        : n(n_), k(k_),
          pi(static_cast<size_t>(n_) * n_, Rational(0)),
          D(static_cast<size_t>(n_) * n_ * k_ * k_, 0),
          name(std::move(name_)) {
        if (n < 1 || k < 1) throw std::invalid_argument("Game: n, k must be >= 1");
    }

    // 1-based accessors
    Rational& pi_at(int x, int y) { return pi[static_cast<size_t>(x - 1) * n + (y - 1)]; }
    const Rational& pi_at(int x, int y) const { return pi[static_cast<size_t>(x - 1) * n + (y - 1)]; }
    uint8_t& d_at(int x, int y, int a, int b) {
        return D[((static_cast<size_t>(x - 1) * n + (y - 1)) * k + (a - 1)) * k + (b - 1)];
    }
    uint8_t d_at(int x, int y, int a, int b) const {
        return D[((static_cast<size_t>(x - 1) * n + (y - 1)) * k + (a - 1)) * k + (b - 1)];
    }

    friend bool operator==(const Game& g, const Game& h) {
        return g.n == h.n && g.k == h.k && g.pi == h.pi && g.D == h.D && g.name == h.name;
    }
};

// CHSH: n=k=2, pi uniform, win iff a xor b = x and y (0-indexed semantics).
inline Game make_chsh() {
    Game g(2, 2, "chsh");
    for (int x = 1; x <= 2; ++x)
        for (int y = 1; y <= 2; ++y) {
            g.pi_at(x, y) = Rational(1, 4);
            for (int a = 1; a <= 2; ++a)
                for (int b = 1; b <= 2; ++b)
                    g.d_at(x, y, a, b) = (((a - 1) ^ (b - 1)) == ((x - 1) & (y - 1))) ? 1 : 0;
        }
    return g;
}

inline Game make_constant_game(int n, int k, uint8_t value, std::string name) {
    Game g(n, k, std::move(name));
    for (auto& p : g.pi) p = Rational(1, static_cast<long>(n) * n);
    for (auto& d : g.D) d = value;
    return g;
}

struct ValidationReport {
    bool valid = true;
    std::vector<std::string> violations;
};

inline ValidationReport validate(const Game& g) {
    ValidationReport r;
    Rational mass = 0;
    for (const auto& p : g.pi) {
        mass += p;
        if (p < 0) {
            r.valid = false;
            r.violations.push_back("negative pi entry");
        }
    }
    if (mass != 1) {
        r.valid = false;
        r.violations.push_back("pi mass " + to_string(mass) + " != 1");
    }
    for (size_t i = 0; i < g.D.size(); ++i)
        if (g.D[i] != 0 && g.D[i] != 1) {
            r.valid = false;
            std::ostringstream os;
            os << "non-binary predicate entry " << int(g.D[i]) << " at flat index " << i;
            r.violations.push_back(os.str());
        }
    if (g.n < 1 || g.k < 1) {
        r.valid = false;
        r.violations.push_back("n and k must be >= 1");
    }
    return r;
}

inline std::string serialize_game(const Game& g) {
    std::ostringstream os;
    os << "game " << (g.name.empty() ? "unnamed" : g.name) << "\n";
    os << "n " << g.n << "\n";
    os << "k " << g.k << "\n";
    for (int x = 1; x <= g.n; ++x)
        for (int y = 1; y <= g.n; ++y)
            if (g.pi_at(x, y) != 0)
                os << "pi " << x << " " << y << " " << to_string(g.pi_at(x, y)) << "\n";
    for (int x = 1; x <= g.n; ++x)
        for (int y = 1; y <= g.n; ++y)
            for (int a = 1; a <= g.k; ++a)
                for (int b = 1; b <= g.k; ++b)
                    if (g.d_at(x, y, a, b))
                        os << "D " << x << " " << y << " " << a << " " << b << " 1\n";
    os << "end\n";
    return os.str();
}

// Unspecified pi / D lines default to 0.  `#` starts a comment.
inline Game parse_game(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    std::string name;
    int n = -1, k = -1;
    struct PiLine { int x, y; Rational p; };
    struct DLine { int x, y, a, b, v; };
    std::vector<PiLine> pis;
    std::vector<DLine> ds;
    bool saw_end = false;

    auto fail = [&](const std::string& msg) {
        throw std::invalid_argument("game parse error at line " + std::to_string(lineno) + ": " + msg);
    };

    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (saw_end) fail("content after 'end'");
        if (key == "game") {
            if (!(ls >> name)) fail("missing game name");
        } else if (key == "n") {
            if (!(ls >> n) || n < 1) fail("bad n");
        } else if (key == "k") {
            if (!(ls >> k) || k < 1) fail("bad k");
        } else if (key == "pi") {
            PiLine p;
            std::string frac;
            if (!(ls >> p.x >> p.y >> frac)) fail("malformed pi line");
            try { p.p = parse_rational(frac); } catch (const std::exception& e) { fail(e.what()); }
            pis.push_back(p);
        } else if (key == "D") {
            DLine d;
            if (!(ls >> d.x >> d.y >> d.a >> d.b >> d.v)) fail("malformed D line");
            ds.push_back(d);
        } else if (key == "end") {
            saw_end = true;
        } else {
            fail("unknown keyword '" + key + "'");
        }
    }
    lineno = 0;
    if (n < 1 || k < 1) throw std::invalid_argument("game parse error: n and k must be declared");
    Game g(n, k, name);
    for (const auto& p : pis) {
        if (p.x < 1 || p.x > n || p.y < 1 || p.y > n)
            throw std::invalid_argument("game parse error: pi index (" + std::to_string(p.x) + "," +
                                        std::to_string(p.y) + ") out of range");
        g.pi_at(p.x, p.y) = p.p;
    }
    for (const auto& d : ds) {
        if (d.x < 1 || d.x > n || d.y < 1 || d.y > n || d.a < 1 || d.a > k || d.b < 1 || d.b > k)
            throw std::invalid_argument("game parse error: D index out of range");
        if (d.v != 0 && d.v != 1)
            throw std::invalid_argument("game parse error: D value must be 0 or 1");
        g.d_at(d.x, d.y, d.a, d.b) = static_cast<uint8_t>(d.v);
    }
    Rational mass = 0;
    for (const auto& p : g.pi) mass += p;
    if (mass != 1)
        throw std::invalid_argument("game parse error: pi mass " + to_string(mass) + " != 1");
    return g;
}

// Uniform pi; each D entry independently 1 with probability win_density.
inline Game random_game(uint64_t seed, int n, int k, double win_density) {
    if (win_density < 0.0 || win_density > 1.0)
        throw std::invalid_argument("random_game: win_density outside [0,1]");
    Game g(n, k, "random-" + std::to_string(seed));
    for (auto& p : g.pi) p = Rational(1, static_cast<long>(n) * n);
    std::mt19937_64 rng(seed);
    for (auto& d : g.D) {
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53; // uniform in [0,1)
        d = (u < win_density) ? 1 : 0;
    }
    return g;
}

} // namespace acg
