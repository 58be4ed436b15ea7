// acceptance.cpp — end-to-end acceptance run: one PASS/FAIL line per
// criterion, nonzero exit on any failure.  Invoked with --cli <path> so the
// determinism criteria can exercise the installed command-line binary.

#include "acg/game.hpp"
#include "acg/optimize.hpp"
#include "acg/semidecide.hpp"
#include "acg/strategy.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace acg;
using namespace acg::testutil;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int criterion, bool ok, const std::string& detail) {
    std::cout << "criterion " << criterion << ": " << (ok ? "PASS" : "FAIL") << " (" << detail
              << ")" << std::endl;
    if (!ok) ++failures;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// ---- 1: exact classical value --------------------------------------------

void criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    Rational v = classical_value(make_chsh());
    double dt = seconds_since(t0);
    std::ostringstream d;
    d << "classical chsh value " << to_string(v) << " in " << dt << " s";
    report(1, v == Rational(3, 4) && dt < 1.0, d.str());
}

// ---- 2: Tsirelson strategy evaluation ------------------------------------

void criterion2() {
    auto t0 = std::chrono::steady_clock::now();
    double v = game_value(make_chsh(), tsirelson_strategy());
    double dt = seconds_since(t0);
    double target = (2.0 + std::sqrt(2.0)) / 4.0;
    std::ostringstream d;
    d << "tsirelson value " << v << " vs " << target << " in " << dt << " s";
    report(2, std::abs(v - target) <= 1e-9 && dt < 1.0, d.str());
}

// ---- 3: see-saw -----------------------------------------------------------

void criterion3() {
    auto t0 = std::chrono::steady_clock::now();
    OptimizerConfig cfg;
    cfg.seed = 7;
    cfg.restarts = 8;
    cfg.max_iters = 80;
    cfg.dim_a = 2;
    cfg.dim_b = 2;
    Game g = make_chsh();
    bool ok = true;
    double best = 0.0;
    for (uint64_t seed : {7ull, 11ull, 23ull}) {
        cfg.seed = seed;
        BoundReport br = seesaw_commuting(g, cfg);
        best = std::max(best, br.value);
        double lmax = eig_herm(game_operator(g, br.best.alice, br.best.bob)).eigenvalues(0);
        ok = ok && br.value <= lmax + 1e-9;
    }
    double dt = seconds_since(t0);
    std::ostringstream d;
    d << "best seesaw value " << best << " in " << dt << " s";
    report(3, ok && best >= 0.853453 && dt < 60.0, d.str());
}

// ---- 4: delta-constrained search -----------------------------------------

void criterion4() {
    auto t0 = std::chrono::steady_clock::now();
    Game g = make_chsh();
    OptimizerConfig cfg;
    cfg.seed = 3;
    cfg.restarts = 6;
    cfg.max_iters = 250;
    cfg.dim = 4;
    cfg.mode = SearchMode::Op;
    cfg.delta = Rational(1, 100);
    BoundReport tight = optimize_delta(g, cfg);
    cfg.delta = Rational(8);
    cfg.restarts = 8;
    BoundReport loose = optimize_delta(g, cfg);
    double dt = seconds_since(t0);
    bool ok = tight.feasible && tight.defect.op_max < 0.01 && tight.value >= 0.75 - 1e-6 &&
              loose.feasible && loose.value >= 0.8525 && dt < 120.0;
    std::ostringstream d;
    d << "delta=1/100 value " << tight.value << " defect " << tight.defect.op_max
      << "; delta=8 value " << loose.value << " in " << dt << " s";
    report(4, ok, d.str());
}

// ---- 5: correlation law ---------------------------------------------------

void criterion5() {
    std::mt19937_64 rng(501);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        int d = 2 + int(rng() % 5);
        int n = 1 + int(rng() % 2), k = 2 + int(rng() % 2);
        Strategy s = random_strategy(rng, n, k, d);
        CorrelationTable t = correlation_table(s);
        for (int x = 1; x <= n; ++x)
            for (int y = 1; y <= n; ++y) {
                double mass = 0.0;
                for (int a = 1; a <= k; ++a)
                    for (int b = 1; b <= k; ++b) {
                        if (t.at(x, y, a, b) < 0.0) ++violations;
                        mass += t.at(x, y, a, b);
                    }
                if (std::abs(mass - 1.0) > 1e-8) ++violations;
            }
        DefectReport dr = defects(s);
        for (int x = 1; x <= n; ++x)
            for (int y = 1; y <= n; ++y)
                if (dr.st_at(x, y) > dr.op_at(x, y) + 1e-10) ++violations;
    }
    std::ostringstream d;
    d << violations << " violations over 1000 random strategies";
    report(5, violations == 0, d.str());
}

// ---- 6: rounding ----------------------------------------------------------

void criterion6() {
    std::mt19937_64 rng(601);
    std::vector<double> etas = {1e-2, 1e-3, 1e-4};
    std::vector<double> medians;
    bool complete = true;
    for (double eta : etas) {
        std::vector<double> dists;
        for (int trial = 0; trial < 500; ++trial) {
            int d = 2 + int(rng() % 3), k = 2 + int(rng() % 2);
            Povm p = random_povm(rng, d, k);
            std::vector<HermMatrix> xs;
            for (const auto& e : p.effects)
                xs.emplace_back(Matrix(e.mat() + eta * random_herm(rng, d).mat()));
            RoundResult rr = round_to_povm(xs);
            Matrix sum = Matrix::Zero(d, d);
            for (const auto& e : rr.povm.effects) sum += e.mat();
            if (op_norm(Matrix(sum - Matrix::Identity(d, d))) > 1e-12) complete = false;
            dists.push_back(rr.distance);
        }
        std::sort(dists.begin(), dists.end());
        medians.push_back(dists[dists.size() / 2]);
    }
    bool monotone = medians[0] > medians[1] && medians[1] > medians[2];
    std::ostringstream d;
    d << "median distances " << medians[0] << " > " << medians[1] << " > " << medians[2];
    report(6, complete && monotone, d.str());
}

// ---- 7: PSD-distance oracle ----------------------------------------------

void criterion7() {
    std::mt19937_64 rng(701);
    bool ok = true;
    for (int trial = 0; trial < 200 && ok; ++trial) {
        HermMatrix m = random_herm(rng, 2);
        double closed = psd_cone_distance(m);
        double witness = op_norm(Matrix(positive_part(m).mat() - m.mat()));
        if (std::abs(closed - witness) > 1e-10) ok = false;
        for (int i = 0; i < 10000; ++i) {
            Matrix z = random_complex(rng, 2) * (0.2 * (1 + i % 10));
            if (op_norm(Matrix(z.adjoint() * z - m.mat())) < closed - 1e-6) {
                ok = false;
                break;
            }
        }
    }
    report(7, ok, "200 random matrices, 10^4 Z*Z samples each");
}

// ---- 8: semidecision soundness -------------------------------------------

void criterion8() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    int accepts = 0;
    LanguageFamily toy = toy_language_family();
    SemidecideResult win = semidecide(toy, "0", 2000);
    if (!win.accepted || !verify_witness(*win.witness, toy, "0")) ok = false;

    for (uint64_t seed = 0; seed < 100; ++seed) {
        Game g = random_game(seed, 2, 2, 0.5);
        LanguageFamily fam;
        fam.name = "random";
        fam.compiler = [g](const std::string&) { return g; };
        fam.delta_fn = [](size_t) { return Rational(1, 10); };
        SemidecideResult res = semidecide(fam, "0", 300);
        if (res.accepted) {
            ++accepts;
            if (!verify_witness(*res.witness, fam, "0")) ok = false;
        }
    }
    SemidecideResult lose = semidecide(toy, "1", 100000);
    if (lose.accepted || lose.scanned != 100000) ok = false;
    double dt = seconds_since(t0);
    std::ostringstream d;
    d << accepts << " accepts on random games all verified; zero accepts on the D=0 game over "
      << "10^5 candidates in " << dt << " s";
    report(8, ok, d.str());
}

// ---- 9: semidecision completeness ----------------------------------------

void criterion9() {
    LanguageFamily fam = chsh_constant_family();
    const uint64_t pinned_budget = 1024; // accept observed at cursor index 580
    SemidecideResult res = semidecide(fam, "0", pinned_budget);
    bool ok = res.accepted;
    std::ostringstream d;
    if (ok) {
        CandidatePair c = decode_candidate(fam.compiler("0"), res.witness->cursor_index);
        double defect = sd_detail::op_defect_max(c.alice, c.bob);
        ok = defect == 0.0 && res.witness->bound > Rational(1, 2) &&
             verify_witness(*res.witness, fam, "0");
        d << "accepted at index " << res.witness->cursor_index << ", defect " << defect
          << ", bound " << to_string(res.witness->bound);
    } else {
        d << "no accept within budget " << pinned_budget;
    }
    report(9, ok, d.str());
}

// ---- 10: gradient check ---------------------------------------------------

void criterion10() {
    OptimizerConfig cfg;
    cfg.seed = 2024;
    cfg.dim = 3;
    GradientCheckReport rep = gradient_check(cfg, 50, 8);
    std::ostringstream d;
    d << "max relative error " << rep.max_rel_error << " over 50 points";
    report(10, rep.ok && rep.max_rel_error <= 1e-4, d.str());
}

// ---- 11: CLI determinism --------------------------------------------------

int run_cli(const std::string& cli, const std::string& args, const std::string& out) {
    std::string cmd = "ACG_THREADS=0 " + cli + " " + args + " > " + out + " 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion11(const std::string& cli) {
    std::string dir = "acceptance_tmp";
    std::system(("mkdir -p " + dir).c_str());
    {
        std::ofstream g(dir + "/chsh.game");
        g << serialize_game(make_chsh());
        std::ofstream s(dir + "/tsirelson.strat");
        s << serialize_strategy(tsirelson_strategy());
        std::ofstream m(dir + "/near.povm");
        m << "dim 2\n11/10 0\n0 -1/10\ndim 2\n-1/10 0\n0 11/10\n";
    }
    std::vector<std::pair<std::string, int>> runs = {
        {"classical --game " + dir + "/chsh.game", 0},
        {"value --game builtin:chsh --strategy " + dir + "/tsirelson.strat", 0},
        {"optimize --game builtin:chsh --dims 2x2 --restarts 4 --seed 5", 0},
        {"optimize --game builtin:chsh --dims 4 --mode op --delta 1/20 --restarts 2 --seed 5", 0},
        {"round --input " + dir + "/near.povm", 0},
        {"semidecide --family chsh --z 0 --budget 1024 --witness " + dir + "/w.txt", 0},
        {"verify --witness " + dir + "/w.txt --family chsh --z 0", 0},
        {"semidecide --family toy --z 1 --budget 1000", 3},
    };
    bool ok = true;
    std::ostringstream d;
    for (size_t i = 0; i < runs.size(); ++i) {
        std::string o1 = dir + "/out_a_" + std::to_string(i);
        std::string o2 = dir + "/out_b_" + std::to_string(i);
        int e1 = run_cli(cli, runs[i].first, o1);
        int e2 = run_cli(cli, runs[i].first, o2);
        if (e1 != runs[i].second || e2 != runs[i].second || slurp(o1) != slurp(o2) ||
            slurp(o1).empty()) {
            ok = false;
            d << "[mismatch: " << runs[i].first << " exit " << e1 << "/" << e2 << "] ";
        }
    }
    if (ok) d << runs.size() << " subcommand runs byte-identical with expected exit codes";
    report(11, ok, d.str());
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    if (cli.empty()) {
        report(11, false, "no --cli path supplied");
    } else {
        criterion11(cli);
    }
    if (failures == 0) std::cout << "all criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
