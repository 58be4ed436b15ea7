// acg_cli.cpp — command-line front end: value, classical, optimize, round,
// semidecide, verify.  Reports are line-oriented `key = value` text; exact
// rationals print as p/q, reals with 12 significant digits.

#include "acg/game.hpp"
#include "acg/matrix_io.hpp"
#include "acg/optimize.hpp"
#include "acg/semidecide.hpp"
#include "acg/strategy.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitTimeout = 3;

std::string fmt_real(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

acg::Game load_game(const std::string& spec) {
    if (spec == "builtin:chsh") return acg::make_chsh();
    if (spec.rfind("builtin:", 0) == 0)
        throw std::runtime_error("unknown builtin game: " + spec);
    return acg::parse_game(read_file(spec));
}

void emit(const std::string& report, const std::string& output) {
    if (output.empty()) {
        std::cout << report;
    } else {
        std::ofstream out(output);
        if (!out) throw std::runtime_error("cannot write file: " + output);
        out << report;
    }
}

acg::SearchMode parse_mode(const std::string& mode) {
    if (mode == "op") return acg::SearchMode::Op;
    if (mode == "st") return acg::SearchMode::St;
    if (mode == "unconstrained") return acg::SearchMode::Unconstrained;
    throw std::runtime_error("mode must be op, st, or unconstrained");
}

int run(int argc, char** argv) {
    CLI::App app{"nonlocal games with almost-commuting strategies"};
    app.require_subcommand(1);

    std::string game_path, strategy_path, output, delta_text = "1", mode_text = "unconstrained";
    std::string family_name = "toy", z_bits = "0", witness_path, dims_text = "4", input_path;
    uint64_t seed = 0, budget = 1000;
    int restarts = 8;

    auto* value_cmd = app.add_subcommand("value", "evaluate a strategy's winning probability");
    value_cmd->add_option("--game", game_path, "game file or builtin:chsh")->required();
    value_cmd->add_option("--strategy", strategy_path, "strategy file")->required();
    value_cmd->add_option("--output", output, "report path (default stdout)");

    auto* classical_cmd = app.add_subcommand("classical", "exact classical value");
    classical_cmd->add_option("--game", game_path, "game file or builtin:chsh")->required();
    classical_cmd->add_option("--output", output, "report path (default stdout)");

    auto* opt_cmd = app.add_subcommand("optimize", "search for high-value strategies");
    opt_cmd->add_option("--game", game_path, "game file or builtin:chsh")->required();
    opt_cmd->add_option("--dims", dims_text, "search dimension d, or dAxdB for tensor see-saw");
    opt_cmd->add_option("--delta", delta_text, "defect threshold as p/q");
    opt_cmd->add_option("--mode", mode_text, "op, st, or unconstrained");
    opt_cmd->add_option("--restarts", restarts, "number of seeded restarts");
    opt_cmd->add_option("--seed", seed, "master seed");
    opt_cmd->add_option("--output", output, "report path (default stdout)");

    auto* round_cmd = app.add_subcommand("round", "round near-measurements to an exact POVM");
    round_cmd->add_option("--input", input_path, "file of Hermitian matrix blocks")->required();
    round_cmd->add_option("--output", output, "report path (default stdout)");

    auto* semi_cmd = app.add_subcommand("semidecide", "run the enumeration semidecider");
    semi_cmd->add_option("--family", family_name, "language family: toy or chsh");
    semi_cmd->add_option("--z", z_bits, "input bit string");
    semi_cmd->add_option("--budget", budget, "cursor index budget");
    semi_cmd->add_option("--witness", witness_path, "write the accepting witness here");
    semi_cmd->add_option("--output", output, "report path (default stdout)");

    auto* verify_cmd = app.add_subcommand("verify", "replay a witness's certificate");
    verify_cmd->add_option("--witness", witness_path, "witness file")->required();
    verify_cmd->add_option("--family", family_name, "language family: toy or chsh");
    verify_cmd->add_option("--z", z_bits, "input bit string");
    verify_cmd->add_option("--output", output, "report path (default stdout)");

    CLI11_PARSE(app, argc, argv);
    std::ostringstream rep;

    if (value_cmd->parsed()) {
        acg::Game g = load_game(game_path);
        acg::Strategy s = acg::parse_strategy(read_file(strategy_path));
        double v = acg::game_value(g, s);
        acg::DefectReport d = acg::defects(s);
        rep << "game = " << g.name << "\n";
        rep << "value = " << fmt_real(v) << "\n";
        rep << "op_defect_max = " << fmt_real(d.op_max) << "\n";
        rep << "st_defect_max = " << fmt_real(d.st_max) << "\n";
        emit(rep.str(), output);
        return kExitOk;
    }

    if (classical_cmd->parsed()) {
        acg::Game g = load_game(game_path);
        rep << "game = " << g.name << "\n";
        rep << "value = " << acg::to_string(acg::classical_value(g)) << "\n";
        emit(rep.str(), output);
        return kExitOk;
    }

    if (opt_cmd->parsed()) {
        acg::Game g = load_game(game_path);
        acg::OptimizerConfig cfg;
        cfg.seed = seed;
        cfg.restarts = restarts;
        cfg.delta = acg::parse_rational(delta_text);
        cfg.mode = parse_mode(mode_text);
        acg::BoundReport br;
        auto x = dims_text.find('x');
        if (x != std::string::npos) {
            cfg.dim_a = std::stoi(dims_text.substr(0, x));
            cfg.dim_b = std::stoi(dims_text.substr(x + 1));
            cfg.max_iters = 80;
            br = acg::seesaw_commuting(g, cfg);
            rep << "method = seesaw\n";
        } else {
            cfg.dim = std::stoi(dims_text);
            cfg.max_iters = 250;
            br = acg::optimize_delta(g, cfg);
            rep << "method = penalty\n";
        }
        rep << "game = " << g.name << "\n";
        rep << "value = " << fmt_real(br.value) << "\n";
        rep << "feasible = " << (br.feasible ? "true" : "false") << "\n";
        rep << "op_defect_max = " << fmt_real(br.defect.op_max) << "\n";
        rep << "st_defect_max = " << fmt_real(br.defect.st_max) << "\n";
        rep << "restarts = " << br.restarts_used << "\n";
        emit(rep.str(), output);
        return kExitOk;
    }

    if (round_cmd->parsed()) {
        std::istringstream in(read_file(input_path));
        std::vector<acg::HermMatrix> xs;
        std::string tok;
        while (in >> tok) {
            if (tok != "dim") throw acg::ParseError("expected a matrix block starting 'dim d'");
            int d = 0;
            if (!(in >> d) || d < 1) throw acg::ParseError("bad matrix dimension");
            acg::RationalMatrix m(d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    if (!(in >> tok)) throw acg::ParseError("matrix block truncated");
                    m.at(i, j) = acg::parse_complex_entry(tok);
                }
            xs.emplace_back(m.to_complex());
        }
        if (xs.empty()) throw acg::ParseError("no matrices in input");
        acg::RoundResult rr = acg::round_to_povm(xs);
        rep << "count = " << xs.size() << "\n";
        rep << "phi_k = " << fmt_real(rr.phi_k) << "\n";
        rep << "distance = " << fmt_real(rr.distance) << "\n";
        for (int i = 0; i < rr.povm.length(); ++i) {
            rep << "effect " << (i + 1) << "\n";
            std::ostringstream block;
            acg::write_matrix(block, rr.povm.effects[i].mat());
            rep << block.str();
        }
        emit(rep.str(), output);
        return kExitOk;
    }

    if (semi_cmd->parsed()) {
        acg::LanguageFamily fam = acg::family_by_name(family_name);
        acg::SemidecideResult res = acg::semidecide(fam, z_bits, budget);
        rep << "family = " << fam.name << "\n";
        rep << "z = " << z_bits << "\n";
        rep << "budget = " << budget << "\n";
        rep << "scanned = " << res.scanned << "\n";
        rep << "outcome = " << (res.accepted ? "accept" : "timeout") << "\n";
        if (res.accepted) {
            rep << "cursor_index = " << res.witness->cursor_index << "\n";
            rep << "dim = " << res.witness->dim << "\n";
            rep << "bound = " << acg::to_string(res.witness->bound) << "\n";
            if (!witness_path.empty()) {
                std::ofstream wf(witness_path);
                if (!wf) throw std::runtime_error("cannot write file: " + witness_path);
                wf << acg::serialize_witness(*res.witness);
            }
        }
        emit(rep.str(), output);
        return res.accepted ? kExitOk : kExitTimeout;
    }

    if (verify_cmd->parsed()) {
        acg::LanguageFamily fam = acg::family_by_name(family_name);
        acg::Witness w = acg::parse_witness(read_file(witness_path));
        acg::VerifyReport vr = acg::verify_witness_report(w, fam, z_bits);
        rep << "family = " << fam.name << "\n";
        rep << "z = " << z_bits << "\n";
        rep << "cursor_index = " << w.cursor_index << "\n";
        rep << "verified = " << (vr.ok ? "true" : "false") << "\n";
        for (const auto& d : vr.diagnostics) rep << "diagnostic = " << d << "\n";
        emit(rep.str(), output);
        return vr.ok ? kExitOk : kExitValidation;
    }

    return kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
