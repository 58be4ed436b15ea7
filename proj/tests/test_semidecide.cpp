#include "acg/semidecide.hpp"

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <set>

using namespace acg;
using namespace acg::testutil;

TEST_CASE("cursor decode basics") {
    auto c0 = EnumerationCursor::decode(0);
    CHECK(c0.dim == 1);
    CHECK(c0.q == 1);
    CHECK(c0.magnitude == 1);
    CHECK(c0.payload == 0);

    // replay determinism
    for (uint64_t i : {1ull, 17ull, 12345ull, 999999ull}) {
        auto a = EnumerationCursor::decode(i);
        auto b = EnumerationCursor::decode(i);
        CHECK(a.dim == b.dim);
        CHECK(a.q == b.q);
        CHECK(a.magnitude == b.magnitude);
        CHECK(a.payload == b.payload);
    }
}

TEST_CASE("cursor decode is injective on (shape, payload)") {
    std::set<std::tuple<int, long, long, uint64_t>> seen;
    for (uint64_t i = 0; i < 20000; ++i) {
        auto c = EnumerationCursor::decode(i);
        auto key = std::make_tuple(c.dim, c.q.convert_to<long>(), c.magnitude, c.payload);
        CHECK(seen.insert(key).second);
    }
}

TEST_CASE("index coverage: first 10^4 indices hit dims 1,2 and denominators 1,2,4") {
    std::set<int> dims;
    std::set<long> qs;
    for (uint64_t i = 0; i < 10000; ++i) {
        auto c = EnumerationCursor::decode(i);
        dims.insert(c.dim);
        qs.insert(c.q.convert_to<long>());
    }
    CHECK(dims.count(1) == 1);
    CHECK(dims.count(2) == 1);
    CHECK(qs.count(1) == 1);
    CHECK(qs.count(2) == 1);
    CHECK(qs.count(4) == 1);
}

TEST_CASE("enumerated pairs replay identically and pass POVM validation") {
    Game g = make_chsh();
    auto batch1 = enumerate_rational_pairs(g, 0, 400);
    auto batch2 = enumerate_rational_pairs(g, 0, 400);
    REQUIRE(batch1.size() == 400);
    for (size_t i = 0; i < batch1.size(); ++i) {
        for (size_t e = 0; e < batch1[i].a_eff.size(); ++e) {
            CHECK(batch1[i].a_eff[e] == batch2[i].a_eff[e]);
            CHECK(batch1[i].b_eff[e] == batch2[i].b_eff[e]);
        }
        // exact completeness per question, in rational arithmetic
        for (int x = 0; x < g.n; ++x) {
            RationalMatrix sum(batch1[i].dim);
            for (int a = 0; a < g.k; ++a) sum = sum + batch1[i].a_eff[size_t(x) * g.k + a];
            CHECK(sum == RationalMatrix::identity(batch1[i].dim));
        }
        // Povm constructor revalidates PSD and completeness in float
        for (int x = 0; x < g.n; ++x) {
            CHECK_NOTHROW(Povm(batch1[i].dim, batch1[i].alice.povms[x].effects));
            CHECK_NOTHROW(Povm(batch1[i].dim, batch1[i].bob.povms[x].effects));
        }
    }
}

TEST_CASE("certify_norm examples") {
    Game g = make_chsh();
    MeasurementFamily u = MeasurementFamily::uniform(2, 2, 2);
    CertifiedBound cb = certify_norm(g, u, u);
    CHECK(cb.bound == Catch::Approx(0.5).margin(1e-9)); // G = I/2
    CHECK(cb.converged);

    Game lose = make_constant_game(2, 2, 0, "lose");
    CHECK(certify_norm(lose, u, u).bound == Catch::Approx(0.0).margin(1e-12));

    // near-Tsirelson tensor pair at dim 4 certifies above the classical value
    Strategy ts = tsirelson_strategy();
    CertifiedBound best = certify_norm(g, ts.alice, ts.bob);
    CHECK(best.bound > 0.75);
}

TEST_CASE("certified bound never exceeds the top eigenvalue (property)") {
    Game g = make_chsh();
    for (const auto& cand : enumerate_rational_pairs(g, 0, 300)) {
        CertifiedBound cb = certify_norm(g, cand.alice, cand.bob);
        double lmax = eig_herm(game_operator(g, cand.alice, cand.bob)).eigenvalues(0);
        CHECK(cb.bound <= lmax + 1e-12);
    }
}

TEST_CASE("toy family: parity 0 accepts, parity 1 times out") {
    LanguageFamily fam = toy_language_family();
    SemidecideResult win = semidecide(fam, "0110", 50);
    REQUIRE(win.accepted);
    CHECK(win.witness->bound > Rational(1, 2));
    CHECK(verify_witness(*win.witness, fam, "0110"));

    SemidecideResult lose = semidecide(fam, "1", 2000);
    CHECK_FALSE(lose.accepted);
    CHECK(lose.scanned == 2000);
}

TEST_CASE("toy family compiler examples") {
    LanguageFamily fam = toy_language_family();
    Game win = fam.compiler("01");
    for (auto d : win.D) CHECK(d == 1);
    Game lose = fam.compiler("1");
    for (auto d : lose.D) CHECK(d == 0);
    CHECK(fam.delta_fn(5) == Rational(1, 10));
}

TEST_CASE("chsh family accepts within the pinned budget") {
    LanguageFamily fam = chsh_constant_family();
    SemidecideResult res = semidecide(fam, "0", 1024);
    REQUIRE(res.accepted);
    INFO("accepted at cursor index " << res.witness->cursor_index);
    CHECK(res.witness->cursor_index <= 580); // regression ceiling from first green run
    CHECK(res.witness->bound > Rational(1, 2));
    CHECK(verify_witness(*res.witness, fam, "0"));

    // the accepting pair commutes exactly, so its defect is identically zero
    CandidatePair c = decode_candidate(fam.compiler("0"), res.witness->cursor_index);
    CHECK(sd_detail::op_defect_max(c.alice, c.bob) == 0.0);
}

TEST_CASE("semidecide is deterministic and budget-monotone") {
    LanguageFamily fam = chsh_constant_family();
    SemidecideResult a = semidecide(fam, "0", 1024);
    SemidecideResult b = semidecide(fam, "0", 1024);
    REQUIRE(a.accepted);
    REQUIRE(b.accepted);
    CHECK(a.witness->cursor_index == b.witness->cursor_index);
    CHECK(a.witness->bound == b.witness->bound);

    SemidecideResult larger = semidecide(fam, "0", 4096);
    REQUIRE(larger.accepted);
    CHECK(larger.witness->cursor_index == a.witness->cursor_index);
    CHECK(larger.witness->bound == a.witness->bound);
}

TEST_CASE("soundness over random games: every accept verifies") {
    for (uint64_t seed = 0; seed < 12; ++seed) {
        Game g = random_game(seed, 2, 2, 0.5);
        LanguageFamily fam;
        fam.name = "random";
        fam.compiler = [g](const std::string&) { return g; };
        fam.delta_fn = [](size_t) { return Rational(1, 10); };
        SemidecideResult res = semidecide(fam, "0", 700);
        if (res.accepted) {
            CHECK(verify_witness(*res.witness, fam, "0"));
            // an exact certificate above 1/2 forces quantum value above 1/2
            CHECK(res.witness->bound > Rational(1, 2));
        }
    }
}

TEST_CASE("witness file roundtrip") {
    LanguageFamily fam = chsh_constant_family();
    SemidecideResult res = semidecide(fam, "0", 1024);
    REQUIRE(res.accepted);
    Witness w = *res.witness;
    Witness back = parse_witness(serialize_witness(w));
    CHECK(back.cursor_index == w.cursor_index);
    CHECK(back.dim == w.dim);
    CHECK(back.delta == w.delta);
    CHECK(back.bound == w.bound);
    for (size_t i = 0; i < w.a_eff.size(); ++i) {
        CHECK(back.a_eff[i] == w.a_eff[i]);
        CHECK(back.b_eff[i] == w.b_eff[i]);
    }
    CHECK(verify_witness(back, fam, "0"));

    CHECK_THROWS_AS(parse_witness("not a witness"), ParseError);
}

TEST_CASE("perturbed witnesses are rejected") {
    LanguageFamily fam = chsh_constant_family();
    SemidecideResult res = semidecide(fam, "0", 1024);
    REQUIRE(res.accepted);

    Witness bad = *res.witness;
    bad.a_eff[0].at(0, 0) = bad.a_eff[0].at(0, 0) + GRational(Rational(3, 10));
    CHECK_FALSE(verify_witness(bad, fam, "0"));

    Witness wrong_bound = *res.witness;
    wrong_bound.bound += Rational(1, 1000);
    CHECK_FALSE(verify_witness(wrong_bound, fam, "0"));

    Witness wrong_delta = *res.witness;
    wrong_delta.delta = Rational(1, 7);
    CHECK_FALSE(verify_witness(wrong_delta, fam, "0"));
}

TEST_CASE("witness replayed from its cursor index alone is identical") {
    LanguageFamily fam = chsh_constant_family();
    SemidecideResult res = semidecide(fam, "0", 1024);
    REQUIRE(res.accepted);
    Game g = fam.compiler("0");
    CandidatePair replay = decode_candidate(g, res.witness->cursor_index);
    for (size_t i = 0; i < res.witness->a_eff.size(); ++i) {
        CHECK(replay.a_eff[i] == res.witness->a_eff[i]);
        CHECK(replay.b_eff[i] == res.witness->b_eff[i]);
    }
    auto cert = sd_detail::try_certify(g, res.witness->delta, replay);
    REQUIRE(cert.has_value());
    CHECK(cert->bound == res.witness->bound);
    CHECK(verify_witness(*cert, fam, "0"));
}
