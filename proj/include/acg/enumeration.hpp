// enumeration.hpp — deterministic enumeration of rational measurement pairs:
// cursor decoding, payload-to-matrix decoding, and POVM repair of the decoded
// near-measurements.

#pragma once

#include "acg/game.hpp"
#include "acg/rational_matrix.hpp"
#include "acg/strategy.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace acg {

// Decoded position in the enumeration.  The index splits bitwise: bits at
// positions divisible by 4 form the header, the rest form the payload
// integer.  The header is a Cantor-triple index for (dim, denominator
// exponent, magnitude bound), so small indices already sweep several (d, q)
// shapes while leaving most bits to the payload.
struct EnumerationCursor {
    uint64_t index = 0;
    int dim = 0;            // d = i + 1
    Rational q = 1;         // denominator bound, 2^j
    long magnitude = 0;     // numerators range over [-m*q, m*q]
    uint64_t payload = 0;

    static EnumerationCursor decode(uint64_t index) {
        EnumerationCursor c;
        c.index = index;
        uint64_t header = 0, payload = 0;
        int hbit = 0, pbit = 0;
        for (int pos = 0; pos < 64; ++pos) {
            uint64_t bit = (index >> pos) & 1u;
            if (pos % 4 == 0) header |= bit << hbit++;
            else payload |= bit << pbit++;
        }
        auto uncantor = [](uint64_t z, uint64_t& a, uint64_t& b) {
            uint64_t s = 0;
            while ((s + 1) * (s + 2) / 2 <= z) ++s;
            b = z - s * (s + 1) / 2;
            a = s - b;
        };
        uint64_t u = 0, l = 0, i = 0, j = 0;
        uncantor(header, u, l);
        uncantor(u, i, j);
        c.dim = static_cast<int>(i) + 1;
        c.q = Rational(uint64_t(1) << j);
        c.magnitude = static_cast<long>(l) + 1;
        c.payload = payload;
        return c;
    }
};

struct CandidatePair {
    uint64_t index = 0;
    int dim = 0;
    std::vector<RationalMatrix> a_eff, b_eff; // n*k each, question-major
    MeasurementFamily alice, bob;             // validated floating-point POVMs
    bool rounded = false;                     // any question repaired
};

namespace enum_detail {

// Base-(2mq+1) digit stream over the payload, least significant digit first;
// exhausted digits read as zero so every finite payload is a valid encoding.
struct DigitStream {
    uint64_t value;
    uint64_t base;
    Rational next_numerator(long mq) {
        uint64_t digit = value % base;
        value /= base;
        long signed_v = (digit <= uint64_t(mq)) ? long(digit) : long(digit) - long(base);
        return Rational(signed_v);
    }
};

inline RationalMatrix decode_matrix(DigitStream& ds, int d, long mq, const Rational& q) {
    RationalMatrix m(d);
    for (int i = 0; i < d; ++i) m.at(i, i) = GRational(ds.next_numerator(mq) / q);
    for (int i = 1; i < d; ++i)
        for (int j = 0; j < i; ++j) {
            GRational z(ds.next_numerator(mq) / q, ds.next_numerator(mq) / q);
            m.at(i, j) = z;
            m.at(j, i) = z.conj();
        }
    return m;
}

// True when the decoded question is already an exact POVM: rational
// completeness plus a nonnegative spectrum.
inline bool exact_povm(const std::vector<RationalMatrix>& effs) {
    int d = effs[0].dim();
    RationalMatrix sum(d);
    for (const auto& e : effs) sum = sum + e;
    if (!(sum == RationalMatrix::identity(d))) return false;
    for (const auto& e : effs)
        if (psd_cone_distance(HermMatrix(e.to_complex())) > 0.0) return false;
    return true;
}

// Repairs a non-POVM question: round in floating point, then re-rationalize
// dyadically with the last effect taken as I minus the others so rational
// completeness is exact again.
inline std::vector<RationalMatrix> repair_question(const std::vector<RationalMatrix>& effs) {
    std::vector<HermMatrix> xs;
    for (const auto& e : effs) xs.emplace_back(e.to_complex());
    RoundResult r = round_to_povm(xs);
    int d = effs[0].dim();
    int k = static_cast<int>(effs.size());
    std::vector<RationalMatrix> out;
    RationalMatrix acc(d);
    for (int a = 0; a < k - 1; ++a) {
        out.push_back(RationalMatrix::from_complex(r.povm.effects[a].mat()));
        acc = acc + out.back();
    }
    out.push_back(RationalMatrix::identity(d) - acc);
    return out;
}

} // namespace enum_detail

// Decodes one cursor index into a candidate pair for a game's (n, k) shape.
inline CandidatePair decode_candidate(const Game& g, uint64_t index) {
    using namespace enum_detail;
    EnumerationCursor c = EnumerationCursor::decode(index);
    long mq = c.magnitude * c.q.convert_to<long>();
    DigitStream ds{c.payload, uint64_t(2 * mq + 1)};

    CandidatePair out;
    out.index = index;
    out.dim = c.dim;
    auto decode_family = [&](std::vector<RationalMatrix>& effs) {
        for (int x = 0; x < g.n; ++x) {
            std::vector<RationalMatrix> question;
            for (int a = 0; a < g.k; ++a) question.push_back(decode_matrix(ds, c.dim, mq, c.q));
            if (!exact_povm(question)) {
                question = repair_question(question);
                out.rounded = true;
            }
            for (auto& e : question) effs.push_back(std::move(e));
        }
    };
    decode_family(out.a_eff);
    decode_family(out.b_eff);

    auto to_family = [&](const std::vector<RationalMatrix>& effs) {
        std::vector<Povm> povms;
        for (int x = 0; x < g.n; ++x) {
            std::vector<HermMatrix> question;
            for (int a = 0; a < g.k; ++a)
                question.emplace_back(effs[size_t(x) * g.k + a].to_complex());
            povms.emplace_back(c.dim, std::move(question));
        }
        return MeasurementFamily(g.n, g.k, std::move(povms));
    };
    out.alice = to_family(out.a_eff);
    out.bob = to_family(out.b_eff);
    return out;
}

inline std::vector<CandidatePair> enumerate_rational_pairs(const Game& g, uint64_t cursor,
                                                           uint64_t batch) {
    if (batch < 1) throw std::invalid_argument("enumerate_rational_pairs: batch >= 1");
    std::vector<CandidatePair> out;
    out.reserve(batch);
    for (uint64_t i = 0; i < batch; ++i) out.push_back(decode_candidate(g, cursor + i));
    return out;
}

} // namespace acg
