#include "doctest.h"

#include "wfl/sharing.hpp"

using namespace wfl;

namespace {
const FieldConfig kP31{31, 0};
}

TEST_CASE("split and reconstruct") {
    SeededRng rng(42);
    SUBCASE("zero secret") {
        const auto s = split(FieldElement(0, kP31), kP31, rng);
        CHECK(reconstruct(s) == FieldElement(0, kP31));
    }
    SUBCASE("many seeds, fixed secret") {
        for (u64 seed = 0; seed < 1000; ++seed) {
            SeededRng r(seed);
            const auto s = split(FieldElement(17, kP31), kP31, r);
            CHECK(reconstruct(s) == FieldElement(17, kP31));
        }
    }
    SUBCASE("exhaustive over Z_31") {
        for (u64 x = 0; x < 31; ++x) {
            const auto s = split(FieldElement(x, kP31), kP31, rng);
            CHECK(reconstruct(s).value() == x);
        }
    }
    SUBCASE("identical seed gives identical shares") {
        SeededRng a(7), b(7);
        const auto sa = split(FieldElement(5, kP31), kP31, a);
        const auto sb = split(FieldElement(5, kP31), kP31, b);
        for (int i = 0; i < 3; ++i) CHECK(sa.components[i] == sb.components[i]);
    }
}

TEST_CASE("reconstruct sums components") {
    const SecretShares s{{FieldElement(1, kP31), FieldElement(2, kP31),
                          FieldElement(3, kP31)}};
    CHECK(reconstruct(s).value() == 6);
    const SecretShares t{{FieldElement(30, kP31), FieldElement(30, kP31),
                          FieldElement(30, kP31)}};
    CHECK(reconstruct(t).value() == 28);
    CHECK_THROWS_AS(reconstruct(SecretShares{{FieldElement(1, kP31), FieldElement{},
                                              FieldElement(3, kP31)}}),
                    MissingComponent);
    const FieldConfig other{29, 0};
    CHECK_THROWS_AS(reconstruct(SecretShares{{FieldElement(1, kP31),
                                              FieldElement(2, other),
                                              FieldElement(3, kP31)}}),
                    ConfigMismatch);
}

TEST_CASE("share marginals are uniform") {
    const std::size_t trials = 100000;
    for (int comp = 0; comp < 3; ++comp) {
        SeededRng rng(1000 + comp);
        std::vector<u64> counts(31, 0);
        for (std::size_t t = 0; t < trials; ++t)
            counts[split(FieldElement(17, kP31), kP31, rng).components[comp].value()]++;
        double stat = 0, expected = double(trials) / 31.0;
        for (u64 c : counts) stat += (c - expected) * (c - expected) / expected;
        CHECK(stat < 59.70); // df=30, alpha=0.001
    }
}

TEST_CASE("share pairs are uniform on Z_p^2 at p=5") {
    const FieldConfig p5{5, 0};
    const std::size_t trials = 100000;
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto &pr : pairs) {
        SeededRng rng(2000 + pr[0] * 3 + pr[1]);
        std::vector<u64> counts(25, 0);
        for (std::size_t t = 0; t < trials; ++t) {
            const auto s = split(FieldElement(3, p5), p5, rng);
            counts[s.components[pr[0]].value() * 5 + s.components[pr[1]].value()]++;
        }
        double stat = 0, expected = double(trials) / 25.0;
        for (u64 c : counts) stat += (c - expected) * (c - expected) / expected;
        CHECK(stat < 51.18); // df=24, alpha=0.001
    }
}

TEST_CASE("vector splitting") {
    SeededRng rng(11);
    SUBCASE("d=1 reduces to split") {
        const auto sv = split_vector({FieldElement(9, kP31)}, kP31, rng);
        CHECK(sv.dim() == 1);
        CHECK(reconstruct_vector(sv)[0].value() == 9);
    }
    SUBCASE("elementwise reconstruction") {
        std::vector<FieldElement> v;
        for (u64 j = 0; j < 10; ++j) v.emplace_back(j * 3, kP31);
        const auto sv = split_vector(v, kP31, rng);
        const auto back = reconstruct_vector(sv);
        for (u64 j = 0; j < 10; ++j) CHECK(back[j] == v[j]);
    }
    SUBCASE("empty vector rejected") {
        CHECK_THROWS_AS(split_vector({}, kP31, rng), EmptyVector);
    }
    SUBCASE("identical coordinates get distinct randomness") {
        // Two identical plaintext coordinates share their first component with
        // probability 1/p; over many trials some must differ.
        std::size_t diff = 0;
        const std::size_t trials = 10000;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto sv = split_vector({FieldElement(7, kP31), FieldElement(7, kP31)},
                                         kP31, rng);
            if (sv.components[0][0] != sv.components[0][1] ||
                sv.components[1][0] != sv.components[1][1])
                ++diff;
        }
        // P(identical share pair) = 1/p^2 per trial; expect ~10 collisions.
        CHECK(diff > trials * 95 / 100);
    }
}

TEST_CASE("party ring order") {
    CHECK(PartyId{1}.next() == PartyId{2});
    CHECK(PartyId{2}.next() == PartyId{3});
    CHECK(PartyId{3}.next() == PartyId{1});
    CHECK(PartyId{1}.prev() == PartyId{3});
    CHECK(PartyId{2}.prev() == PartyId{1});
    CHECK(PartyId{3}.prev() == PartyId{2});
}
