#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "wfl/errors.hpp"

namespace wfl {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

/// Deterministic Miller-Rabin, exact for every n < 2^64.
bool is_prime_u64(u64 n);

/// Prime modulus plus fixed-point scaling. All secrets, shares and protocol
/// messages live in Z_p for the session's config.
struct FieldConfig {
    u64 p;
    int frac_bits;

    FieldConfig(u64 prime, int frac) : p(prime), frac_bits(frac) {
        if (p < 2 || p >= (u64(1) << 61))
            throw OutOfRange("modulus must lie in [2, 2^61)");
        if (!is_prime_u64(p))
            throw OutOfRange("modulus is not prime");
        if (frac < 0 || frac > 30)
            throw OutOfRange("frac_bits must lie in [0, 30]");
    }

    static FieldConfig mersenne61(int frac = 16) {
        return FieldConfig{(u64(1) << 61) - 1, frac};
    }

    bool operator==(const FieldConfig &o) const {
        return p == o.p && frac_bits == o.frac_bits;
    }
};

/// A residue mod p, bound to its modulus. Mixing moduli throws.
class FieldElement {
public:
    FieldElement() : v_(0), p_(0) {}
    FieldElement(u64 v, const FieldConfig &cfg) : v_(v % cfg.p), p_(cfg.p) {}

    static FieldElement from_signed(std::int64_t v, const FieldConfig &cfg) {
        if (v >= 0) return FieldElement(static_cast<u64>(v), cfg);
        u64 m = static_cast<u64>(-v) % cfg.p;
        return FieldElement(cfg.p - m, cfg); // m > 0 here since v < 0
    }

    u64 value() const { return v_; }
    u64 modulus() const { return p_; }

    FieldElement operator+(const FieldElement &o) const {
        check_same(o);
        u64 s = v_ + o.v_; // p < 2^61, no overflow
        if (s >= p_) s -= p_;
        return raw(s, p_);
    }
    FieldElement operator-(const FieldElement &o) const {
        check_same(o);
        u64 s = v_ >= o.v_ ? v_ - o.v_ : v_ + p_ - o.v_;
        return raw(s, p_);
    }
    FieldElement operator*(const FieldElement &o) const {
        check_same(o);
        u128 prod = static_cast<u128>(v_) * o.v_;
        return raw(static_cast<u64>(prod % p_), p_);
    }

    bool operator==(const FieldElement &o) const {
        return v_ == o.v_ && p_ == o.p_;
    }
    bool operator!=(const FieldElement &o) const { return !(*this == o); }

    /// Rebind a raw residue (already reduced). Internal use by codecs.
    static FieldElement raw(u64 v, u64 p) {
        FieldElement e;
        e.v_ = v;
        e.p_ = p;
        return e;
    }

private:
    void check_same(const FieldElement &o) const {
        if (p_ != o.p_)
            throw ConfigMismatch("field elements bound to different moduli");
    }

    u64 v_;
    u64 p_;
};

/// Deterministic RNG. Single-owner: never share one instance across threads.
class SeededRng {
public:
    explicit SeededRng(u64 seed) : eng_(seed) {}

    u64 next_u64() { return eng_(); }

    /// Uniform residue in [0, p) by rejection sampling (no modulo bias).
    FieldElement sample(const FieldConfig &cfg) {
        const u64 p = cfg.p;
        const u64 rem = (0 - p) % p; // 2^64 mod p
        u64 draw;
        do {
            draw = eng_();
        } while (rem != 0 && draw > u64(0) - rem - 1);
        return FieldElement::raw(draw % p, p);
    }

    void fill_bytes(std::uint8_t *dst, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i)
            dst[i] = static_cast<std::uint8_t>(eng_() >> 32);
    }

private:
    std::mt19937_64 eng_;
};

/// round(v * 2^f) mod p; negatives occupy the upper half of the field.
FieldElement fp_encode(double v, const FieldConfig &cfg);

/// Inverse of fp_encode up to quantization <= 2^-(f+1).
double fp_decode(const FieldElement &e, const FieldConfig &cfg);

/// Signed integer behind a fixed-point residue (numerator over 2^f).
std::int64_t fp_signed(const FieldElement &e, const FieldConfig &cfg);

} // namespace wfl
