#include "wfl/field.hpp"

#include <cmath>

namespace wfl {

namespace {

u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

u64 powmod(u64 base, u64 exp, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

} // namespace

bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                  29ull, 31ull, 37ull}) {
        if (n == q) return true;
        if (n % q == 0) return false;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // This witness set is deterministic for all n < 2^64.
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                  29ull, 31ull, 37ull}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

FieldElement fp_encode(double v, const FieldConfig &cfg) {
    const double scaled = v * static_cast<double>(u64(1) << cfg.frac_bits);
    if (!std::isfinite(scaled) || std::abs(scaled) >= 0x1p62)
        throw OutOfRange("fixed-point value out of range");
    const std::int64_t q = std::llround(scaled);
    const u64 mag = q >= 0 ? static_cast<u64>(q) : static_cast<u64>(-q);
    if (2 * static_cast<u128>(mag) >= cfg.p)
        throw OutOfRange("fixed-point magnitude >= p/2");
    return FieldElement::from_signed(q, cfg);
}

std::int64_t fp_signed(const FieldElement &e, const FieldConfig &cfg) {
    const u64 v = e.value();
    if (v < (cfg.p + 1) / 2) return static_cast<std::int64_t>(v);
    return -static_cast<std::int64_t>(cfg.p - v);
}

double fp_decode(const FieldElement &e, const FieldConfig &cfg) {
    return static_cast<double>(fp_signed(e, cfg)) /
           static_cast<double>(u64(1) << cfg.frac_bits);
}

} // namespace wfl
