#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "wfl/field.hpp"

namespace wfl {

/// One of the three MPC servers. The ring order next(i) = (i mod 3) + 1
/// drives resharing and multiplication forwarding.
class PartyId {
public:
    explicit constexpr PartyId(int id) : id_(id) {}

    constexpr int id() const { return id_; }
    constexpr PartyId next() const { return PartyId{(id_ % 3) + 1}; }
    constexpr PartyId prev() const { return PartyId{((id_ + 1) % 3) + 1}; }
    constexpr std::size_t index() const { return static_cast<std::size_t>(id_ - 1); }

    constexpr bool operator==(const PartyId &o) const { return id_ == o.id_; }

    static constexpr std::array<PartyId, 3> all() {
        return {PartyId{1}, PartyId{2}, PartyId{3}};
    }

private:
    int id_; // in {1,2,3}
};

/// Additive 3-way split: components sum to the secret mod p.
struct SecretShares {
    std::array<FieldElement, 3> components;

    const FieldElement &for_party(PartyId p) const { return components[p.index()]; }
};

/// Per-party share vectors of a plaintext vector; all three have equal length.
struct ShareVector {
    std::array<std::vector<FieldElement>, 3> components;

    std::size_t dim() const { return components[0].size(); }
    const std::vector<FieldElement> &for_party(PartyId p) const {
        return components[p.index()];
    }
};

/// x1, x2 uniform; x3 = x - x1 - x2 mod p.
SecretShares split(const FieldElement &x, const FieldConfig &cfg, SeededRng &rng);

FieldElement reconstruct(const SecretShares &s);

ShareVector split_vector(const std::vector<FieldElement> &v,
                         const FieldConfig &cfg, SeededRng &rng);

std::vector<FieldElement> reconstruct_vector(const ShareVector &s);

} // namespace wfl
