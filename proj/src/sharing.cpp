#include "wfl/sharing.hpp"

namespace wfl {

SecretShares split(const FieldElement &x, const FieldConfig &cfg, SeededRng &rng) {
    if (x.modulus() != cfg.p)
        throw ConfigMismatch("secret bound to a different modulus");
    FieldElement x1 = rng.sample(cfg);
    FieldElement x2 = rng.sample(cfg);
    FieldElement x3 = x - x1 - x2;
    return SecretShares{{x1, x2, x3}};
}

FieldElement reconstruct(const SecretShares &s) {
    for (const auto &c : s.components)
        if (c.modulus() == 0)
            throw MissingComponent("unbound share component");
    return s.components[0] + s.components[1] + s.components[2];
}

ShareVector split_vector(const std::vector<FieldElement> &v,
                         const FieldConfig &cfg, SeededRng &rng) {
    if (v.empty()) throw EmptyVector("cannot split an empty vector");
    ShareVector out;
    for (auto &comp : out.components) comp.reserve(v.size());
    for (const auto &x : v) {
        SecretShares s = split(x, cfg, rng);
        for (int i = 0; i < 3; ++i) out.components[i].push_back(s.components[i]);
    }
    return out;
}

std::vector<FieldElement> reconstruct_vector(const ShareVector &s) {
    const std::size_t d = s.dim();
    if (s.components[1].size() != d || s.components[2].size() != d)
        throw LengthMismatch("share vector components differ in length");
    std::vector<FieldElement> out;
    out.reserve(d);
    for (std::size_t j = 0; j < d; ++j)
        out.push_back(reconstruct(SecretShares{
            {s.components[0][j], s.components[1][j], s.components[2][j]}}));
    return out;
}

} // namespace wfl
