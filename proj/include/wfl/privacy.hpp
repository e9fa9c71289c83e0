#pragma once

#include <functional>

#include "wfl/wfl.hpp"

namespace wfl {

/// Chi-square goodness-of-fit outcome against the uniform distribution.
struct UniformityReport {
    std::string what;
    std::vector<u64> cell_counts;
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double critical_value = 0.0;
    bool pass = false;

    std::string to_json() const;
};

/// Upper critical value of the chi-square distribution at alpha = 0.001.
double chi_square_critical(int df);

/// Chi-square statistic for counts against a uniform expectation.
double chi_square_statistic(const std::vector<u64> &counts, double expected);

UniformityReport make_uniformity_report(std::string what, std::vector<u64> counts);

using Splitter = std::function<SecretShares(const FieldElement &, const FieldConfig &,
                                            SeededRng &)>;

/// Empirical distribution of one share component over repeated splits of a
/// fixed secret. df = p - 1. The splitter defaults to the real one; tests
/// inject broken splitters as negative controls.
UniformityReport test_share_uniformity(u64 secret, std::size_t trials,
                                       const FieldConfig &cfg, int component,
                                       u64 seed, Splitter splitter = nullptr);

/// Joint distribution of an ordered share pair (components i, j) on Z_p^2.
UniformityReport test_share_pair_uniformity(u64 secret, std::size_t trials,
                                            const FieldConfig &cfg, int comp_a,
                                            int comp_b, u64 seed);

/// Joint distribution of the forwarded pair (x1', y1') that server 2 receives
/// during zero-sum multiplication, conditioned on fixed inputs. df = p^2 - 1.
UniformityReport test_reshare_pad(u64 p, std::size_t trials, u64 seed,
                                  ProtocolHooks hooks = {});

/// Joint distribution of two consecutive multiplications' forwarded pairs on
/// Z_p^4 (pad independence across rounds). df = p^4 - 1.
UniformityReport test_reshare_pad_two_rounds(u64 p, std::size_t trials, u64 seed,
                                             ProtocolHooks hooks = {});

/// Runs one round under per-server taps; taps never change behavior.
std::pair<RoundResult, std::array<PartyView, 3>>
capture_views(const std::vector<ClientInput> &clients, const FieldConfig &cfg,
              OracleKind oracle, u64 seed);

/// All field elements a view exposes, in a deterministic order.
std::vector<FieldElement> view_elements(const PartyView &view, const FieldConfig &cfg);

/// Brute-force non-reconstructibility: over repeated executions (one view per
/// seed, same party and inputs), no fixed signed combination of up to three
/// view elements may hit a secret more often than chance allows. The
/// threshold is chance + 6 sigma to absorb the multiplicity of tested
/// combinations.
bool assert_non_reconstructible(const std::vector<PartyView> &views,
                                const std::vector<u64> &secrets,
                                const FieldConfig &cfg);

} // namespace wfl
