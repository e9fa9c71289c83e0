#pragma once

#include <string>
#include <vector>

#include "wfl/protocol.hpp"
#include "wfl/sim_transport.hpp"

namespace wfl {

/// One client's plaintext round input: sample count and feature vector.
struct ClientInput {
    u64 n;
    std::vector<double> w;
};

/// Client-side split of one contribution, ready for per-server dispatch:
/// server i receives exactly component i of every share.
struct ClientContribution {
    std::string client_id;
    SecretShares weight;   // shares of n_k (plain integer, not fixed-point)
    ShareVector features;  // shares of fixed-point encoded w_k
};

ClientContribution client_contribute(const std::string &client_id, u64 n_k,
                                     const std::vector<double> &w_k,
                                     const FieldConfig &cfg, SeededRng &rng);

/// Emits the three CONTRIB frames (round 0, step 0) over the client's mesh.
void send_contribution(Mesh &io, const SessionId &sid,
                       const ClientContribution &contrib);

/// What one server holds for one client after its CONTRIB frame.
struct ServerContribution {
    std::string client_id;
    FieldElement weight;
    std::vector<FieldElement> features;
};

/// Collects K CONTRIB frames and returns them sorted by client id, so all
/// three servers process clients in the same order.
std::vector<ServerContribution> collect_contributions(Mesh &io, SessionCtx &ctx,
                                                      std::size_t expected);

/// Cross-checks the sorted client-id list with both peer servers.
void verify_client_set(PartyId party, const std::vector<ServerContribution> &contribs,
                       Mesh &io, SessionCtx &ctx);

/// Local share of n = sum of n_k. Communication-free.
FieldElement aggregate_weights(const std::vector<ServerContribution> &contribs,
                               const FieldConfig &cfg);

/// Local share of sum of n_k * w_k: one batched secure multiplication per
/// client, then local accumulation. Advances ctx.round per client.
std::vector<FieldElement>
aggregate_weighted(PartyId party, const std::vector<ServerContribution> &contribs,
                   Mesh &io, SessionCtx &ctx, MultiplicationOracle &oracle);

/// Aggregator-side plaintext result of one round.
struct RoundResult {
    u64 n = 0;
    std::vector<std::string> average; // exact decimal strings
    std::vector<double> average_values;
    std::uint32_t round = 0;
    std::string oracle;

    std::string to_json() const;
    bool operator==(const RoundResult &) const = default;
};

/// Full server role for one round: contributions, set check, aggregation,
/// final opens toward the aggregator.
void server_round(PartyId party, Mesh &io, SessionCtx ctx, std::size_t expected,
                  MultiplicationOracle &oracle);

/// Aggregator role: receive the two final openings, decode and divide in the
/// clear. Servers learn nothing beyond the protocol messages.
RoundResult aggregator_round(Mesh &io, SessionCtx ctx, std::uint32_t fl_round,
                             const std::string &oracle_name);

/// Meshes for every role of one round; dealer may be null for zero-sum runs.
struct RoleMeshes {
    std::array<Mesh *, 3> servers;
    Mesh *aggregator;
    Mesh *dealer = nullptr;
    Mesh *client = nullptr;
};

/// Orchestrates contribute -> dispatch -> aggregate -> finalize over the
/// given meshes. Deterministic for a fixed seed on the simulator.
RoundResult run_round_with(const RoleMeshes &meshes,
                           const std::vector<ClientInput> &clients,
                           const FieldConfig &cfg, OracleKind oracle, u64 seed,
                           std::uint32_t fl_round = 1,
                           std::chrono::milliseconds timeout = kDefaultTimeout);

/// Convenience wrapper running one round on a fresh deterministic simulator.
RoundResult run_round(const std::vector<ClientInput> &clients,
                      const FieldConfig &cfg, OracleKind oracle, u64 seed);

/// Session id derived deterministically from a seed.
SessionId session_from_seed(u64 seed);

/// Rejects inputs whose aggregate could wrap around the field. Throws
/// OutOfRange / NonPositiveWeight / EmptyVector / LengthMismatch.
void validate_round_inputs(const std::vector<ClientInput> &clients,
                           const FieldConfig &cfg);

/// Clear-text weighted average: the reference the MPC result must match.
std::vector<double> clear_weighted_average(const std::vector<ClientInput> &clients);

} // namespace wfl
