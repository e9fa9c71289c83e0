#pragma once

#include <array>
#include <map>
#include <memory>
#include <vector>

#include "wfl/transport.hpp"

namespace wfl {

inline constexpr std::chrono::milliseconds kDefaultTimeout{10000};

/// Shared per-party cursor through one protocol session. Every party advances
/// round/step through identical code paths, so frames line up without any
/// scheduling coordination.
struct SessionCtx {
    SessionId sid{};
    FieldConfig cfg;
    std::uint32_t round = 0;
    std::uint16_t step = 0;
    std::chrono::milliseconds timeout = kDefaultTimeout;

    explicit SessionCtx(const FieldConfig &c) : cfg(c) {}

    Frame make(std::uint8_t type, std::vector<std::uint8_t> payload) const {
        Frame f;
        f.session = sid;
        f.round = round;
        f.step = step;
        f.type = type;
        f.payload = std::move(payload);
        return f;
    }
};

/// Test-only switches; production paths leave these defaulted.
struct ProtocolHooks {
    bool zero_reshare_randomness = false; // r_i = 0: x_i' == x_i
    bool skip_reshare = false;            // forward raw shares (breaks the pad)
};

/// Receives the next frame for (from, round, step, type) and checks the
/// session id, so a stray frame from another session surfaces as an error
/// instead of silently matching.
Frame recv_step(Mesh &io, const SessionCtx &ctx, Role from, std::uint8_t type);

/// One resharing pass: send fresh r_i to next(i), receive r_{i-1}, return
/// x_i + (r_i - r_{i-1}). Consumes one step. Sum over parties is preserved.
FieldElement reshare(PartyId party, const FieldElement &x_i, Mesh &io,
                     SessionCtx &ctx, SeededRng &rng,
                     const ProtocolHooks &hooks = {});

/// Batched resharing: one RESHARE_R frame per ring edge for the whole vector.
std::vector<FieldElement> reshare_vec(PartyId party,
                                      const std::vector<FieldElement> &xs,
                                      Mesh &io, SessionCtx &ctx, SeededRng &rng,
                                      const ProtocolHooks &hooks = {});

/// Share of x+y from shares of x and y; no communication.
FieldElement local_add(const FieldElement &a_i, const FieldElement &b_i);

/// Shares of x, y in; shares of x*y out. Both implementations satisfy the
/// same contract and are interchangeable behind this seam.
class MultiplicationOracle {
public:
    virtual ~MultiplicationOracle() = default;

    /// Elementwise product of two equally long share vectors, batched into
    /// a constant number of frames per peer regardless of dimension.
    virtual std::vector<FieldElement>
    mul_vec(PartyId party, const std::vector<FieldElement> &x_i,
            const std::vector<FieldElement> &y_i, Mesh &io, SessionCtx &ctx) = 0;

    virtual const char *name() const = 0;

    FieldElement mul(PartyId party, const FieldElement &x_i,
                     const FieldElement &y_i, Mesh &io, SessionCtx &ctx) {
        return mul_vec(party, {x_i}, {y_i}, io, ctx).front();
    }
};

/// Three-party zero-sum multiplication: reshare x and y with independent
/// randomness, forward (x_i', y_i') around the ring, combine own and
/// predecessor pairs. Two ring rounds per call.
class ZeroSumOracle : public MultiplicationOracle {
public:
    explicit ZeroSumOracle(SeededRng &rng, ProtocolHooks hooks = {})
        : rng_(&rng), hooks_(hooks) {}

    std::vector<FieldElement> mul_vec(PartyId party,
                                      const std::vector<FieldElement> &x_i,
                                      const std::vector<FieldElement> &y_i,
                                      Mesh &io, SessionCtx &ctx) override;
    const char *name() const override { return "zeroSum"; }

private:
    SeededRng *rng_;
    ProtocolHooks hooks_;
};

/// Beaver-triple multiplication against a trusted dealer: fetch a fresh
/// triple per coordinate, open d = x-a and e = y-b, combine locally.
class BeaverOracle : public MultiplicationOracle {
public:
    std::vector<FieldElement> mul_vec(PartyId party,
                                      const std::vector<FieldElement> &x_i,
                                      const std::vector<FieldElement> &y_i,
                                      Mesh &io, SessionCtx &ctx) override;
    const char *name() const override { return "beaverDealer"; }
};

enum class OracleKind { zero_sum, beaver_dealer };

std::unique_ptr<MultiplicationOracle> make_oracle(OracleKind kind, SeededRng &rng,
                                                  ProtocolHooks hooks = {});

/// Server side of an opening: send this party's shares to the receiver.
/// Consumes one step.
void open_send(PartyId party, const std::vector<FieldElement> &shares, Mesh &io,
               SessionCtx &ctx, Role receiver);

/// Receiver side: collect all three components and reconstruct. The round is
/// read from the first arriving frame so the receiver need not track the
/// senders' round counter.
std::vector<FieldElement> open_recv(Mesh &io, SessionCtx &ctx);

/// Shares of n * w_j for every coordinate j of w. One oracle call, batched.
std::vector<FieldElement> scalar_vector_mul(PartyId party, const FieldElement &n_i,
                                            const std::vector<FieldElement> &w_i,
                                            Mesh &io, SessionCtx &ctx,
                                            MultiplicationOracle &oracle);

/// Trusted dealer for Beaver triples: serves one batch per (session, round,
/// step), hands each party its component exactly once.
class BeaverDealer {
public:
    /// degenerate_zero is a test hook: a = b = c = 0 so the combine formula
    /// collapses to the direct product.
    BeaverDealer(const FieldConfig &cfg, u64 seed, bool degenerate_zero = false)
        : cfg_(cfg), rng_(seed), degenerate_zero_(degenerate_zero) {}

    /// Serve one request; throws TripleReuse if a party re-requests a batch.
    void serve_one(Mesh &io, std::chrono::milliseconds timeout);

    /// Serve until the mesh closes.
    void run(Mesh &io);

private:
    struct Key {
        SessionId sid;
        std::uint32_t round;
        std::uint16_t step;
        auto operator<=>(const Key &) const = default;
    };

    FieldConfig cfg_;
    SeededRng rng_;
    bool degenerate_zero_ = false;
    std::map<Key, std::array<std::vector<FieldElement>, 3>> batches_;
    std::map<Key, int> served_mask_;
};

} // namespace wfl
