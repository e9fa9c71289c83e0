// Acceptance battery: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mpc_runner.hpp"
#include "wfl/privacy.hpp"
#include "wfl/tcp_transport.hpp"
#include "wfl/wfl.hpp"

using namespace wfl;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void criterion(const std::string &name, double budget_s,
               const std::function<void()> &body) {
    const auto t0 = Clock::now();
    std::string error;
    try {
        body();
    } catch (const std::exception &e) {
        error = e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (error.empty() && budget_s > 0 && secs > budget_s)
        error = "time budget exceeded (" + std::to_string(budget_s) + " s)";
    if (error.empty()) {
        std::printf("[PASS] %s (%.2f s)\n", name.c_str(), secs);
    } else {
        std::printf("[FAIL] %s (%.2f s): %s\n", name.c_str(), secs, error.c_str());
        ++g_failures;
    }
    std::fflush(stdout);
}

[[noreturn]] void fail(const std::string &why) { throw std::runtime_error(why); }

void require(bool ok, const std::string &why) {
    if (!ok) fail(why);
}

// ---- shared helpers ----

/// Multiplies share vectors of x and y through one oracle on a fresh
/// simulator and returns the reconstructed products.
std::vector<u64> mul_batch(const std::vector<u64> &xs, const std::vector<u64> &ys,
                           const FieldConfig &cfg, OracleKind kind, u64 seed) {
    SeededRng srng(seed);
    std::vector<FieldElement> xf, yf;
    for (u64 x : xs) xf.emplace_back(x, cfg);
    for (u64 y : ys) yf.emplace_back(y, cfg);
    const auto sx = split_vector(xf, cfg, srng);
    const auto sy = split_vector(yf, cfg, srng);

    SimNetwork net(seed);
    auto body = [&](PartyId p, Mesh &io) {
        SeededRng rng(seed ^ (u64(p.id()) << 20));
        auto oracle = make_oracle(kind, rng);
        SessionCtx ctx(cfg);
        ctx.sid = session_from_seed(seed);
        return oracle->mul_vec(p, sx.for_party(p), sy.for_party(p), io, ctx);
    };
    std::array<std::vector<FieldElement>, 3> out;
    if (kind == OracleKind::beaver_dealer)
        out = test::run_parties_with_dealer<std::vector<FieldElement>>(net, cfg,
                                                                       seed + 1, body);
    else
        out = test::run_parties<std::vector<FieldElement>>(net, body);

    std::vector<u64> products;
    for (std::size_t j = 0; j < xs.size(); ++j)
        products.push_back(
            reconstruct(SecretShares{{out[0][j], out[1][j], out[2][j]}}).value());
    return products;
}

u64 mul_mod(u64 x, u64 y, u64 p) {
    return static_cast<u64>(static_cast<unsigned __int128>(x) * y % p);
}

std::vector<ClientInput> full_scale_clients(std::size_t K, std::size_t d, u64 seed) {
    SeededRng rng(seed);
    std::vector<ClientInput> clients;
    for (std::size_t k = 0; k < K; ++k) {
        ClientInput c;
        c.n = 600;
        for (std::size_t j = 0; j < d; ++j)
            c.w.push_back((double(rng.next_u64() % 20001) - 10000) / 10000.0);
        clients.push_back(std::move(c));
    }
    return clients;
}

/// All role endpoints of one round over loopback sockets on ephemeral ports.
struct TcpCluster {
    std::vector<std::unique_ptr<TcpMesh>> owned;
    RoleMeshes meshes{};

    TcpCluster() {
        auto listen = [&](Role r) {
            owned.push_back(std::make_unique<TcpMesh>(r, "127.0.0.1:0",
                                                      std::map<Role, std::string>{}));
            return owned.back().get();
        };
        std::array<TcpMesh *, 3> servers{};
        for (PartyId p : PartyId::all()) servers[p.index()] = listen(server_role(p));
        TcpMesh *agg = listen(Role::aggregator);
        TcpMesh *dealer = listen(Role::dealer);
        owned.push_back(std::make_unique<TcpMesh>(Role::client, "",
                                                  std::map<Role, std::string>{}));
        TcpMesh *client = owned.back().get();

        auto addr = [](TcpMesh *m) {
            return "127.0.0.1:" + std::to_string(m->port());
        };
        for (PartyId p : PartyId::all()) {
            TcpMesh *self = servers[p.index()];
            for (PartyId q : PartyId::all())
                if (q.id() != p.id()) self->add_peer(server_role(q), addr(servers[q.index()]));
            self->add_peer(Role::aggregator, addr(agg));
            self->add_peer(Role::dealer, addr(dealer));
            client->add_peer(server_role(p), addr(self));
            meshes.servers[p.index()] = self;
        }
        meshes.aggregator = agg;
        meshes.dealer = dealer;
        meshes.client = client;
    }
};

void check_round_accuracy(const RoundResult &res, const std::vector<ClientInput> &clients,
                          const std::string &what) {
    const auto clear = clear_weighted_average(clients);
    require(res.average_values.size() == clear.size(), what + ": dimension mismatch");
    for (std::size_t j = 0; j < clear.size(); ++j)
        if (std::abs(res.average_values[j] - clear[j]) > 0x1p-16)
            fail(what + ": coordinate " + std::to_string(j) + " off by " +
                 std::to_string(std::abs(res.average_values[j] - clear[j])));
}

// ---- criteria ----

void exhaustive_small_field() {
    const FieldConfig p31{31, 0};
    std::vector<u64> xs, ys;
    for (u64 x = 0; x < 31; ++x)
        for (u64 y = 0; y < 31; ++y) {
            xs.push_back(x);
            ys.push_back(y);
        }
    for (OracleKind kind : {OracleKind::zero_sum, OracleKind::beaver_dealer}) {
        // 31 protocol runs of 31 products each: every pair goes through the wire.
        for (u64 chunk = 0; chunk < 31; ++chunk) {
            std::vector<u64> cx(xs.begin() + chunk * 31, xs.begin() + (chunk + 1) * 31);
            std::vector<u64> cy(ys.begin() + chunk * 31, ys.begin() + (chunk + 1) * 31);
            const auto prod = mul_batch(cx, cy, p31, kind, 9000 + chunk);
            for (std::size_t j = 0; j < cx.size(); ++j)
                require(prod[j] == cx[j] * cy[j] % 31,
                        "p=31 mismatch at x=" + std::to_string(cx[j]) +
                            " y=" + std::to_string(cy[j]));
        }
    }
}

void large_field_random() {
    const FieldConfig cfg = FieldConfig::mersenne61();
    SeededRng rng(20250817);
    for (OracleKind kind : {OracleKind::zero_sum, OracleKind::beaver_dealer}) {
        std::vector<u64> xs, ys;
        for (int i = 0; i < 10000; ++i) {
            xs.push_back(rng.sample(cfg).value());
            ys.push_back(rng.sample(cfg).value());
        }
        const auto prod = mul_batch(xs, ys, cfg, kind, 7100 + int(kind));
        for (std::size_t j = 0; j < xs.size(); ++j)
            require(prod[j] == mul_mod(xs[j], ys[j], cfg.p),
                    "large-field mismatch at index " + std::to_string(j));
    }
}

void reshare_invariance() {
    const FieldConfig cfg = FieldConfig::mersenne61();
    constexpr std::size_t kBatch = 1000, kRounds = 100; // 10^5 invocations
    SimNetwork net(4);
    // Each party draws its own random input shares; the preserved quantity is
    // the per-slot component sum.
    auto out = test::run_parties<std::pair<std::vector<u64>, std::vector<u64>>>(
        net, [&](PartyId p, Mesh &io) {
            SeededRng input_rng(800 + u64(p.id()));
            SeededRng rng(900 + u64(p.id()));
            SessionCtx ctx(cfg);
            ctx.sid = session_from_seed(4);
            std::vector<u64> ins, outs;
            for (std::size_t r = 0; r < kRounds; ++r) {
                ctx.round = static_cast<std::uint32_t>(r);
                ctx.step = 0;
                std::vector<FieldElement> xs;
                for (std::size_t j = 0; j < kBatch; ++j)
                    xs.emplace_back(input_rng.sample(cfg).value(), cfg);
                const auto ys = reshare_vec(p, xs, io, ctx, rng);
                for (std::size_t j = 0; j < kBatch; ++j) {
                    ins.push_back(xs[j].value());
                    outs.push_back(ys[j].value());
                }
            }
            return std::make_pair(ins, outs);
        });
    for (std::size_t j = 0; j < kBatch * kRounds; ++j) {
        const auto sum = [&](const auto &sel) {
            unsigned __int128 s = 0;
            for (int i = 0; i < 3; ++i) s += sel(out[i])[j];
            return static_cast<u64>(s % cfg.p);
        };
        const u64 before = sum([](const auto &pr) -> const std::vector<u64> & {
            return pr.first;
        });
        const u64 after = sum([](const auto &pr) -> const std::vector<u64> & {
            return pr.second;
        });
        if (before != after)
            fail("share sum changed at invocation " + std::to_string(j));
    }
}

void end_to_end_full_scale() {
    const FieldConfig cfg = FieldConfig::mersenne61();
    const auto clients = full_scale_clients(100, 10, 424242);
    for (OracleKind kind : {OracleKind::zero_sum, OracleKind::beaver_dealer}) {
        const auto sim = run_round(clients, cfg, kind, 31337);
        check_round_accuracy(sim, clients, "simulator");
        TcpCluster cluster;
        const auto tcp = run_round_with(cluster.meshes, clients, cfg, kind, 31337);
        check_round_accuracy(tcp, clients, "socket");
        require(tcp == sim, "socket result diverged from simulator");
    }
}

void cross_oracle_differential() {
    const FieldConfig cfg = FieldConfig::mersenne61();
    SeededRng rng(5150);
    std::vector<u64> xs, ys;
    for (int i = 0; i < 1000; ++i) {
        xs.push_back(rng.sample(cfg).value());
        ys.push_back(rng.sample(cfg).value());
    }
    // Identical shared inputs: mul_batch derives the split from the seed.
    const auto a = mul_batch(xs, ys, cfg, OracleKind::zero_sum, 606);
    const auto b = mul_batch(xs, ys, cfg, OracleKind::beaver_dealer, 606);
    for (std::size_t j = 0; j < xs.size(); ++j) {
        require(a[j] == b[j], "oracles disagree at index " + std::to_string(j));
        require(a[j] == mul_mod(xs[j], ys[j], cfg.p),
                "both oracles wrong at index " + std::to_string(j));
    }
}

void privacy_battery() {
    const FieldConfig p31{31, 0};
    const auto share = test_share_uniformity(17, 100000, p31, 1, 42);
    require(share.degrees_of_freedom == 30, "share test df");
    require(share.statistic < 59.70 && share.pass,
            "share uniformity failed: chi2=" + std::to_string(share.statistic));

    const auto pad = test_reshare_pad(5, 100000, 11);
    require(pad.degrees_of_freedom == 24, "pad test df");
    require(pad.statistic < 51.18 && pad.pass,
            "reshare pad failed: chi2=" + std::to_string(pad.statistic));

    Splitter constant = [](const FieldElement &x, const FieldConfig &c, SeededRng &) {
        return SecretShares{{FieldElement(1, c), FieldElement(2, c),
                             x - FieldElement(3, c)}};
    };
    require(!test_share_uniformity(17, 100000, p31, 1, 42, constant).pass,
            "negative control: constant splitter passed");

    ProtocolHooks broken;
    broken.skip_reshare = true;
    require(!test_reshare_pad(5, 100000, 11, broken).pass,
            "negative control: disabled reshare passed");
}

void transport_equivalence() {
    const FieldConfig cfg = FieldConfig::mersenne61();
    SeededRng rng(888);
    for (int i = 0; i < 20; ++i) {
        const std::size_t K = 1 + rng.next_u64() % 5;
        const std::size_t d = 1 + rng.next_u64() % 4;
        std::vector<ClientInput> clients;
        for (std::size_t k = 0; k < K; ++k) {
            ClientInput c;
            c.n = 1 + rng.next_u64() % 100;
            for (std::size_t j = 0; j < d; ++j)
                c.w.push_back((double(rng.next_u64() % 4001) - 2000) / 1000.0);
            clients.push_back(std::move(c));
        }
        const OracleKind kind =
            i % 2 ? OracleKind::beaver_dealer : OracleKind::zero_sum;
        const u64 seed = 5000 + u64(i);
        const auto sim = run_round(clients, cfg, kind, seed);
        TcpCluster cluster;
        const auto tcp = run_round_with(cluster.meshes, clients, cfg, kind, seed);
        require(tcp.to_json() == sim.to_json(),
                "instance " + std::to_string(i) + ": " + tcp.to_json() +
                    " != " + sim.to_json());
    }
}

void frame_codec() {
    SeededRng rng(1234);
    for (int i = 0; i < 10000; ++i) {
        Frame f;
        for (auto &b : f.session) b = static_cast<std::uint8_t>(rng.next_u64());
        f.round = static_cast<std::uint32_t>(rng.next_u64());
        f.step = static_cast<std::uint16_t>(rng.next_u64());
        f.type = static_cast<std::uint8_t>(rng.next_u64());
        f.payload.resize(rng.next_u64() % 256);
        rng.fill_bytes(f.payload.data(), f.payload.size());
        const auto bytes = encode_frame(f);
        if (!(decode_frame(bytes) == f))
            fail("roundtrip mismatch at iteration " + std::to_string(i));
    }
    // Fuzz: random byte strings and mutated valid encodings must decode
    // cleanly or throw DecodeError, never crash.
    std::size_t decoded = 0, rejected = 0;
    for (int i = 0; i < 100000; ++i) {
        std::vector<std::uint8_t> bytes(rng.next_u64() % 64);
        rng.fill_bytes(bytes.data(), bytes.size());
        if (i % 4 == 0) {
            Frame f;
            f.payload = {1, 2, 3};
            bytes = encode_frame(f);
            if (!bytes.empty()) bytes[rng.next_u64() % bytes.size()] ^=
                static_cast<std::uint8_t>(1 + rng.next_u64() % 255);
        }
        try {
            (void)decode_frame(bytes);
            ++decoded;
        } catch (const DecodeError &) {
            ++rejected;
        }
    }
    require(rejected > 0, "fuzzing never produced a DecodeError");
    (void)decoded;
}

} // namespace

int main() {
    criterion("exhaustive multiplication correctness (p=31, both oracles)", 10,
              exhaustive_small_field);
    criterion("large-field correctness (p=2^61-1, 10^4 pairs, both oracles)", 60,
              large_field_random);
    criterion("reshare invariance (10^5 invocations)", 0, reshare_invariance);
    criterion("end-to-end weighted aggregation at full scale (K=100, d=10, n_k=600)", 30,
              end_to_end_full_scale);
    criterion("cross-oracle differential (10^3 shared inputs)", 0,
              cross_oracle_differential);
    criterion("privacy battery with negative controls", 0, privacy_battery);
    criterion("transport equivalence (20 instances)", 0, transport_equivalence);
    criterion("frame codec roundtrip and fuzzing", 0, frame_codec);
    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
