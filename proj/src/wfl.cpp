#include "wfl/wfl.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <sstream>
#include <thread>

namespace wfl {

ClientContribution client_contribute(const std::string &client_id, u64 n_k,
                                     const std::vector<double> &w_k,
                                     const FieldConfig &cfg, SeededRng &rng) {
    if (n_k == 0) throw NonPositiveWeight("client weight must be >= 1");
    if (w_k.empty()) throw EmptyVector("client feature vector is empty");
    if (n_k >= (cfg.p + 1) / 2) throw OutOfRange("client weight >= p/2");
    std::vector<FieldElement> enc;
    enc.reserve(w_k.size());
    for (double v : w_k) enc.push_back(fp_encode(v, cfg));
    ClientContribution out;
    out.client_id = client_id;
    out.weight = split(FieldElement(n_k, cfg), cfg, rng);
    out.features = split_vector(enc, cfg, rng);
    return out;
}

void send_contribution(Mesh &io, const SessionId &sid,
                       const ClientContribution &contrib) {
    for (PartyId party : PartyId::all()) {
        std::vector<std::uint8_t> payload;
        put_u16(payload, static_cast<std::uint16_t>(contrib.client_id.size()));
        payload.insert(payload.end(), contrib.client_id.begin(),
                       contrib.client_id.end());
        put_fe(payload, contrib.weight.for_party(party));
        const auto &feat = contrib.features.for_party(party);
        put_u32(payload, static_cast<std::uint32_t>(feat.size()));
        for (const auto &e : feat) put_fe(payload, e);
        Frame f;
        f.session = sid;
        f.round = 0;
        f.step = 0;
        f.type = msg::CONTRIB;
        f.payload = std::move(payload);
        io.send(server_role(party), std::move(f));
    }
}

std::vector<ServerContribution> collect_contributions(Mesh &io, SessionCtx &ctx,
                                                      std::size_t expected) {
    std::vector<ServerContribution> out;
    out.reserve(expected);
    for (std::size_t k = 0; k < expected; ++k) {
        const Frame f = recv_step(io, ctx, Role::client, msg::CONTRIB);
        PayloadReader r(f.payload);
        ServerContribution c;
        c.client_id = r.str(r.u16());
        c.weight = r.fe(ctx.cfg);
        const std::uint32_t d = r.u32();
        c.features.reserve(d);
        for (std::uint32_t j = 0; j < d; ++j) c.features.push_back(r.fe(ctx.cfg));
        r.expect_end();
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(),
              [](const ServerContribution &a, const ServerContribution &b) {
                  return a.client_id < b.client_id;
              });
    for (std::size_t k = 0; k + 1 < out.size(); ++k) {
        if (out[k].client_id == out[k + 1].client_id)
            throw ClientSetMismatch("duplicate client id " + out[k].client_id);
        if (out[k].features.size() != out[k + 1].features.size())
            throw LengthMismatch("clients disagree on feature dimension");
    }
    ctx.step++;
    return out;
}

void verify_client_set(PartyId party, const std::vector<ServerContribution> &contribs,
                       Mesh &io, SessionCtx &ctx) {
    std::vector<std::uint8_t> payload;
    put_u32(payload, static_cast<std::uint32_t>(contribs.size()));
    for (const auto &c : contribs) {
        put_u16(payload, static_cast<std::uint16_t>(c.client_id.size()));
        payload.insert(payload.end(), c.client_id.begin(), c.client_id.end());
    }
    for (PartyId other : {party.next(), party.prev()})
        io.send(server_role(other), ctx.make(msg::CLIENT_SET, payload));
    for (PartyId other : {party.next(), party.prev()}) {
        const Frame f = recv_step(io, ctx, server_role(other), msg::CLIENT_SET);
        if (f.payload != payload)
            throw ClientSetMismatch("servers disagree on the contribution set");
    }
    ctx.step++;
}

FieldElement aggregate_weights(const std::vector<ServerContribution> &contribs,
                               const FieldConfig &cfg) {
    FieldElement acc(0, cfg);
    for (const auto &c : contribs) acc = local_add(acc, c.weight);
    return acc;
}

std::vector<FieldElement>
aggregate_weighted(PartyId party, const std::vector<ServerContribution> &contribs,
                   Mesh &io, SessionCtx &ctx, MultiplicationOracle &oracle) {
    const std::size_t d = contribs.front().features.size();
    std::vector<FieldElement> acc(d, FieldElement(0, ctx.cfg));
    for (const auto &c : contribs) {
        if (c.features.size() != d)
            throw LengthMismatch("feature dimension changed mid-round");
        ctx.round++;
        ctx.step = 0;
        const auto prod = scalar_vector_mul(party, c.weight, c.features, io, ctx, oracle);
        for (std::size_t j = 0; j < d; ++j) acc[j] = local_add(acc[j], prod[j]);
    }
    return acc;
}

namespace {

// Exact decimal string for num / (n * 2^f); trailing zeros trimmed,
// 18 fractional digits at most.
std::string format_ratio(std::int64_t num, u128 den) {
    std::string sign;
    u128 mag = num >= 0 ? static_cast<u128>(num) : static_cast<u128>(-num);
    if (num < 0 && mag % den != 0) sign = "-";
    else if (num < 0) sign = "-";
    if (num == 0) sign = "";
    u128 ip = mag / den;
    u128 rem = mag % den;
    std::string int_part;
    if (ip == 0) int_part = "0";
    while (ip > 0) {
        int_part.insert(int_part.begin(), static_cast<char>('0' + int(ip % 10)));
        ip /= 10;
    }
    std::string frac;
    for (int i = 0; i < 18 && rem != 0; ++i) {
        rem *= 10;
        frac.push_back(static_cast<char>('0' + int(rem / den)));
        rem %= den;
    }
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    std::string out = sign + int_part;
    if (!frac.empty()) out += "." + frac;
    return out;
}

} // namespace

std::string RoundResult::to_json() const {
    std::ostringstream os;
    os << "{\"average\":[";
    for (std::size_t j = 0; j < average.size(); ++j) {
        if (j) os << ",";
        os << "\"" << average[j] << "\"";
    }
    os << "],\"n\":" << n << ",\"oracle\":\"" << oracle
       << "\",\"round\":" << round << "}";
    return os.str();
}

void server_round(PartyId party, Mesh &io, SessionCtx ctx, std::size_t expected,
                  MultiplicationOracle &oracle) {
    const auto contribs = collect_contributions(io, ctx, expected);
    verify_client_set(party, contribs, io, ctx);
    const FieldElement n_share = aggregate_weights(contribs, ctx.cfg);
    auto ws_shares = aggregate_weighted(party, contribs, io, ctx, oracle);
    ctx.round++;
    ctx.step = 0;
    open_send(party, {n_share}, io, ctx, Role::aggregator);
    open_send(party, ws_shares, io, ctx, Role::aggregator);
}

RoundResult aggregator_round(Mesh &io, SessionCtx ctx, std::uint32_t fl_round,
                             const std::string &oracle_name) {
    ctx.step = 0;
    const auto n_vec = open_recv(io, ctx);
    const auto ws = open_recv(io, ctx);
    if (n_vec.size() != 1) throw LengthMismatch("total weight must be scalar");
    const u64 n = n_vec[0].value();
    if (n == 0) throw ZeroTotalWeight("total weight reconstructs to zero");

    RoundResult res;
    res.n = n;
    res.round = fl_round;
    res.oracle = oracle_name;
    const u128 den = static_cast<u128>(n) << ctx.cfg.frac_bits;
    res.average.reserve(ws.size());
    res.average_values.reserve(ws.size());
    for (const auto &e : ws) {
        const std::int64_t s = fp_signed(e, ctx.cfg);
        res.average.push_back(format_ratio(s, den));
        res.average_values.push_back(static_cast<double>(s) /
                                     static_cast<double>(den));
    }
    return res;
}

SessionId session_from_seed(u64 seed) {
    SeededRng rng(seed ^ 0xa5a5a5a5a5a5a5a5ull);
    SessionId sid;
    rng.fill_bytes(sid.data(), sid.size());
    return sid;
}

void validate_round_inputs(const std::vector<ClientInput> &clients,
                           const FieldConfig &cfg) {
    if (clients.empty()) throw EmptyVector("round needs at least one client");
    const std::size_t d = clients.front().w.size();
    u128 weight_sum = 0;
    u64 max_mag = 0;
    for (const auto &c : clients) {
        if (c.n == 0) throw NonPositiveWeight("client weight must be >= 1");
        if (c.w.empty()) throw EmptyVector("client feature vector is empty");
        if (c.w.size() != d) throw LengthMismatch("clients disagree on dimension");
        weight_sum += c.n;
        for (double v : c.w) {
            const FieldElement e = fp_encode(v, cfg); // throws OutOfRange itself
            const u64 mag = std::min(e.value(), cfg.p - e.value());
            max_mag = std::max(max_mag, mag);
        }
    }
    // Sum n_k * max |enc(w)| must stay below p/2 or the aggregate wraps.
    if (weight_sum * max_mag >= (cfg.p + 1) / 2)
        throw OutOfRange("aggregate would wrap around the field");
}

std::vector<double> clear_weighted_average(const std::vector<ClientInput> &clients) {
    const std::size_t d = clients.front().w.size();
    std::vector<double> sum(d, 0.0);
    double n = 0;
    for (const auto &c : clients) {
        n += static_cast<double>(c.n);
        for (std::size_t j = 0; j < d; ++j)
            sum[j] += static_cast<double>(c.n) * c.w[j];
    }
    for (auto &v : sum) v /= n;
    return sum;
}

RoundResult run_round_with(const RoleMeshes &meshes,
                           const std::vector<ClientInput> &clients,
                           const FieldConfig &cfg, OracleKind oracle, u64 seed,
                           std::uint32_t fl_round,
                           std::chrono::milliseconds timeout) {
    validate_round_inputs(clients, cfg);
    const SessionId sid = session_from_seed(seed);
    const std::size_t K = clients.size();

    std::array<std::exception_ptr, 5> errors{};
    std::vector<std::thread> threads;

    for (PartyId party : PartyId::all()) {
        threads.emplace_back([&, party] {
            try {
                SeededRng rng(seed ^ (0x517e5eedull << 8) ^ u64(party.id()));
                auto orc = make_oracle(oracle, rng);
                SessionCtx ctx(cfg);
                ctx.sid = sid;
                ctx.timeout = timeout;
                server_round(party, *meshes.servers[party.index()], ctx, K, *orc);
            } catch (...) {
                errors[party.index()] = std::current_exception();
            }
        });
    }

    std::promise<RoundResult> result_promise;
    auto result_future = result_promise.get_future();
    std::string oracle_name = oracle == OracleKind::zero_sum ? "zeroSum" : "beaverDealer";
    threads.emplace_back([&] {
        try {
            SessionCtx ctx(cfg);
            ctx.sid = sid;
            ctx.timeout = timeout;
            result_promise.set_value(
                aggregator_round(*meshes.aggregator, ctx, fl_round, oracle_name));
        } catch (...) {
            errors[3] = std::current_exception();
            result_promise.set_exception(std::current_exception());
        }
    });

    std::unique_ptr<BeaverDealer> dealer;
    if (oracle == OracleKind::beaver_dealer) {
        if (!meshes.dealer) throw DealerUnavailable("beaver oracle needs a dealer mesh");
        dealer = std::make_unique<BeaverDealer>(cfg, seed ^ 0xdea1e2ull);
        threads.emplace_back([&] {
            try {
                dealer->run(*meshes.dealer);
            } catch (...) {
                errors[4] = std::current_exception();
            }
        });
    }

    // Client side: split and dispatch every contribution.
    try {
        SeededRng client_rng(seed ^ 0xc11e47ull);
        for (std::size_t k = 0; k < K; ++k) {
            char id[16];
            std::snprintf(id, sizeof id, "client%04zu", k);
            auto contrib =
                client_contribute(id, clients[k].n, clients[k].w, cfg, client_rng);
            send_contribution(*meshes.client, sid, contrib);
        }
    } catch (...) {
        // Unblock the waiting servers before rethrowing.
        for (auto *m : meshes.servers) m->close();
        meshes.aggregator->close();
        for (auto &t : threads) t.join();
        throw;
    }

    result_future.wait();
    // The round is done (or failed) once the aggregator resolves; release the
    // dealer and join everyone.
    if (meshes.dealer) meshes.dealer->close();
    for (std::size_t i = 0; i < 3; ++i)
        if (errors[i]) {
            for (auto *m : meshes.servers) m->close();
            meshes.aggregator->close();
        }
    for (auto &t : threads) t.join();
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
    return result_future.get();
}

RoundResult run_round(const std::vector<ClientInput> &clients,
                      const FieldConfig &cfg, OracleKind oracle, u64 seed) {
    SimNetwork net(seed);
    RoleMeshes meshes;
    for (PartyId p : PartyId::all())
        meshes.servers[p.index()] = &net.endpoint(server_role(p));
    meshes.aggregator = &net.endpoint(Role::aggregator);
    meshes.client = &net.endpoint(Role::client);
    if (oracle == OracleKind::beaver_dealer) meshes.dealer = &net.endpoint(Role::dealer);
    return run_round_with(meshes, clients, cfg, oracle, seed);
}

} // namespace wfl
