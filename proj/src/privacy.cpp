#include "wfl/privacy.hpp"

#include <cmath>
#include <sstream>
#include <thread>

namespace wfl {

double chi_square_statistic(const std::vector<u64> &counts, double expected) {
    double stat = 0.0;
    for (u64 c : counts) {
        const double diff = static_cast<double>(c) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

double chi_square_critical(int df) {
    // alpha = 0.001 table entries for the degrees of freedom the suite uses.
    switch (df) {
    case 1: return 10.828;
    case 2: return 13.816;
    case 3: return 16.266;
    case 4: return 18.467;
    case 8: return 26.124;
    case 24: return 51.179;
    case 30: return 59.703;
    case 48: return 82.720;
    case 80: return 124.839;
    default: {
        // Wilson-Hilferty approximation, z_{0.999} = 3.090232.
        const double z = 3.090232;
        const double t = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
        return df * t * t * t;
    }
    }
}

UniformityReport make_uniformity_report(std::string what, std::vector<u64> counts) {
    UniformityReport rep;
    rep.what = std::move(what);
    u64 total = 0;
    for (u64 c : counts) total += c;
    rep.statistic = chi_square_statistic(counts, static_cast<double>(total) /
                                                     static_cast<double>(counts.size()));
    rep.degrees_of_freedom = static_cast<int>(counts.size()) - 1;
    rep.critical_value = chi_square_critical(rep.degrees_of_freedom);
    rep.pass = rep.statistic < rep.critical_value;
    rep.cell_counts = std::move(counts);
    return rep;
}

std::string UniformityReport::to_json() const {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed;
    os << "{\"test\":\"" << what << "\",\"statistic\":" << statistic
       << ",\"df\":" << degrees_of_freedom << ",\"critical\":" << critical_value
       << ",\"pass\":" << (pass ? "true" : "false") << "}";
    return os.str();
}

UniformityReport test_share_uniformity(u64 secret, std::size_t trials,
                                       const FieldConfig &cfg, int component,
                                       u64 seed, Splitter splitter) {
    if (cfg.p > 31) throw InsufficientTrials("uniformity test needs p <= 31");
    if (trials < 100 * cfg.p)
        throw InsufficientTrials("uniformity test needs >= 100*p trials");
    if (!splitter)
        splitter = [](const FieldElement &x, const FieldConfig &c, SeededRng &r) {
            return split(x, c, r);
        };
    SeededRng rng(seed);
    const FieldElement x(secret, cfg);
    std::vector<u64> counts(cfg.p, 0);
    for (std::size_t t = 0; t < trials; ++t) {
        const SecretShares s = splitter(x, cfg, rng);
        counts[s.components[component - 1].value()]++;
    }
    return make_uniformity_report("share_component_" + std::to_string(component),
                                  std::move(counts));
}

UniformityReport test_share_pair_uniformity(u64 secret, std::size_t trials,
                                            const FieldConfig &cfg, int comp_a,
                                            int comp_b, u64 seed) {
    if (cfg.p > 7) throw InsufficientTrials("pair test needs p <= 7");
    if (trials < 100 * cfg.p * cfg.p)
        throw InsufficientTrials("pair test needs >= 100*p^2 trials");
    SeededRng rng(seed);
    const FieldElement x(secret, cfg);
    std::vector<u64> counts(cfg.p * cfg.p, 0);
    for (std::size_t t = 0; t < trials; ++t) {
        const SecretShares s = split(x, cfg, rng);
        counts[s.components[comp_a - 1].value() * cfg.p +
               s.components[comp_b - 1].value()]++;
    }
    return make_uniformity_report("share_pair_" + std::to_string(comp_a) + "_" +
                                      std::to_string(comp_b),
                                  std::move(counts));
}

namespace {

/// Runs `rounds` batches of `muls_per_round` consecutive zero-sum vector
/// multiplications (batch size `batch`) with fixed inputs and returns the
/// MUL_FORWARD frames server 2 received from server 1, in order.
std::vector<Frame> collect_forwarded(u64 p, std::size_t rounds, std::size_t batch,
                                     int muls_per_round, u64 seed,
                                     ProtocolHooks hooks) {
    const FieldConfig cfg(p, 0);
    SimNetwork net(seed);
    net.enable_tap(Role::server2);
    const SessionId sid = session_from_seed(seed);

    std::array<std::exception_ptr, 3> errors{};
    std::vector<std::thread> threads;
    for (PartyId party : PartyId::all()) {
        threads.emplace_back([&, party] {
            try {
                Mesh &io = net.endpoint(server_role(party));
                SeededRng rng(seed ^ (u64(party.id()) << 16));
                ZeroSumOracle oracle(rng, hooks);
                const FieldElement x(u64(party.id()) % p, cfg);
                const FieldElement y((2 * u64(party.id())) % p, cfg);
                const std::vector<FieldElement> xs(batch, x), ys(batch, y);
                SessionCtx ctx(cfg);
                ctx.sid = sid;
                for (std::size_t r = 0; r < rounds; ++r) {
                    ctx.round = static_cast<std::uint32_t>(r);
                    ctx.step = 0;
                    for (int m = 0; m < muls_per_round; ++m)
                        oracle.mul_vec(party, xs, ys, io, ctx);
                }
            } catch (...) {
                errors[party.index()] = std::current_exception();
            }
        });
    }
    for (auto &t : threads) t.join();
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<Frame> out;
    for (const auto &entry : net.take_view(Role::server2).entries)
        if (!entry.sent && entry.peer == Role::server1 &&
            entry.frame.type == msg::MUL_FORWARD)
            out.push_back(entry.frame);
    return out;
}

std::vector<std::pair<u64, u64>> decode_pairs(const Frame &f, const FieldConfig &cfg) {
    PayloadReader r(f.payload);
    const std::uint32_t n = r.u32();
    std::vector<std::pair<u64, u64>> out;
    out.reserve(n / 2);
    for (std::uint32_t j = 0; j + 1 < n; j += 2) {
        const u64 a = r.fe(cfg).value();
        const u64 b = r.fe(cfg).value();
        out.emplace_back(a, b);
    }
    return out;
}

} // namespace

UniformityReport test_reshare_pad(u64 p, std::size_t trials, u64 seed,
                                  ProtocolHooks hooks) {
    if (p > 7) throw InsufficientTrials("pad test needs p <= 7");
    if (trials < 100 * p * p)
        throw InsufficientTrials("pad test needs >= 100*p^2 trials");
    const FieldConfig cfg(p, 0);
    const std::size_t batch = 500;
    const std::size_t rounds = (trials + batch - 1) / batch;
    const auto frames = collect_forwarded(p, rounds, batch, 1, seed, hooks);
    std::vector<u64> counts(p * p, 0);
    std::size_t seen = 0;
    for (const auto &f : frames)
        for (auto [x, y] : decode_pairs(f, cfg)) {
            if (seen++ >= trials) break;
            counts[x * p + y]++;
        }
    return make_uniformity_report("reshare_pad_joint", std::move(counts));
}

UniformityReport test_reshare_pad_two_rounds(u64 p, std::size_t trials, u64 seed,
                                             ProtocolHooks hooks) {
    if (p > 3) throw InsufficientTrials("two-round pad test needs p <= 3");
    if (trials < 100 * p * p * p * p)
        throw InsufficientTrials("two-round pad test needs >= 100*p^4 trials");
    const FieldConfig cfg(p, 0);
    const std::size_t batch = 500;
    const std::size_t rounds = (trials + batch - 1) / batch;
    const auto frames = collect_forwarded(p, rounds, batch, 2, seed, hooks);
    std::vector<u64> counts(p * p * p * p, 0);
    std::size_t seen = 0;
    // Frames alternate: first and second multiplication of each round.
    for (std::size_t t = 0; t + 1 < frames.size(); t += 2) {
        const auto first = decode_pairs(frames[t], cfg);
        const auto second = decode_pairs(frames[t + 1], cfg);
        for (std::size_t j = 0; j < first.size() && j < second.size(); ++j) {
            if (seen++ >= trials) break;
            const u64 cell = ((first[j].first * p + first[j].second) * p +
                              second[j].first) *
                                 p +
                             second[j].second;
            counts[cell]++;
        }
    }
    return make_uniformity_report("reshare_pad_two_rounds", std::move(counts));
}

std::pair<RoundResult, std::array<PartyView, 3>>
capture_views(const std::vector<ClientInput> &clients, const FieldConfig &cfg,
              OracleKind oracle, u64 seed) {
    SimNetwork net(seed);
    for (PartyId p : PartyId::all()) net.enable_tap(server_role(p));
    RoleMeshes meshes;
    for (PartyId p : PartyId::all())
        meshes.servers[p.index()] = &net.endpoint(server_role(p));
    meshes.aggregator = &net.endpoint(Role::aggregator);
    meshes.client = &net.endpoint(Role::client);
    if (oracle == OracleKind::beaver_dealer) meshes.dealer = &net.endpoint(Role::dealer);
    RoundResult res = run_round_with(meshes, clients, cfg, oracle, seed);
    std::array<PartyView, 3> views = {net.take_view(Role::server1),
                                      net.take_view(Role::server2),
                                      net.take_view(Role::server3)};
    return {std::move(res), std::move(views)};
}

std::vector<FieldElement> view_elements(const PartyView &view, const FieldConfig &cfg) {
    std::vector<FieldElement> out;
    for (const auto &entry : view.entries) {
        const Frame &f = entry.frame;
        PayloadReader r(f.payload);
        switch (f.type) {
        case msg::RESHARE_R:
        case msg::MUL_FORWARD:
        case msg::BEAVER_OPEN: {
            const std::uint32_t n = r.u32();
            for (std::uint32_t j = 0; j < n; ++j) out.push_back(r.fe(cfg));
            break;
        }
        case msg::OPEN_SHARE: {
            r.u8();
            const std::uint32_t n = r.u32();
            for (std::uint32_t j = 0; j < n; ++j) out.push_back(r.fe(cfg));
            break;
        }
        case msg::BEAVER_TRIPLE: {
            if (f.payload.size() == 4) break; // request carries no shares
            const std::uint32_t n = r.u32();
            for (std::uint32_t j = 0; j < 3 * n; ++j) out.push_back(r.fe(cfg));
            break;
        }
        case msg::CONTRIB: {
            r.str(r.u16());
            out.push_back(r.fe(cfg));
            const std::uint32_t d = r.u32();
            for (std::uint32_t j = 0; j < d; ++j) out.push_back(r.fe(cfg));
            break;
        }
        default:
            break; // CLIENT_SET carries no field elements
        }
    }
    return out;
}

bool assert_non_reconstructible(const std::vector<PartyView> &views,
                                const std::vector<u64> &secrets,
                                const FieldConfig &cfg) {
    if (views.empty()) return true;
    const std::size_t runs = views.size();
    std::vector<std::vector<u64>> vals;
    vals.reserve(runs);
    for (const auto &v : views) {
        std::vector<u64> e;
        for (const auto &fe : view_elements(v, cfg)) e.push_back(fe.value());
        if (!vals.empty() && e.size() != vals.front().size())
            throw LengthMismatch("views differ in element count across runs");
        vals.push_back(std::move(e));
    }
    if (vals.front().empty()) return true;

    const u64 p = cfg.p;
    const std::size_t m = vals.front().size();
    const double chance = static_cast<double>(runs) / static_cast<double>(p);
    // Multiplicity-adjusted: with tens of thousands of combinations tested,
    // 6 sigma keeps the chance of a false reconstruction flag negligible
    // while a true reconstruction hits in every run.
    const double threshold =
        chance + 6.0 * std::sqrt(static_cast<double>(runs) * (1.0 / p) * (1.0 - 1.0 / p));

    std::vector<u64> hits(secrets.size());
    auto evaluate = [&](const std::vector<std::size_t> &idx, unsigned signs) {
        std::fill(hits.begin(), hits.end(), 0);
        for (std::size_t r = 0; r < runs; ++r) {
            u64 sum = 0;
            for (std::size_t t = 0; t < idx.size(); ++t) {
                const u64 v = vals[r][idx[t]];
                sum = (signs >> t) & 1 ? (sum + p - v) % p : (sum + v) % p;
            }
            for (std::size_t s = 0; s < secrets.size(); ++s)
                if (sum == secrets[s] % p) hits[s]++;
        }
        for (u64 h : hits)
            if (static_cast<double>(h) > threshold) return false;
        return true;
    };

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < m; ++i) {
        idx = {i};
        for (unsigned s = 0; s < 2; ++s)
            if (!evaluate(idx, s)) return false;
        for (std::size_t j = i + 1; j < m; ++j) {
            idx = {i, j};
            for (unsigned s = 0; s < 4; ++s)
                if (!evaluate(idx, s)) return false;
            for (std::size_t k = j + 1; k < m; ++k) {
                idx = {i, j, k};
                for (unsigned s = 0; s < 8; ++s)
                    if (!evaluate(idx, s)) return false;
            }
        }
    }
    return true;
}

} // namespace wfl
