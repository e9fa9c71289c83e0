// wflmpc: operator entry points for the three-server weighted-aggregation
// protocol. See README.md for the config file layout and examples.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wfl/privacy.hpp"
#include "wfl/tcp_transport.hpp"
#include "wfl/wfl.hpp"

using namespace wfl;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitTimeout = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CliConfig {
    FieldConfig field{FieldConfig::mersenne61()};
    OracleKind oracle = OracleKind::zero_sum;
    std::string oracle_name = "zero-sum";
    std::chrono::milliseconds timeout{10000};
    std::size_t clients = 1;
    SessionId sid{};
    u64 seed = 0;
    bool seeded = false;
    std::map<Role, std::string> peers;
    std::string listen; // optional override of the own peers entry
};

SessionId parse_session(const std::string &hex) {
    if (hex.size() != 32) throw ConfigError("session must be 32 hex digits");
    SessionId sid{};
    for (int i = 0; i < 16; ++i) {
        const std::string byte = hex.substr(2 * std::size_t(i), 2);
        std::size_t used = 0;
        const int v = std::stoi(byte, &used, 16);
        if (used != 2) throw ConfigError("bad session hex: " + byte);
        sid[std::size_t(i)] = static_cast<std::uint8_t>(v);
    }
    return sid;
}

CliConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    CliConfig cfg;
    try {
        const u64 prime = doc.value("prime", u64(0x1fffffffffffffff));
        const int frac = doc.value("frac_bits", 16);
        cfg.field = FieldConfig(prime, frac);
    } catch (const OutOfRange &e) {
        throw ConfigError(e.what());
    }
    cfg.oracle_name = doc.value("oracle", "zero-sum");
    if (cfg.oracle_name == "zero-sum")
        cfg.oracle = OracleKind::zero_sum;
    else if (cfg.oracle_name == "beaver")
        cfg.oracle = OracleKind::beaver_dealer;
    else
        throw ConfigError("oracle must be zero-sum or beaver");
    cfg.timeout = std::chrono::milliseconds(doc.value("timeout_ms", 10000));
    if (cfg.timeout.count() <= 0) throw ConfigError("timeout_ms must be positive");
    cfg.clients = doc.value("clients", std::size_t(1));
    if (cfg.clients < 1) throw ConfigError("clients must be at least 1");
    if (doc.contains("session")) cfg.sid = parse_session(doc["session"]);
    if (doc.contains("seed")) {
        cfg.seed = doc["seed"].get<u64>();
        cfg.seeded = true;
    }
    cfg.listen = doc.value("listen", "");
    if (doc.contains("peers")) {
        for (const auto &[name, addr] : doc["peers"].items()) {
            const auto role = role_from_name(name);
            if (!role) throw ConfigError("unknown peer role: " + name);
            cfg.peers[*role] = addr.get<std::string>();
        }
    }
    return cfg;
}

u64 role_seed(const CliConfig &cfg, Role self) {
    if (cfg.seeded) return cfg.seed ^ (u64(self) << 32);
    std::random_device rd;
    return (u64(rd()) << 32) | rd();
}

/// Listening mesh for a role whose address comes from the shared peers map
/// (or the explicit listen override), with routes to the given other roles.
std::unique_ptr<TcpMesh> make_listener(const CliConfig &cfg, Role self,
                                       const std::vector<Role> &routes) {
    std::string listen = cfg.listen;
    if (listen.empty()) {
        auto it = cfg.peers.find(self);
        if (it == cfg.peers.end())
            throw ConfigError("no listen address: add a peers entry for " +
                              role_name(self) + " or a listen key");
        listen = it->second;
    }
    std::map<Role, std::string> peers;
    for (Role r : routes) {
        auto it = cfg.peers.find(r);
        if (it != cfg.peers.end()) peers[r] = it->second;
    }
    return std::make_unique<TcpMesh>(self, listen, std::move(peers));
}

int cmd_server(const CliConfig &cfg, int id) {
    const PartyId party{id};
    const Role self = server_role(party);
    std::vector<Role> routes{server_role(party.next()), server_role(party.prev()),
                             Role::aggregator};
    if (cfg.oracle == OracleKind::beaver_dealer) routes.push_back(Role::dealer);
    auto mesh = make_listener(cfg, self, routes);

    SessionCtx ctx(cfg.field);
    ctx.sid = cfg.sid;
    ctx.timeout = cfg.timeout;
    SeededRng rng(role_seed(cfg, self));
    auto oracle = make_oracle(cfg.oracle, rng);
    server_round(party, *mesh, ctx, cfg.clients, *oracle);
    return 0;
}

int cmd_aggregator(const CliConfig &cfg) {
    auto mesh = make_listener(cfg, Role::aggregator, {});
    SessionCtx ctx(cfg.field);
    ctx.sid = cfg.sid;
    ctx.timeout = cfg.timeout;
    const auto res = aggregator_round(*mesh, ctx, 1, cfg.oracle_name);
    std::printf("%s\n", res.to_json().c_str());
    return 0;
}

std::vector<double> read_features(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open features file: " + path);
    std::vector<double> w;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(line, &used);
        } catch (const std::exception &) {
            throw ConfigError("bad feature value: " + line);
        }
        if (used != line.size()) throw ConfigError("bad feature value: " + line);
        w.push_back(v);
    }
    if (w.empty()) throw ConfigError("features file is empty");
    return w;
}

int cmd_client(const CliConfig &cfg, u64 weight, const std::string &features_path,
               const std::string &client_id) {
    if (weight == 0) throw ConfigError("weight must be positive");
    const auto w = read_features(features_path);

    std::map<Role, std::string> peers;
    for (PartyId p : PartyId::all()) {
        auto it = cfg.peers.find(server_role(p));
        if (it == cfg.peers.end())
            throw ConfigError("peers must list all three servers");
        peers[server_role(p)] = it->second;
    }
    SeededRng rng(role_seed(cfg, Role::client));
    const auto contrib = client_contribute(client_id, weight, w, cfg.field, rng);
    TcpMesh mesh(Role::client, "", std::move(peers));
    send_contribution(mesh, cfg.sid, contrib);
    return 0;
}

int cmd_dealer(const CliConfig &cfg) {
    auto mesh = make_listener(cfg, Role::dealer, {});
    BeaverDealer dealer(cfg.field, role_seed(cfg, Role::dealer));
    // Serve until no request arrives for a full timeout window, then assume
    // the session is over and exit cleanly.
    for (;;) {
        try {
            dealer.serve_one(*mesh, cfg.timeout);
        } catch (const TimeoutError &) {
            return 0;
        } catch (const ChannelClosed &) {
            return 0;
        }
    }
}

int cmd_demo(std::size_t K, std::size_t d, u64 samples, u64 seed,
             const std::string &oracle_name) {
    OracleKind kind;
    if (oracle_name == "zero-sum")
        kind = OracleKind::zero_sum;
    else if (oracle_name == "beaver")
        kind = OracleKind::beaver_dealer;
    else
        throw ConfigError("oracle must be zero-sum or beaver");
    if (K < 1 || d < 1 || samples < 1)
        throw ConfigError("clients, dim and samples must be at least 1");

    SeededRng rng(seed);
    std::vector<ClientInput> clients;
    for (std::size_t k = 0; k < K; ++k) {
        ClientInput c;
        c.n = samples;
        for (std::size_t j = 0; j < d; ++j)
            c.w.push_back((double(rng.next_u64() % 2000001) - 1000000) / 1000000.0);
        clients.push_back(std::move(c));
    }

    const FieldConfig cfg = FieldConfig::mersenne61();
    SimNetwork net(seed);
    RoleMeshes meshes;
    for (PartyId p : PartyId::all())
        meshes.servers[p.index()] = &net.endpoint(server_role(p));
    meshes.aggregator = &net.endpoint(Role::aggregator);
    meshes.client = &net.endpoint(Role::client);
    if (kind == OracleKind::beaver_dealer) meshes.dealer = &net.endpoint(Role::dealer);

    const auto t0 = std::chrono::steady_clock::now();
    const auto res = run_round_with(meshes, clients, cfg, kind, seed);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto clear = clear_weighted_average(clients);
    double max_dev = 0;
    for (std::size_t j = 0; j < d; ++j)
        max_dev = std::max(max_dev, std::abs(res.average_values[j] - clear[j]));

    std::printf("mpc:           %s\n", res.to_json().c_str());
    std::string clear_str = "[";
    for (std::size_t j = 0; j < d; ++j)
        clear_str += (j ? "," : "") + std::to_string(clear[j]);
    std::printf("clear:         %s]\n", clear_str.c_str());
    std::printf("max deviation: %.3g\n", max_dev);
    std::printf("frames:        %zu\n", net.frame_count());
    std::printf("wall time:     %.3f s\n", secs);
    return max_dev <= 0x1p-16 ? 0 : kExitProtocol;
}

// ---- selftest ----

bool report_check(const std::string &name, bool pass, const std::string &detail = "") {
    json line{{"test", name}, {"pass", pass}};
    if (!detail.empty()) line["detail"] = detail;
    std::printf("%s\n", line.dump().c_str());
    return pass;
}

bool selftest_multiplication() {
    const FieldConfig p31{31, 0};
    SeededRng srng(1);
    for (OracleKind kind : {OracleKind::zero_sum, OracleKind::beaver_dealer}) {
        std::vector<FieldElement> xs, ys;
        for (u64 x = 0; x < 31; ++x)
            for (u64 y = 0; y < 31; ++y) {
                xs.emplace_back(x, p31);
                ys.emplace_back(y, p31);
            }
        const auto sx = split_vector(xs, p31, srng);
        const auto sy = split_vector(ys, p31, srng);

        SimNetwork net(17);
        std::unique_ptr<BeaverDealer> dealer;
        std::thread dealer_thread;
        if (kind == OracleKind::beaver_dealer) {
            dealer = std::make_unique<BeaverDealer>(p31, 5);
            dealer_thread = std::thread([&] { dealer->run(net.endpoint(Role::dealer)); });
        }
        std::array<std::vector<FieldElement>, 3> out;
        std::vector<std::thread> threads;
        for (PartyId p : PartyId::all()) {
            threads.emplace_back([&, p] {
                SeededRng rng(100 + u64(p.id()));
                auto oracle = make_oracle(kind, rng);
                SessionCtx ctx(p31);
                out[p.index()] = oracle->mul_vec(p, sx.for_party(p), sy.for_party(p),
                                                 net.endpoint(server_role(p)), ctx);
            });
        }
        for (auto &t : threads) t.join();
        net.close();
        if (dealer_thread.joinable()) dealer_thread.join();

        std::size_t ok = 0;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            const u64 got =
                reconstruct(SecretShares{{out[0][j], out[1][j], out[2][j]}}).value();
            if (got == xs[j].value() * ys[j].value() % 31) ++ok;
        }
        const std::string name = std::string("exhaustive multiplication p=31 (") +
                                 (kind == OracleKind::zero_sum ? "zero-sum" : "beaver") +
                                 ")";
        if (!report_check(name, ok == 961,
                          std::to_string(ok) + "/961 cases correct"))
            return false;
    }
    return true;
}

bool selftest_frames() {
    SeededRng rng(3);
    std::size_t ok = 0;
    for (int i = 0; i < 10000; ++i) {
        Frame f;
        for (auto &b : f.session) b = static_cast<std::uint8_t>(rng.next_u64());
        f.round = static_cast<std::uint32_t>(rng.next_u64());
        f.step = static_cast<std::uint16_t>(rng.next_u64());
        f.type = static_cast<std::uint8_t>(rng.next_u64());
        f.payload.resize(rng.next_u64() % 128);
        rng.fill_bytes(f.payload.data(), f.payload.size());
        if (decode_frame(encode_frame(f)) == f) ++ok;
    }
    return report_check("frame codec roundtrip", ok == 10000,
                        std::to_string(ok) + "/10000 roundtrips exact");
}

int cmd_selftest(const std::string &level) {
    if (level != "quick" && level != "full")
        throw ConfigError("level must be quick or full");
    bool pass = selftest_multiplication();
    pass = selftest_frames() && pass;
    if (level == "full") {
        const FieldConfig p31{31, 0};
        auto run = [&](UniformityReport rep) {
            std::printf("%s\n", rep.to_json().c_str());
            return rep.pass;
        };
        pass = run(test_share_uniformity(17, 100000, p31, 1, 42)) && pass;
        pass = run(test_share_uniformity(17, 100000, p31, 2, 43)) && pass;
        pass = run(test_share_pair_uniformity(3, 100000, FieldConfig{5, 0}, 1, 2, 9)) &&
               pass;
        pass = run(test_reshare_pad(5, 100000, 11)) && pass;
        pass = run(test_reshare_pad_two_rounds(3, 50000, 13)) && pass;
    }
    report_check("selftest", pass);
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"three-server secure weighted aggregation"};
    app.require_subcommand(1);

    std::string config_path;
    int server_id = 0;
    u64 weight = 0;
    std::string features_path, client_id = "client0000";
    std::size_t demo_clients = 100, demo_dim = 10;
    u64 demo_samples = 600, demo_seed = 42;
    std::string demo_oracle = "zero-sum", level = "quick";

    auto *server = app.add_subcommand("server", "run one MPC server");
    server->add_option("--config", config_path)->required();
    server->add_option("--id", server_id)->required()->check(CLI::Range(1, 3));

    auto *aggregator = app.add_subcommand("aggregator", "run the aggregator");
    aggregator->add_option("--config", config_path)->required();

    auto *client = app.add_subcommand("client", "submit one contribution");
    client->add_option("--config", config_path)->required();
    client->add_option("--weight", weight, "sample count n_k")->required();
    client->add_option("--features", features_path, "one decimal per line")->required();
    client->add_option("--id", client_id, "unique client identifier");

    auto *dealer = app.add_subcommand("dealer", "run the Beaver-triple dealer");
    dealer->add_option("--config", config_path)->required();

    auto *demo = app.add_subcommand("demo", "in-process round on the simulator");
    demo->add_option("--clients", demo_clients);
    demo->add_option("--dim", demo_dim);
    demo->add_option("--samples", demo_samples, "n_k per client");
    demo->add_option("--seed", demo_seed);
    demo->add_option("--oracle", demo_oracle)
        ->check(CLI::IsMember({"zero-sum", "beaver"}));

    auto *selftest = app.add_subcommand("selftest", "built-in test battery");
    selftest->add_option("--level", level)->check(CLI::IsMember({"quick", "full"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (demo->parsed())
            return cmd_demo(demo_clients, demo_dim, demo_samples, demo_seed,
                            demo_oracle);
        if (selftest->parsed()) return cmd_selftest(level);

        const CliConfig cfg = load_config(config_path);
        if (server->parsed()) return cmd_server(cfg, server_id);
        if (aggregator->parsed()) return cmd_aggregator(cfg);
        if (client->parsed()) return cmd_client(cfg, weight, features_path, client_id);
        if (dealer->parsed()) return cmd_dealer(cfg);
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const OutOfRange &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const NonPositiveWeight &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const TimeoutError &e) {
        std::fprintf(stderr, "timeout: %s\n", e.what());
        return kExitTimeout;
    } catch (const Error &e) {
        std::fprintf(stderr, "protocol error: %s\n", e.what());
        return kExitProtocol;
    }
    return 0;
}
