#pragma once

#include <functional>
#include <thread>

#include "wfl/protocol.hpp"
#include "wfl/sim_transport.hpp"

namespace wfl::test {

/// Runs one closure per server over a shared mesh set and returns the three
/// results. Rethrows the first party failure.
template <typename T>
std::array<T, 3> run_parties(const std::array<Mesh *, 3> &meshes,
                             std::function<T(PartyId, Mesh &)> body) {
    std::array<std::exception_ptr, 3> errors{};
    std::array<T, 3> results{};
    std::vector<std::thread> threads;
    for (PartyId party : PartyId::all()) {
        threads.emplace_back([&, party] {
            try {
                results[party.index()] = body(party, *meshes[party.index()]);
            } catch (...) {
                errors[party.index()] = std::current_exception();
            }
        });
    }
    for (auto &t : threads) t.join();
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

template <typename T>
std::array<T, 3> run_parties(SimNetwork &net, std::function<T(PartyId, Mesh &)> body) {
    std::array<Mesh *, 3> meshes;
    for (PartyId p : PartyId::all()) meshes[p.index()] = &net.endpoint(server_role(p));
    auto out = run_parties<T>(meshes, std::move(body));
    return out;
}

/// Same, with a Beaver dealer serving in the background until the parties
/// finish.
template <typename T>
std::array<T, 3> run_parties_with_dealer(SimNetwork &net, const FieldConfig &cfg,
                                         u64 dealer_seed,
                                         std::function<T(PartyId, Mesh &)> body,
                                         bool degenerate_triples = false) {
    BeaverDealer dealer(cfg, dealer_seed, degenerate_triples);
    std::exception_ptr dealer_error;
    std::thread dealer_thread([&] {
        try {
            dealer.run(net.endpoint(Role::dealer));
        } catch (...) {
            dealer_error = std::current_exception();
        }
    });
    std::array<T, 3> out;
    try {
        out = run_parties<T>(net, std::move(body));
    } catch (...) {
        net.close();
        dealer_thread.join();
        throw;
    }
    net.close();
    dealer_thread.join();
    if (dealer_error) std::rethrow_exception(dealer_error);
    return out;
}

} // namespace wfl::test
