#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>

#include "wfl/frame.hpp"
#include "wfl/sharing.hpp"

namespace wfl {

enum class Role : std::uint8_t {
    server1 = 1,
    server2 = 2,
    server3 = 3,
    aggregator = 4,
    dealer = 5,
    client = 6,
};

inline Role server_role(PartyId p) { return static_cast<Role>(p.id()); }

std::string role_name(Role r);
std::optional<Role> role_from_name(const std::string &name);

/// Frame matcher; unset fields match anything.
struct Selector {
    std::optional<Role> from;
    std::optional<SessionId> session;
    std::optional<std::uint32_t> round;
    std::optional<std::uint16_t> step;
    std::optional<std::uint8_t> type;

    bool matches(Role src, const Frame &f) const {
        if (from && *from != src) return false;
        if (session && *session != f.session) return false;
        if (round && *round != f.round) return false;
        if (step && *step != f.step) return false;
        if (type && *type != f.type) return false;
        return true;
    }
};

/// Point-to-point framed messaging. Per-(sender,dest) FIFO order; recv
/// returns the first buffered or arriving frame matching the selector and
/// leaves unmatched frames buffered.
class Mesh {
public:
    virtual ~Mesh() = default;

    virtual void send(Role dest, Frame f) = 0;
    virtual std::pair<Role, Frame> recv(const Selector &sel,
                                        std::chrono::milliseconds timeout) = 0;
    virtual void close() = 0;
};

} // namespace wfl
