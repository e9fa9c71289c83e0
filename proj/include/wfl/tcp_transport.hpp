#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "wfl/transport.hpp"

namespace wfl {

/// Stream-socket mesh endpoint. Servers (and the aggregator) listen; clients
/// and the dealer connect outbound only. Every connection opens with a
/// one-byte role hello and then carries frames in both directions.
class TcpMesh : public Mesh {
public:
    /// listen_addr may be empty for outbound-only roles. peers maps a role to
    /// its "host:port" listen address for lazy outbound connects.
    TcpMesh(Role self, const std::string &listen_addr,
            std::map<Role, std::string> peers);
    ~TcpMesh() override;

    void send(Role dest, Frame f) override;
    std::pair<Role, Frame> recv(const Selector &sel,
                                std::chrono::milliseconds timeout) override;
    void close() override;

    /// Actual bound port (useful when listening on port 0).
    std::uint16_t port() const { return port_; }

    /// Registers a route after construction; handy when peer ports are only
    /// known once every endpoint has bound. Call before traffic starts.
    void add_peer(Role peer, const std::string &addr);

private:
    struct Inbound {
        Role src;
        Frame frame;
    };

    int connect_to(Role dest);
    void accept_loop();
    void reader_loop(int fd, Role src);
    void start_reader(int fd, Role src);

    Role self_;
    std::map<Role, std::string> peers_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> closed_{false};

    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<Inbound> inbox_;
    std::map<Role, int> conns_; // sendable peer connections
    std::vector<int> all_fds_;
    std::vector<std::thread> threads_;
};

} // namespace wfl
