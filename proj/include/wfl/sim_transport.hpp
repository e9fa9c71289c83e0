#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "wfl/transport.hpp"

namespace wfl {

/// One frame as seen by one party (tap output).
struct ViewEntry {
    bool sent; // false = received
    Role peer;
    Frame frame;
};

/// Everything a single party saw in a session: the input to privacy tests.
struct PartyView {
    Role party;
    std::vector<ViewEntry> entries;
};

struct TranscriptEntry {
    Role src;
    Role dst;
    std::uint64_t channel_seq;
    std::uint64_t logical_time;
    Frame frame;
};

/// Deterministic in-process mesh. Delivery is FIFO per directed channel with
/// no loss or duplication; the transcript's global interleaving is a pure
/// function of the seed.
class SimNetwork {
public:
    explicit SimNetwork(u64 seed = 0);
    ~SimNetwork();

    class Endpoint : public Mesh {
    public:
        void send(Role dest, Frame f) override;
        std::pair<Role, Frame> recv(const Selector &sel,
                                    std::chrono::milliseconds timeout) override;
        void close() override;

    private:
        friend class SimNetwork;
        Endpoint(SimNetwork *net, Role role) : net_(net), role_(role) {}
        SimNetwork *net_;
        Role role_;
    };

    Mesh &endpoint(Role r);

    void enable_tap(Role r);
    PartyView take_view(Role r);

    /// All delivered frames ordered by seeded logical time.
    std::vector<TranscriptEntry> transcript() const;
    std::size_t frame_count() const;

    /// Wakes every blocked recv with ChannelClosed.
    void close();

private:
    struct Pending {
        Role src;
        Frame frame;
    };

    void do_send(Role src, Role dst, Frame f);
    std::pair<Role, Frame> do_recv(Role self, const Selector &sel,
                                   std::chrono::milliseconds timeout);

    u64 seed_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    bool closed_ = false;
    std::map<Role, std::unique_ptr<Endpoint>> endpoints_;
    std::map<Role, std::deque<Pending>> inboxes_;
    std::map<std::pair<Role, Role>, std::uint64_t> channel_seq_;
    std::map<Role, PartyView> taps_;
    std::vector<TranscriptEntry> transcript_;
};

} // namespace wfl
