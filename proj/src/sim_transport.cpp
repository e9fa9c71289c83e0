#include "wfl/sim_transport.hpp"

#include <algorithm>

namespace wfl {

std::string role_name(Role r) {
    switch (r) {
    case Role::server1: return "server1";
    case Role::server2: return "server2";
    case Role::server3: return "server3";
    case Role::aggregator: return "aggregator";
    case Role::dealer: return "dealer";
    case Role::client: return "client";
    }
    return "unknown";
}

std::optional<Role> role_from_name(const std::string &name) {
    for (Role r : {Role::server1, Role::server2, Role::server3,
                   Role::aggregator, Role::dealer, Role::client})
        if (role_name(r) == name) return r;
    return std::nullopt;
}

namespace {

// splitmix64; jitters the transcript's logical clock per (seed, channel, seq).
u64 mix64(u64 x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace

SimNetwork::SimNetwork(u64 seed) : seed_(seed) {}

SimNetwork::~SimNetwork() { close(); }

Mesh &SimNetwork::endpoint(Role r) {
    std::lock_guard lk(mu_);
    auto it = endpoints_.find(r);
    if (it == endpoints_.end())
        it = endpoints_.emplace(r, std::unique_ptr<Endpoint>(new Endpoint(this, r))).first;
    return *it->second;
}

void SimNetwork::enable_tap(Role r) {
    std::lock_guard lk(mu_);
    taps_[r] = PartyView{r, {}};
}

PartyView SimNetwork::take_view(Role r) {
    std::lock_guard lk(mu_);
    auto it = taps_.find(r);
    if (it == taps_.end()) throw Error("no tap enabled for " + role_name(r));
    PartyView out = std::move(it->second);
    it->second = PartyView{r, {}};
    return out;
}

void SimNetwork::do_send(Role src, Role dst, Frame f) {
    // Round-trips through the codec so the transcript is byte-faithful and
    // oversized frames are rejected exactly as on the socket path.
    (void)encode_frame(f);
    std::lock_guard lk(mu_);
    if (closed_) throw ChannelClosed("simulated mesh closed");
    const u64 seq = channel_seq_[{src, dst}]++;
    const u64 jitter = mix64(seed_ ^ (static_cast<u64>(src) << 32) ^
                             (static_cast<u64>(dst) << 40) ^ seq) %
                       997;
    transcript_.push_back({src, dst, seq, seq * 1000 + jitter, f});
    if (auto it = taps_.find(src); it != taps_.end())
        it->second.entries.push_back({true, dst, f});
    inboxes_[dst].push_back({src, std::move(f)});
    cv_.notify_all();
}

std::pair<Role, Frame> SimNetwork::do_recv(Role self, const Selector &sel,
                                           std::chrono::milliseconds timeout) {
    std::unique_lock lk(mu_);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        auto &box = inboxes_[self];
        for (auto it = box.begin(); it != box.end(); ++it) {
            if (sel.matches(it->src, it->frame)) {
                auto out = std::make_pair(it->src, std::move(it->frame));
                box.erase(it);
                if (auto t = taps_.find(self); t != taps_.end())
                    t->second.entries.push_back({false, out.first, out.second});
                return out;
            }
        }
        if (closed_) throw ChannelClosed("simulated mesh closed");
        if (cv_.wait_until(lk, deadline) == std::cv_status::timeout)
            throw TimeoutError("recv deadline expired at " + role_name(self));
    }
}

std::vector<TranscriptEntry> SimNetwork::transcript() const {
    std::lock_guard lk(mu_);
    auto out = transcript_;
    std::stable_sort(out.begin(), out.end(),
                     [](const TranscriptEntry &a, const TranscriptEntry &b) {
                         if (a.logical_time != b.logical_time)
                             return a.logical_time < b.logical_time;
                         if (a.src != b.src) return a.src < b.src;
                         return a.dst < b.dst;
                     });
    return out;
}

std::size_t SimNetwork::frame_count() const {
    std::lock_guard lk(mu_);
    return transcript_.size();
}

void SimNetwork::close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    cv_.notify_all();
}

void SimNetwork::Endpoint::send(Role dest, Frame f) {
    net_->do_send(role_, dest, std::move(f));
}

std::pair<Role, Frame> SimNetwork::Endpoint::recv(const Selector &sel,
                                                  std::chrono::milliseconds timeout) {
    return net_->do_recv(role_, sel, timeout);
}

void SimNetwork::Endpoint::close() { net_->close(); }

} // namespace wfl
