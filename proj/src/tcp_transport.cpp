#include "wfl/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

namespace wfl {

namespace {

void split_host_port(const std::string &addr, std::string &host, std::uint16_t &port) {
    auto pos = addr.rfind(':');
    if (pos == std::string::npos)
        throw Error("address must be host:port: " + addr);
    host = addr.substr(0, pos);
    port = static_cast<std::uint16_t>(std::stoi(addr.substr(pos + 1)));
}

bool write_all(int fd, const std::uint8_t *data, std::size_t n) {
    while (n > 0) {
        ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
        if (w <= 0) return false;
        data += w;
        n -= static_cast<std::size_t>(w);
    }
    return true;
}

bool read_all(int fd, std::uint8_t *data, std::size_t n) {
    while (n > 0) {
        ssize_t r = ::recv(fd, data, n, 0);
        if (r <= 0) return false;
        data += r;
        n -= static_cast<std::size_t>(r);
    }
    return true;
}

} // namespace

TcpMesh::TcpMesh(Role self, const std::string &listen_addr,
                 std::map<Role, std::string> peers)
    : self_(self), peers_(std::move(peers)) {
    if (!listen_addr.empty()) {
        std::string host;
        std::uint16_t port;
        split_host_port(listen_addr, host, port);
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw Error("socket() failed");
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1)
            throw Error("bad listen host: " + host);
        if (::bind(listen_fd_, reinterpret_cast<sockaddr *>(&sa), sizeof sa) != 0)
            throw Error("bind failed on " + listen_addr);
        if (::listen(listen_fd_, 64) != 0) throw Error("listen failed");
        socklen_t len = sizeof sa;
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr *>(&sa), &len);
        port_ = ntohs(sa.sin_port);
        threads_.emplace_back([this] { accept_loop(); });
    }
}

TcpMesh::~TcpMesh() {
    close();
    // Reader threads may still be registering; drain until none remain.
    for (;;) {
        std::vector<std::thread> batch;
        {
            std::lock_guard lk(mu_);
            batch.swap(threads_);
        }
        if (batch.empty()) break;
        for (auto &t : batch)
            if (t.joinable()) t.join();
    }
}

void TcpMesh::accept_loop() {
    for (;;) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) return; // listener shut down
        std::uint8_t hello;
        if (!read_all(fd, &hello, 1)) {
            ::close(fd);
            continue;
        }
        const Role src = static_cast<Role>(hello);
        {
            std::lock_guard lk(mu_);
            all_fds_.push_back(fd);
            // Clients are many and receive-only; everyone else becomes the
            // sendable channel for that role.
            if (src != Role::client && !conns_.count(src)) conns_[src] = fd;
        }
        start_reader(fd, src);
    }
}

void TcpMesh::start_reader(int fd, Role src) {
    std::lock_guard lk(mu_);
    if (closed_) return;
    threads_.emplace_back([this, fd, src] { reader_loop(fd, src); });
}

void TcpMesh::reader_loop(int fd, Role src) {
    for (;;) {
        std::uint8_t header[kFrameHeaderSize];
        if (!read_all(fd, header, sizeof header)) break;
        std::uint32_t len = 0;
        for (int i = 0; i < 4; ++i)
            len |= static_cast<std::uint32_t>(header[24 + i]) << (8 * i);
        if (len > kMaxFrameSize - kFrameHeaderSize) break;
        std::vector<std::uint8_t> buf(kFrameHeaderSize + len);
        std::memcpy(buf.data(), header, kFrameHeaderSize);
        if (len > 0 && !read_all(fd, buf.data() + kFrameHeaderSize, len)) break;
        Frame f;
        try {
            f = decode_frame(buf);
        } catch (const DecodeError &) {
            break;
        }
        std::lock_guard lk(mu_);
        inbox_.push_back({src, std::move(f)});
        cv_.notify_all();
    }
    cv_.notify_all();
}

void TcpMesh::add_peer(Role peer, const std::string &addr) {
    std::lock_guard lk(mu_);
    peers_[peer] = addr;
}

int TcpMesh::connect_to(Role dest) {
    std::string addr;
    {
        std::lock_guard lk(mu_);
        auto it = peers_.find(dest);
        if (it == peers_.end())
            throw ChannelClosed("no route to " + role_name(dest));
        addr = it->second;
    }
    std::string host;
    std::uint16_t port;
    split_host_port(addr, host, port);
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error("socket() failed");
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
        ::close(fd);
        throw Error("bad peer host: " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr *>(&sa), sizeof sa) != 0) {
        ::close(fd);
        throw ChannelClosed("connect failed to " + addr);
    }
    const std::uint8_t hello = static_cast<std::uint8_t>(self_);
    if (!write_all(fd, &hello, 1)) {
        ::close(fd);
        throw ChannelClosed("hello failed to " + addr);
    }
    {
        std::lock_guard lk(mu_);
        all_fds_.push_back(fd);
        conns_[dest] = fd;
    }
    start_reader(fd, dest);
    return fd;
}

void TcpMesh::send(Role dest, Frame f) {
    if (closed_) throw ChannelClosed("mesh closed");
    int fd;
    {
        std::lock_guard lk(mu_);
        auto it = conns_.find(dest);
        fd = it == conns_.end() ? -1 : it->second;
    }
    if (fd < 0) fd = connect_to(dest);
    const auto bytes = encode_frame(f);
    std::lock_guard lk(mu_); // one writer at a time per endpoint
    if (!write_all(fd, bytes.data(), bytes.size()))
        throw ChannelClosed("send failed to " + role_name(dest));
}

std::pair<Role, Frame> TcpMesh::recv(const Selector &sel,
                                     std::chrono::milliseconds timeout) {
    std::unique_lock lk(mu_);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        for (auto it = inbox_.begin(); it != inbox_.end(); ++it) {
            if (sel.matches(it->src, it->frame)) {
                auto out = std::make_pair(it->src, std::move(it->frame));
                inbox_.erase(it);
                return out;
            }
        }
        if (closed_) throw ChannelClosed("mesh closed");
        if (cv_.wait_until(lk, deadline) == std::cv_status::timeout)
            throw TimeoutError("recv deadline expired at " + role_name(self_));
    }
}

void TcpMesh::close() {
    bool expected = false;
    if (!closed_.compare_exchange_strong(expected, true)) return;
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
    }
    std::lock_guard lk(mu_);
    for (int fd : all_fds_) {
        ::shutdown(fd, SHUT_RDWR);
        ::close(fd);
    }
    cv_.notify_all();
}

} // namespace wfl
