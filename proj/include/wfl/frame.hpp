#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "wfl/errors.hpp"
#include "wfl/field.hpp"

namespace wfl {

using SessionId = std::array<std::uint8_t, 16>;

namespace msg {
// Protocol message types.
inline constexpr std::uint8_t RESHARE_R = 0x01;
inline constexpr std::uint8_t MUL_FORWARD = 0x02;
inline constexpr std::uint8_t OPEN_SHARE = 0x03;
inline constexpr std::uint8_t BEAVER_TRIPLE = 0x04;
inline constexpr std::uint8_t BEAVER_OPEN = 0x05;
// Aggregation-layer message types.
inline constexpr std::uint8_t CONTRIB = 0x10;
inline constexpr std::uint8_t CLIENT_SET = 0x11;
} // namespace msg

inline constexpr std::size_t kFrameHeaderSize = 28;
inline constexpr std::size_t kMaxFrameSize = 16u << 20; // 16 MiB total

/// One wire message. All multi-byte integers are little-endian.
struct Frame {
    std::uint8_t version = 1;
    SessionId session{};
    std::uint32_t round = 0;
    std::uint16_t step = 0;
    std::uint8_t type = 0;
    std::vector<std::uint8_t> payload;

    bool operator==(const Frame &) const = default;
};

std::vector<std::uint8_t> encode_frame(const Frame &f);

/// Throws DecodeError on any malformed input; never reads past the span.
Frame decode_frame(std::span<const std::uint8_t> bytes);

// ---- little-endian payload building blocks ----

inline void put_u16(std::vector<std::uint8_t> &out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(std::vector<std::uint8_t> &out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

/// Field elements serialize as 8-byte little-endian values.
inline void put_fe(std::vector<std::uint8_t> &out, const FieldElement &e) {
    put_u64(out, e.value());
}

/// Sequential little-endian reader over a payload.
class PayloadReader {
public:
    explicit PayloadReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint16_t u16() {
        auto b = take(2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::uint32_t u32() {
        auto b = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    FieldElement fe(const FieldConfig &cfg) {
        std::uint64_t v = u64();
        if (v >= cfg.p) throw DecodeError("field element out of range");
        return FieldElement::raw(v, cfg.p);
    }
    std::string str(std::size_t n) {
        auto b = take(n);
        return std::string(reinterpret_cast<const char *>(b.data()), n);
    }
    std::size_t remaining() const { return data_.size() - pos_; }
    void expect_end() const {
        if (remaining() != 0) throw DecodeError("trailing payload bytes");
    }

private:
    std::span<const std::uint8_t> take(std::size_t n) {
        if (remaining() < n) throw DecodeError("payload truncated");
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

} // namespace wfl
