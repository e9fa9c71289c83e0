#include "wfl/frame.hpp"

namespace wfl {

std::vector<std::uint8_t> encode_frame(const Frame &f) {
    if (f.payload.size() > kMaxFrameSize - kFrameHeaderSize)
        throw PayloadTooLarge("frame payload exceeds 16 MiB cap");
    std::vector<std::uint8_t> out;
    out.reserve(kFrameHeaderSize + f.payload.size());
    out.push_back(f.version);
    out.insert(out.end(), f.session.begin(), f.session.end());
    put_u32(out, f.round);
    put_u16(out, f.step);
    out.push_back(f.type);
    put_u32(out, static_cast<std::uint32_t>(f.payload.size()));
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFrameHeaderSize)
        throw DecodeError("frame shorter than header");
    PayloadReader r(bytes);
    Frame f;
    f.version = r.u8();
    if (f.version != 1) throw DecodeError("unsupported frame version");
    for (auto &b : f.session) b = r.u8();
    f.round = r.u32();
    f.step = r.u16();
    f.type = r.u8();
    const std::uint32_t len = r.u32();
    if (len > kMaxFrameSize - kFrameHeaderSize)
        throw DecodeError("declared payload exceeds frame cap");
    if (r.remaining() != len)
        throw DecodeError("payload length mismatch");
    f.payload.resize(len);
    for (std::uint32_t i = 0; i < len; ++i) f.payload[i] = r.u8();
    return f;
}

} // namespace wfl
