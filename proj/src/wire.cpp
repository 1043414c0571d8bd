#include "feather/wire.hpp"

#include <json.hpp>

namespace feather {

Bytes encode_frame(const WireMessage& msg)
{
    if (msg.kind.find('\n') != std::string::npos) {
        throw WireError(WireError::Kind::Malformed, "BadKind", "message kind contains a newline");
    }
    const std::size_t length = msg.kind.size() + 1 + msg.body.size();
    if (length > kMaxFrameSize) {
        throw WireError(WireError::Kind::FrameTooLarge, "FrameTooLarge",
                        "frame of " + std::to_string(length) + " bytes exceeds limit");
    }
    Bytes out;
    out.reserve(4 + length);
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(length >> shift));
    out.insert(out.end(), msg.kind.begin(), msg.kind.end());
    out.push_back('\n');
    out.insert(out.end(), msg.body.begin(), msg.body.end());
    return out;
}

std::uint32_t read_frame_length(ByteSpan prefix)
{
    if (prefix.size() < 4) throw WireError(WireError::Kind::Malformed, "Truncated", "short frame prefix");
    const std::uint32_t length = (std::uint32_t{prefix[0]} << 24) | (std::uint32_t{prefix[1]} << 16) |
                                 (std::uint32_t{prefix[2]} << 8) | std::uint32_t{prefix[3]};
    if (length > kMaxFrameSize) {
        throw WireError(WireError::Kind::FrameTooLarge, "FrameTooLarge",
                        "frame of " + std::to_string(length) + " bytes exceeds limit");
    }
    return length;
}

WireMessage decode_frame_payload(ByteSpan payload)
{
    std::string_view text(reinterpret_cast<const char*>(payload.data()), payload.size());
    auto nl = text.find('\n');
    if (nl == std::string_view::npos || nl == 0) {
        throw WireError(WireError::Kind::Malformed, "BadFrame", "frame has no kind tag");
    }
    return {std::string(text.substr(0, nl)), std::string(text.substr(nl + 1))};
}

WireMessage decode_frame(ByteSpan frame)
{
    const std::uint32_t length = read_frame_length(frame);
    if (frame.size() - 4 != length) {
        throw WireError(WireError::Kind::Malformed, "BadFrame", "frame length prefix does not match payload");
    }
    return decode_frame_payload(frame.subspan(4));
}

WireMessage make_error(std::string_view code, std::string_view message)
{
    nlohmann::json body{{"code", code}, {"message", message}};
    return {std::string(kind::kError), body.dump()};
}

void raise_if_error(const WireMessage& msg)
{
    if (msg.kind != kind::kError) return;
    std::string code = "Unknown";
    std::string message = msg.body;
    try {
        auto body = nlohmann::json::parse(msg.body);
        code = body.value("code", code);
        message = body.value("message", message);
    } catch (const nlohmann::json::exception&) {
    }
    throw WireError(WireError::Kind::Remote, code, code + ": " + message);
}

} // namespace feather
