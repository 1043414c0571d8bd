#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "feather/bytes.hpp"

namespace feather {

/// Message kinds understood by the node and ledger services.
namespace kind {
inline constexpr std::string_view kGetTip = "GET_TIP";
inline constexpr std::string_view kGetHeaders = "GET_HEADERS";
inline constexpr std::string_view kGetHeaderByHash = "GET_HEADER_BY_HASH";
inline constexpr std::string_view kGetMerkleProof = "GET_MERKLE_PROOF";
inline constexpr std::string_view kGetBlock = "GET_BLOCK";
inline constexpr std::string_view kSubmitBundle = "SUBMIT_BUNDLE";
inline constexpr std::string_view kGetLatestCheckpoint = "GET_LATEST_CHECKPOINT";
inline constexpr std::string_view kGetCheckpointAtOrBelow = "GET_CHECKPOINT_AT_OR_BELOW";
inline constexpr std::string_view kError = "ERROR";
} // namespace kind

/// Frames larger than this are refused on both ends.
inline constexpr std::uint32_t kMaxFrameSize = 16u * 1024 * 1024;

/// One framed message: kind tag plus a JSON text body.
///
/// On the wire: u32 big-endian length, then `kind`, '\n', `body`. The
/// length counts everything after the prefix.
struct WireMessage {
    std::string kind;
    std::string body;

    friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

class WireError : public FeatherError {
public:
    enum class Kind { FrameTooLarge, Malformed, Remote };
    WireError(Kind kind, std::string code, const std::string& what)
        : FeatherError(what), kind_(kind), code_(std::move(code))
    {
    }
    Kind kind() const { return kind_; }
    /// Structured error code; for Remote errors, the peer's code.
    const std::string& code() const { return code_; }

private:
    Kind kind_;
    std::string code_;
};

Bytes encode_frame(const WireMessage& msg);
/// Parses the payload that follows the length prefix.
WireMessage decode_frame_payload(ByteSpan payload);
/// Parses a complete frame including the prefix; requires the exact length.
WireMessage decode_frame(ByteSpan frame);
std::uint32_t read_frame_length(ByteSpan prefix);

WireMessage make_error(std::string_view code, std::string_view message);

/// Throws WireError(Remote) if `msg` is an ERROR reply.
void raise_if_error(const WireMessage& msg);

} // namespace feather
