#pragma once

#include "feather/bytes.hpp"
#include "feather/hash.hpp"

namespace feather {

Hash256 sha256(ByteSpan data);
/// SHA-256 applied twice, the header and Merkle node hash.
Hash256 double_sha256(ByteSpan data);
Hash256 hmac_sha256(ByteSpan key, ByteSpan data);

/// Constant-time equality for authenticators.
bool constant_time_equal(ByteSpan a, ByteSpan b);

} // namespace feather
