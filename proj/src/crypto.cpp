#include "feather/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

namespace feather {

Hash256 sha256(ByteSpan data)
{
    Hash256 out;
    SHA256(data.data(), data.size(), out.bytes.data());
    return out;
}

Hash256 double_sha256(ByteSpan data)
{
    Hash256 first = sha256(data);
    return sha256(first.span());
}

Hash256 hmac_sha256(ByteSpan key, ByteSpan data)
{
    Hash256 out;
    unsigned int len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
         out.bytes.data(), &len);
    if (len != Hash256::kSize) throw FeatherError("HMAC-SHA256 failed");
    return out;
}

bool constant_time_equal(ByteSpan a, ByteSpan b)
{
    if (a.size() != b.size()) return false;
    return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

} // namespace feather
