#pragma once
// Stable analysis identifiers: MD5 over nctId followed by the canonical JSON
// of the outcome and analysis subtrees. Canonical JSON here means keys sorted
// bytewise at every level, "," and ":" separators with no whitespace, raw
// UTF-8 strings. nlohmann::json stores objects in std::map, so a plain
// compact dump already has that shape.

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace ejab::ctg {

inline std::string canonical_json(const nlohmann::json& value) {
    return value.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

inline std::string md5_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_md5(), nullptr) != 1) {
        throw std::runtime_error("MD5 digest failed");
    }
    std::string hex(2 * length, '0');
    for (unsigned int i = 0; i < length; ++i) std::snprintf(&hex[2 * i], 3, "%02x", digest[i]);
    return hex;
}

inline std::string analysis_id(std::string_view nct_id, const nlohmann::json& outcome, const nlohmann::json& analysis) {
    std::string bytes(nct_id);
    bytes += canonical_json(outcome);
    bytes += canonical_json(analysis);
    return md5_hex(bytes);
}

}  // namespace ejab::ctg
