#include "chainpki/record.hpp"

#include <stdexcept>

namespace chainpki {

std::string canonical_dump(const nlohmann::json& value) {
    // nlohmann::json keeps object keys in std::map order, which is the
    // lexicographic order the canonical form requires; dump() emits UTF-8
    // with no insignificant whitespace.
    return value.dump();
}

bool is_valid_utf8(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        std::size_t len;
        std::uint32_t cp;
        if (c < 0x80) {
            len = 1;
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > text.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(text[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Reject overlong forms and surrogates.
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
            (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
            (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        i += len;
    }
    return true;
}

namespace {

void check_field(std::string_view name, std::string_view value) {
    if (value.empty()) {
        throw std::invalid_argument(std::string(name) + " must be non-empty");
    }
    if (value.size() > 256) {
        throw std::invalid_argument(std::string(name) + " exceeds 256 bytes");
    }
    if (!is_valid_utf8(value)) {
        throw std::invalid_argument(std::string(name) + " is not valid UTF-8");
    }
}

}  // namespace

nlohmann::json record_to_json(const DeviceRecord& record) {
    return {
        {"device_public_key", record.device_public_key},
        {"node_id", record.node_id},
        {"owner_username", record.owner_username},
    };
}

DeviceRecord record_from_json(const nlohmann::json& value) {
    DeviceRecord record;
    record.node_id = value.at("node_id").get<std::string>();
    record.owner_username = value.at("owner_username").get<std::string>();
    record.device_public_key = value.at("device_public_key").get<std::string>();
    return record;
}

std::string canonical_bytes(const DeviceRecord& record) {
    check_field("node_id", record.node_id);
    check_field("owner_username", record.owner_username);
    if (!is_valid_utf8(record.device_public_key)) {
        throw std::invalid_argument("device_public_key is not valid UTF-8");
    }
    return canonical_dump(record_to_json(record));
}

}  // namespace chainpki
