#pragma once

#include <string>

#include <json.hpp>

namespace chainpki {

/// The signed payload of a block: device identity, owner account name and
/// the device's public key in base64 text form.
struct DeviceRecord {
    std::string node_id;
    std::string owner_username;
    std::string device_public_key;

    bool operator==(const DeviceRecord&) const = default;
};

/// Canonical JSON text: keys sorted lexicographically, no insignificant
/// whitespace, UTF-8 throughout. The one encoding used for signing,
/// hashing and storage.
std::string canonical_dump(const nlohmann::json& value);

nlohmann::json record_to_json(const DeviceRecord& record);
DeviceRecord record_from_json(const nlohmann::json& value);

/// Canonical signing bytes of a record. Throws std::invalid_argument when
/// a field is empty, longer than 256 bytes, or not valid UTF-8.
std::string canonical_bytes(const DeviceRecord& record);

bool is_valid_utf8(std::string_view text);

}  // namespace chainpki
