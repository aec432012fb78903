#pragma once

#include <string>

namespace formline {

// Lowercase hex SHA-1 digest.
std::string sha1_hex(const std::string& data);

// Hash of "blob <len>\0<data>", matching how git hashes file contents.
std::string git_blob_hash(const std::string& data);

}  // namespace formline
