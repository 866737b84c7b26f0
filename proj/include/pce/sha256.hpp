#ifndef PCE_SHA256_HPP
#define PCE_SHA256_HPP

#include <string>

namespace pce {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& data);
std::string sha256_file_hex(const std::string& path);

}  // namespace pce

#endif
