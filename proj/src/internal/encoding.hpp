#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gptpat::internal {

std::string base64_encode(const std::uint8_t* data, std::size_t size);
// Throws std::invalid_argument on non-base64 input.
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Little-endian float64 <-> bytes, for model files.
std::string doubles_to_base64(const double* data, std::size_t count);
std::vector<double> base64_to_doubles(const std::string& text);

}  // namespace gptpat::internal
