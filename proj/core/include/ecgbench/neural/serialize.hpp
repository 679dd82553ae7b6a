#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ecgbench/neural/model.hpp"

namespace ecgbench::neural {

// Binary model container: magic "ECGN", format version (u32 LE), a
// length-prefixed JSON layer-graph descriptor, the parameter blob as
// little-endian f64 in layer order (weights, bias, running mean, running
// var), and a CRC32 footer over everything before it.  Round trips are
// bit-exact.
std::vector<unsigned char> serialize_model(const Model& model);

// Parses a container produced by serialize_model.  Throws FormatError on a
// bad magic, unsupported version, truncated payload, or checksum mismatch.
Model deserialize_model(const std::vector<unsigned char>& bytes);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace ecgbench::neural
