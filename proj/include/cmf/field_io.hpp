#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmf/grid.hpp"

namespace cmf {

// Binary field file, all integers u32 little-endian:
//
//   offset 0   magic "CYMF"
//          4   version (1)
//          8   kind (1 spatial, 2 cyclic, 3 flow)
//         12   number of spatial axes A
//         16   A spatial dims
//   16 + 4A    n_theta
//   20 + 4A    element type (1 = float64 little-endian)
//   24 + 4A    values
//
// Spatial fields hold one value per voxel, cyclic fields one per node in
// grid layout, flow fields A + 1 consecutive node arrays in axis order.

enum class FieldKind : std::uint32_t { spatial = 1, cyclic = 2, flow = 3 };

inline constexpr std::uint32_t kFieldFormatVersion = 1;
inline constexpr std::uint32_t kElementFloat64 = 1;

/// Malformed or truncated input. offset() is the byte position where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

std::vector<std::uint8_t> encode_field(const SpatialField& f);
std::vector<std::uint8_t> encode_field(const CyclicField& f);
std::vector<std::uint8_t> encode_field(const FlowField& f);

struct FieldHeader {
    FieldKind kind;
    CylinderGrid grid;
    std::size_t payload_offset;
};

FieldHeader decode_header(const std::vector<std::uint8_t>& bytes);
SpatialField decode_spatial(const std::vector<std::uint8_t>& bytes);
CyclicField decode_cyclic(const std::vector<std::uint8_t>& bytes);
FlowField decode_flow(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

/// True if the file starts with the field magic.
bool is_field_file(const std::filesystem::path& path);

template <class Field>
void save_field(const std::filesystem::path& path, const Field& f) {
    write_file_bytes(path, encode_field(f));
}

inline SpatialField load_spatial(const std::filesystem::path& path) {
    return decode_spatial(read_file_bytes(path));
}
inline CyclicField load_cyclic(const std::filesystem::path& path) {
    return decode_cyclic(read_file_bytes(path));
}
inline FlowField load_flow(const std::filesystem::path& path) {
    return decode_flow(read_file_bytes(path));
}

} // namespace cmf
