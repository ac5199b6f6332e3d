#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cmf {

/// Decoded binary netpbm image (P5 grayscale or P6 RGB, 8 or 16 bit).
/// Samples are row-major, interleaved for RGB, scaled to [0, 1].
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    unsigned maxval = 255;
    std::vector<double> samples;

    /// Channel `c` as a row-major plane.
    std::vector<double> plane(std::size_t c) const;
};

/// Throws FormatError (with byte offset) on malformed or truncated data.
Image decode_netpbm(const std::vector<std::uint8_t>& bytes);
Image read_netpbm(const std::filesystem::path& path);

/// Writes an 8-bit P5 (channels == 1) or P6 (channels == 3) image from [0, 1] samples.
void write_netpbm8(const std::filesystem::path& path, const Image& image);

/// Angle in [-pi, pi) to a byte: 0 at -pi rising to 255 just below +pi. The
/// preview is discontinuous at the seam between 255 and 0.
std::uint8_t angle_to_byte(double angle);

/// Fully saturated hue-wheel colour for an angle, red at 0.
void angle_to_rgb(double angle, double& r, double& g, double& b);

} // namespace cmf
