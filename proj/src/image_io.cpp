#include "cmf/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <fstream>
#include <string>

#include "cmf/field_io.hpp"

namespace cmf {

std::vector<double> Image::plane(std::size_t c) const {
    std::vector<double> out(width * height);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = samples[i * channels + c];
    return out;
}

namespace {

class HeaderParser {
public:
    explicit HeaderParser(const std::vector<std::uint8_t>& b) : b_(b) {}

    void skip_space_and_comments() {
        while (pos_ < b_.size()) {
            if (b_[pos_] == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
            } else if (std::isspace(b_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        unsigned long v = 0;
        while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
            v = v * 10 + (b_[pos_] - '0');
            if (v > 1u << 30) throw FormatError(std::string("netpbm ") + what + " too large", start);
            ++pos_;
        }
        if (pos_ == start) {
            if (pos_ >= b_.size()) throw FormatError(std::string("truncated netpbm header reading ") + what, pos_);
            throw FormatError(std::string("expected netpbm ") + what, pos_);
        }
        return v;
    }

    std::size_t pos() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }

private:
    const std::vector<std::uint8_t>& b_;
    std::size_t pos_ = 2;
};

} // namespace

Image decode_netpbm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2) throw FormatError("truncated netpbm magic", bytes.size());
    if (bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw FormatError("not a binary PGM/PPM (expected P5 or P6)", 0);
    Image img;
    img.channels = bytes[1] == '5' ? 1 : 3;
    HeaderParser p(bytes);
    img.width = p.number("width");
    img.height = p.number("height");
    p.skip_space_and_comments();
    const std::size_t maxval_at = p.pos();
    const auto maxval = p.number("maxval");
    if (img.width == 0 || img.height == 0) throw FormatError("netpbm image has zero size", maxval_at);
    if (maxval == 0 || maxval > 65535) throw FormatError("netpbm maxval must be 1-65535", maxval_at);
    img.maxval = static_cast<unsigned>(maxval);
    if (p.pos() >= bytes.size() || !std::isspace(bytes[p.pos()]))
        throw FormatError("missing whitespace after netpbm maxval", p.pos());
    p.advance(1);

    const std::size_t bps = maxval > 255 ? 2 : 1;
    const std::size_t count = img.width * img.height * img.channels;
    const std::size_t start = p.pos();
    if (bytes.size() - start < count * bps) {
        const std::size_t complete = (bytes.size() - start) / bps;
        throw FormatError("truncated netpbm raster: expected " + std::to_string(count) + " samples, found " +
                              std::to_string(complete),
                          start + complete * bps);
    }
    img.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        unsigned v = bps == 1 ? bytes[start + i]
                              : (static_cast<unsigned>(bytes[start + 2 * i]) << 8) | bytes[start + 2 * i + 1];
        if (v > maxval) throw FormatError("netpbm sample exceeds maxval", start + i * bps);
        img.samples[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
    return img;
}

Image read_netpbm(const std::filesystem::path& path) { return decode_netpbm(read_file_bytes(path)); }

void write_netpbm8(const std::filesystem::path& path, const Image& image) {
    if (image.channels != 1 && image.channels != 3)
        throw std::invalid_argument("netpbm output needs 1 or 3 channels");
    const std::string header = std::string(image.channels == 1 ? "P5\n" : "P6\n") + std::to_string(image.width) +
                               " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    for (double s : image.samples) {
        const double c = std::clamp(s, 0.0, 1.0);
        bytes.push_back(static_cast<std::uint8_t>(std::lround(c * 255.0)));
    }
    write_file_bytes(path, bytes);
}

std::uint8_t angle_to_byte(double angle) {
    const double t = (angle + std::numbers::pi) / kTwoPi;
    const long v = static_cast<long>(std::floor(t * 256.0));
    return static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
}

void angle_to_rgb(double angle, double& r, double& g, double& b) {
    double h = std::fmod(angle, kTwoPi);
    if (h < 0.0) h += kTwoPi;
    h /= std::numbers::pi / 3.0; // sextant in [0, 6)
    const double x = 1.0 - std::fabs(std::fmod(h, 2.0) - 1.0);
    switch (static_cast<int>(h) % 6) {
    case 0: r = 1, g = x, b = 0; break;
    case 1: r = x, g = 1, b = 0; break;
    case 2: r = 0, g = 1, b = x; break;
    case 3: r = 0, g = x, b = 1; break;
    case 4: r = x, g = 0, b = 1; break;
    default: r = 1, g = 0, b = x; break;
    }
}

} // namespace cmf
