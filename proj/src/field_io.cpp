#include "cmf/field_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace cmf {

namespace {

constexpr char kMagic[4] = {'C', 'Y', 'M', 'F'};

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes, std::size_t pos = 0)
        : bytes_(bytes), pos_(pos) {}

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f64(const char* what) {
        need(8, what);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(bits);
    }
    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n)
            throw FormatError(std::string("truncated field file while reading ") + what, bytes_.size());
    }
    std::size_t pos() const { return pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_;
};

void write_header(Writer& w, FieldKind kind, const CylinderGrid& g) {
    w.raw(kMagic, 4);
    w.u32(kFieldFormatVersion);
    w.u32(static_cast<std::uint32_t>(kind));
    w.u32(static_cast<std::uint32_t>(g.num_axes()));
    for (auto d : g.spatial_dims()) w.u32(static_cast<std::uint32_t>(d));
    w.u32(static_cast<std::uint32_t>(g.n_theta()));
    w.u32(kElementFloat64);
}

std::vector<double> read_values(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                                std::size_t count) {
    if ((bytes.size() - offset) / 8 < count) {
        // report the first value that is not fully present
        const std::size_t complete = (bytes.size() - offset) / 8;
        throw FormatError("truncated field payload: expected " + std::to_string(count) +
                              " values, found " + std::to_string(complete),
                          offset + complete * 8);
    }
    if (bytes.size() - offset != count * 8)
        throw FormatError("trailing bytes after field payload", offset + count * 8);
    Reader r(bytes, offset);
    std::vector<double> values(count);
    for (auto& v : values) {
        const std::size_t at = r.pos();
        v = r.f64("value");
        if (!std::isfinite(v)) throw FormatError("non-finite value in field payload", at);
    }
    return values;
}

FieldHeader expect_kind(const std::vector<std::uint8_t>& bytes, FieldKind kind) {
    auto h = decode_header(bytes);
    if (h.kind != kind)
        throw FormatError("field kind " + std::to_string(static_cast<unsigned>(h.kind)) +
                              " where kind " + std::to_string(static_cast<unsigned>(kind)) +
                              " was expected",
                          8);
    return h;
}

} // namespace

std::vector<std::uint8_t> encode_field(const SpatialField& f) {
    Writer w;
    write_header(w, FieldKind::spatial, f.grid());
    for (double v : f.values()) w.f64(v);
    return w.take();
}

std::vector<std::uint8_t> encode_field(const CyclicField& f) {
    Writer w;
    write_header(w, FieldKind::cyclic, f.grid());
    for (double v : f.values()) w.f64(v);
    return w.take();
}

std::vector<std::uint8_t> encode_field(const FlowField& f) {
    Writer w;
    write_header(w, FieldKind::flow, f.grid());
    for (std::size_t a = 0; a < f.num_components(); ++a)
        for (double v : f.component(a)) w.f64(v);
    return w.take();
}

FieldHeader decode_header(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) throw FormatError("truncated field file while reading magic", bytes.size());
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad field magic", 0);
    Reader r(bytes, 4);
    const auto version = r.u32("version");
    if (version != kFieldFormatVersion)
        throw FormatError("unsupported field version " + std::to_string(version), 4);
    const auto kind = r.u32("kind");
    if (kind < 1 || kind > 3) throw FormatError("unknown field kind " + std::to_string(kind), 8);
    const auto axes = r.u32("axis count");
    if (axes < 1 || axes > 3) throw FormatError("axis count must be 1-3", 12);
    std::vector<long long> dims;
    for (std::uint32_t a = 0; a < axes; ++a) {
        const std::size_t at = r.pos();
        const auto d = r.u32("spatial dim");
        if (d == 0) throw FormatError("zero spatial dim", at);
        dims.push_back(d);
    }
    const std::size_t theta_at = r.pos();
    const auto n_theta = r.u32("n_theta");
    if (n_theta < 2) throw FormatError("n_theta must be >= 2", theta_at);
    const std::size_t type_at = r.pos();
    const auto type = r.u32("element type");
    if (type != kElementFloat64) throw FormatError("unsupported element type", type_at);
    return FieldHeader{static_cast<FieldKind>(kind), make_grid(dims, n_theta), r.pos()};
}

SpatialField decode_spatial(const std::vector<std::uint8_t>& bytes) {
    auto h = expect_kind(bytes, FieldKind::spatial);
    auto values = read_values(bytes, h.payload_offset, h.grid.num_voxels());
    return SpatialField(h.grid, std::move(values));
}

CyclicField decode_cyclic(const std::vector<std::uint8_t>& bytes) {
    auto h = expect_kind(bytes, FieldKind::cyclic);
    auto values = read_values(bytes, h.payload_offset, h.grid.num_nodes());
    return CyclicField(h.grid, std::move(values));
}

FlowField decode_flow(const std::vector<std::uint8_t>& bytes) {
    auto h = expect_kind(bytes, FieldKind::flow);
    const std::size_t nodes = h.grid.num_nodes();
    const std::size_t comps = h.grid.num_axes() + 1;
    auto values = read_values(bytes, h.payload_offset, nodes * comps);
    FlowField f(h.grid);
    for (std::size_t a = 0; a < comps; ++a)
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(a * nodes), nodes,
                    f.component(a).begin());
    return f;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

bool is_field_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    char buf[4] = {};
    in.read(buf, 4);
    return in.gcount() == 4 && std::memcmp(buf, kMagic, 4) == 0;
}

} // namespace cmf
