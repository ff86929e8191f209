#include "difreg/backend/rft.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "difreg/core/error.hpp"

namespace difreg {
namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
}

std::uint16_t get_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_rft(const FeatureMap& fm) {
    fm.validate();
    if (fm.layer_id < 0 || fm.layer_id > std::numeric_limits<std::uint16_t>::max())
        fail(ErrorCode::InvalidInput, "encode_rft: layer id does not fit in 16 bits");
    std::vector<std::uint8_t> out;
    out.reserve(kRftHeaderBytes + fm.data.size() * 4);
    for (char ch : {'R', 'F', 'T', '1'}) out.push_back(static_cast<std::uint8_t>(ch));
    put_u16(out, kRftVersion);
    put_u16(out, static_cast<std::uint16_t>(fm.layer_id));
    put_u32(out, static_cast<std::uint32_t>(fm.height));
    put_u32(out, static_cast<std::uint32_t>(fm.width));
    put_u32(out, static_cast<std::uint32_t>(fm.channels));
    for (float v : fm.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

FeatureMap decode_rft(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || !(bytes[0] == 'R' && bytes[1] == 'F' && bytes[2] == 'T' && bytes[3] == '1'))
        fail(ErrorCode::FormatMagic, "RFT1: bad magic");
    if (bytes.size() < kRftHeaderBytes) fail(ErrorCode::FormatPayloadLength, "RFT1: truncated header");
    const std::uint8_t* p = bytes.data();
    const auto version = get_u16(p + 4);
    if (version != kRftVersion) fail(ErrorCode::FormatMagic, "RFT1: unsupported version " + std::to_string(version));
    const auto layer = get_u16(p + 6);
    const std::uint64_t h = get_u32(p + 8), w = get_u32(p + 12), c = get_u32(p + 16);
    constexpr std::uint64_t kMaxDim = static_cast<std::uint64_t>(std::numeric_limits<int>::max());
    if (h == 0 || w == 0 || c == 0 || h > kMaxDim || w > kMaxDim || c > kMaxDim)
        fail(ErrorCode::FormatDimensionOverflow, "RFT1: invalid dimensions");
    // h, w, c < 2^31, so h·w fits in 62 bits; guard the remaining products explicitly.
    const std::uint64_t hw = h * w;
    if (hw > std::numeric_limits<std::uint64_t>::max() / c / 4)
        fail(ErrorCode::FormatDimensionOverflow, "RFT1: H*W*C overflows");
    const std::uint64_t count = hw * c;
    if (count > static_cast<std::uint64_t>(std::numeric_limits<std::ptrdiff_t>::max() / 4))
        fail(ErrorCode::FormatDimensionOverflow, "RFT1: payload too large");
    const std::uint64_t expected = kRftHeaderBytes + count * 4;
    if (bytes.size() != expected)
        fail(ErrorCode::FormatPayloadLength, "RFT1: payload is " + std::to_string(bytes.size() - kRftHeaderBytes) +
                                                 " bytes, header implies " + std::to_string(count * 4));

    FeatureMap fm;
    fm.height = static_cast<int>(h);
    fm.width = static_cast<int>(w);
    fm.channels = static_cast<int>(c);
    fm.layer_id = layer;
    fm.data.resize(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < fm.data.size(); ++i) {
        fm.data[i] = std::bit_cast<float>(get_u32(p + kRftHeaderBytes + 4 * i));
        if (!std::isfinite(fm.data[i])) fail(ErrorCode::InvalidInput, "RFT1: non-finite payload value");
    }
    return fm;
}

void write_feature_file(const FeatureMap& fm, const std::filesystem::path& path) {
    const auto bytes = encode_rft(fm);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

FeatureMap load_feature_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::FileMissing, "feature file not found: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorCode::Io, "read failed: " + path.string());
    try {
        return decode_rft(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::string feature_file_name(const std::string& depth_id, int layer_id) {
    return depth_id + ".layer" + std::to_string(layer_id) + ".rft";
}

}  // namespace difreg
