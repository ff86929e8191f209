#include "difreg/pipeline/ply.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "difreg/core/error.hpp"

namespace difreg {
namespace {

enum class Type { I8, U8, I16, U16, I32, U32, F32, F64 };

bool parse_type(const std::string& s, Type& t) {
    if (s == "char" || s == "int8") t = Type::I8;
    else if (s == "uchar" || s == "uint8") t = Type::U8;
    else if (s == "short" || s == "int16") t = Type::I16;
    else if (s == "ushort" || s == "uint16") t = Type::U16;
    else if (s == "int" || s == "int32") t = Type::I32;
    else if (s == "uint" || s == "uint32") t = Type::U32;
    else if (s == "float" || s == "float32") t = Type::F32;
    else if (s == "double" || s == "float64") t = Type::F64;
    else return false;
    return true;
}

std::size_t type_size(Type t) {
    switch (t) {
        case Type::I8: case Type::U8: return 1;
        case Type::I16: case Type::U16: return 2;
        case Type::I32: case Type::U32: case Type::F32: return 4;
        case Type::F64: return 8;
    }
    return 0;
}

double read_le(const unsigned char* p, Type t) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < type_size(t); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    switch (t) {
        case Type::I8: return static_cast<std::int8_t>(v);
        case Type::U8: return static_cast<std::uint8_t>(v);
        case Type::I16: return static_cast<std::int16_t>(v);
        case Type::U16: return static_cast<std::uint16_t>(v);
        case Type::I32: return static_cast<std::int32_t>(v);
        case Type::U32: return static_cast<std::uint32_t>(v);
        case Type::F32: return std::bit_cast<float>(static_cast<std::uint32_t>(v));
        case Type::F64: return std::bit_cast<double>(v);
    }
    return 0.0;
}

struct Property {
    std::string name;
    Type type = Type::F32;
    bool is_list = false;
    Type count_type = Type::U8;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> props;
};

[[noreturn]] void parse_error(const std::filesystem::path& path, const std::string& where, const std::string& what) {
    fail(ErrorCode::Parse, path.string() + " (" + where + "): " + what);
}

struct VertexLayout {
    int x = -1, y = -1, z = -1;
    std::vector<int> desc;  // property index of desc_k
};

VertexLayout vertex_layout(const Element& e, const std::filesystem::path& path) {
    VertexLayout l;
    std::vector<std::pair<int, int>> desc;  // (k, prop)
    for (int i = 0; i < static_cast<int>(e.props.size()); ++i) {
        const auto& p = e.props[static_cast<std::size_t>(i)];
        if (p.name == "x") l.x = i;
        else if (p.name == "y") l.y = i;
        else if (p.name == "z") l.z = i;
        else if (p.name.rfind("desc_", 0) == 0) {
            try {
                desc.emplace_back(std::stoi(p.name.substr(5)), i);
            } catch (const std::exception&) {
            }
        }
    }
    if (l.x < 0 || l.y < 0 || l.z < 0) parse_error(path, "header", "vertex element lacks x, y or z");
    for (int i : {l.x, l.y, l.z})
        if (e.props[static_cast<std::size_t>(i)].is_list) parse_error(path, "header", "x/y/z cannot be list properties");
    std::sort(desc.begin(), desc.end());
    for (std::size_t k = 0; k < desc.size(); ++k) {
        if (desc[k].first != static_cast<int>(k)) parse_error(path, "header", "descriptor properties must be desc_0..desc_{D-1}");
        l.desc.push_back(desc[k].second);
    }
    return l;
}

}  // namespace

PlyData read_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::FileMissing, "PLY file not found: " + path.string());

    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };
    auto where = [&]() { return "line " + std::to_string(line_no); };

    if (!next_line() || line != "ply") parse_error(path, "line 1", "missing 'ply' magic");
    bool binary = false, have_format = false;
    std::vector<Element> elements;
    for (;;) {
        if (!next_line()) parse_error(path, where(), "header not terminated by end_header");
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw.empty() || kw == "comment" || kw == "obj_info") continue;
        if (kw == "end_header") break;
        if (kw == "format") {
            std::string fmt, ver;
            ls >> fmt >> ver;
            if (fmt == "ascii") binary = false;
            else if (fmt == "binary_little_endian") binary = true;
            else parse_error(path, where(), "unsupported format '" + fmt + "'");
            have_format = true;
        } else if (kw == "element") {
            Element e;
            long long count = -1;
            ls >> e.name >> count;
            if (e.name.empty() || count < 0 || ls.fail()) parse_error(path, where(), "malformed element line");
            e.count = static_cast<std::size_t>(count);
            elements.push_back(std::move(e));
        } else if (kw == "property") {
            if (elements.empty()) parse_error(path, where(), "property before any element");
            Property p;
            std::string t;
            ls >> t;
            if (t == "list") {
                std::string ct, it;
                ls >> ct >> it >> p.name;
                p.is_list = true;
                if (!parse_type(ct, p.count_type) || !parse_type(it, p.type)) parse_error(path, where(), "bad list types");
            } else {
                ls >> p.name;
                if (!parse_type(t, p.type)) parse_error(path, where(), "unknown property type '" + t + "'");
            }
            if (p.name.empty()) parse_error(path, where(), "property without a name");
            elements.back().props.push_back(std::move(p));
        } else {
            parse_error(path, where(), "unexpected header keyword '" + kw + "'");
        }
    }
    if (!have_format) parse_error(path, "header", "missing format line");

    PlyData out;
    bool found_vertex = false;
    for (const auto& e : elements) {
        const bool is_vertex = e.name == "vertex";
        if (is_vertex && found_vertex) parse_error(path, "header", "duplicate vertex element");
        VertexLayout layout;
        if (is_vertex) {
            layout = vertex_layout(e, path);
            found_vertex = true;
            out.points.reserve(e.count);
            out.descriptors = FeatureMatrix(0, layout.desc.size());
        }
        std::vector<double> values(e.props.size());
        std::vector<double> desc(layout.desc.size());

        auto emit = [&]() {
            out.points.emplace_back(values[static_cast<std::size_t>(layout.x)], values[static_cast<std::size_t>(layout.y)],
                                    values[static_cast<std::size_t>(layout.z)]);
            if (!layout.desc.empty()) {
                for (std::size_t k = 0; k < desc.size(); ++k) desc[k] = values[static_cast<std::size_t>(layout.desc[k])];
                out.descriptors.append_row(desc);
            }
        };

        if (!binary) {
            for (std::size_t r = 0; r < e.count; ++r) {
                if (!next_line())
                    parse_error(path, where(), "element-count mismatch: header declares " + std::to_string(e.count) + " " +
                                                   e.name + " rows, file ends after " + std::to_string(r));
                std::istringstream ls(line);
                for (std::size_t i = 0; i < e.props.size(); ++i) {
                    const auto& p = e.props[i];
                    if (p.is_list) {
                        double n = 0;
                        if (!(ls >> n) || n < 0) parse_error(path, where(), "bad list count");
                        double skip = 0;
                        for (long long k = 0; k < static_cast<long long>(n); ++k)
                            if (!(ls >> skip)) parse_error(path, where(), "short list");
                        values[i] = 0.0;
                    } else if (!(ls >> values[i])) {
                        parse_error(path, where(), "expected " + std::to_string(e.props.size()) + " values for " + e.name);
                    }
                }
                if (is_vertex) emit();
            }
        } else {
            std::vector<unsigned char> buf(16);
            auto read_bytes = [&](std::size_t n) {
                if (buf.size() < n) buf.resize(n);
                const auto offset = static_cast<long long>(in.tellg());
                if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n)))
                    parse_error(path, "byte offset " + std::to_string(offset),
                                "element-count mismatch: file ends inside element '" + e.name + "'");
            };
            for (std::size_t r = 0; r < e.count; ++r) {
                for (std::size_t i = 0; i < e.props.size(); ++i) {
                    const auto& p = e.props[i];
                    if (p.is_list) {
                        read_bytes(type_size(p.count_type));
                        const double n = read_le(buf.data(), p.count_type);
                        if (n < 0) parse_error(path, "binary body", "negative list count");
                        read_bytes(type_size(p.type) * static_cast<std::size_t>(n));
                        values[i] = 0.0;
                    } else {
                        read_bytes(type_size(p.type));
                        values[i] = read_le(buf.data(), p.type);
                    }
                }
                if (is_vertex) emit();
            }
        }
    }
    if (!found_vertex) parse_error(path, "header", "no vertex element");
    if (!all_finite(out.points)) parse_error(path, "body", "non-finite vertex coordinate");
    return out;
}

PointCloud load_ply(const std::filesystem::path& path) {
    PointCloud cloud;
    cloud.points = read_ply(path).points;
    return cloud;
}

void write_ply(const std::filesystem::path& path, std::span<const Vec3> points, const FeatureMatrix* descriptors,
               PlyFormat format, PlyScalar scalar) {
    if (descriptors && descriptors->rows() != points.size())
        fail(ErrorCode::InvalidInput, "write_ply: descriptor rows must equal point count");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open for writing: " + path.string());

    const std::size_t dim = descriptors ? descriptors->dim() : 0;
    const char* coord_type = scalar == PlyScalar::Float64 ? "double" : "float";
    out << "ply\nformat " << (format == PlyFormat::Ascii ? "ascii" : "binary_little_endian") << " 1.0\n";
    out << "element vertex " << points.size() << "\n";
    for (const char* axis : {"x", "y", "z"}) out << "property " << coord_type << ' ' << axis << "\n";
    for (std::size_t k = 0; k < dim; ++k) out << "property float desc_" << k << "\n";
    out << "end_header\n";

    if (format == PlyFormat::Ascii) {
        out << std::setprecision(scalar == PlyScalar::Float64 ? 17 : 9);
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (int a = 0; a < 3; ++a) {
                if (a) out << ' ';
                if (scalar == PlyScalar::Float64) out << points[i][a];
                else out << static_cast<float>(points[i][a]);
            }
            for (std::size_t k = 0; k < dim; ++k) out << ' ' << static_cast<float>(descriptors->row(i)[k]);
            out << '\n';
        }
    } else {
        auto put = [&](std::uint64_t bits, int bytes) {
            char b[8];
            for (int i = 0; i < bytes; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
            out.write(b, bytes);
        };
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (int a = 0; a < 3; ++a) {
                if (scalar == PlyScalar::Float64) put(std::bit_cast<std::uint64_t>(points[i][a]), 8);
                else put(std::bit_cast<std::uint32_t>(static_cast<float>(points[i][a])), 4);
            }
            for (std::size_t k = 0; k < dim; ++k)
                put(std::bit_cast<std::uint32_t>(static_cast<float>(descriptors->row(i)[k])), 4);
        }
    }
    if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

}  // namespace difreg
