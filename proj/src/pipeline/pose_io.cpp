#include "difreg/pipeline/pose_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "difreg/core/error.hpp"

namespace difreg {

RigidTransform parse_pose(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    Mat4 m;
    for (int i = 0; i < 16; ++i) {
        std::string token;
        if (!(in >> token)) fail(ErrorCode::Parse, origin + ": expected 16 numbers, found " + std::to_string(i));
        try {
            std::size_t used = 0;
            m(i / 4, i % 4) = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            fail(ErrorCode::Parse, origin + ": not a number: '" + token + "'");
        }
    }
    std::string extra;
    if (in >> extra) fail(ErrorCode::Parse, origin + ": trailing content after 16 numbers");
    return RigidTransform::from_matrix(m, 1e-4);
}

RigidTransform load_pose(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::FileMissing, "pose file not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_pose(ss.str(), path.string());
}

std::string format_pose(const RigidTransform& t) {
    const Mat4 m = t.matrix();
    std::string out;
    char buf[32];
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            out += buf;
            out += c == 3 ? '\n' : ' ';
        }
    }
    return out;
}

void write_pose(const std::filesystem::path& path, const RigidTransform& t) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open for writing: " + path.string());
    out << format_pose(t);
    if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

}  // namespace difreg
