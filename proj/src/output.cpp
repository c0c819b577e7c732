#include "thermalize/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "thermalize/errors.hpp"

namespace thermalize {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file " + path);
    out << text;
    if (!out) throw Error("failed writing output file " + path);
}

}  // namespace thermalize
