#pragma once

#include <ostream>
#include <string>

namespace thermalize {

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

/// Writes text to path, throwing on I/O failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace thermalize
