#pragma once

#include <charconv>
#include <string>

namespace casimir::detail {

// Shortest decimal form that round-trips to the same double. Keeps CSV and
// SVG output byte-deterministic and re-parsable without loss.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace casimir::detail
