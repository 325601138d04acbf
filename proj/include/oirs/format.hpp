#pragma once
// Locale-independent number formatting ('.' decimal point).

#include <charconv>
#include <cmath>
#include <string>

namespace oirs {

/// Shortest representation that round-trips; "nan"/"inf" for non-finite values.
inline std::string format_number(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// General format with `digits` significant digits.
inline std::string format_number(double x, int digits)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, digits);
    return std::string(buf, res.ptr);
}

/// JSON has no literal for non-finite numbers; they are written as null.
inline std::string json_number(double x, int digits = 17)
{
    return std::isfinite(x) ? format_number(x, digits) : std::string("null");
}

} // namespace oirs
