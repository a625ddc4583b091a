#ifndef RULED_FORMAT_HPP
#define RULED_FORMAT_HPP

#include <charconv>
#include <string>
#include <system_error>

namespace ruled {

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_double(double value)
{
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) {
        return "nan";
    }
    // -0 prints as "-0"; normalize so output does not depend on the sign of zero.
    if (value == 0.0) {
        return "0";
    }
    return std::string(buffer, end);
}

} // namespace ruled

#endif // RULED_FORMAT_HPP
