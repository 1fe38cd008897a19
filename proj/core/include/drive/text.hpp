#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace drive
{
    // Shortest decimal that round-trips to the same double.
    std::string format_double(double v);

    // Whole-string decimal parse; nullopt on garbage or trailing characters.
    std::optional<double> parse_double(std::string_view text);

    std::string read_text_file(const std::string &path);
}
