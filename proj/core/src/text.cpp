#include "drive/text.hpp"

#include "drive/errors.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace drive
{
    std::string format_double(double v)
    {
        std::array<char, 64> buf{};
        const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
        if (ec != std::errc{})
        {
            throw Error(ErrorCode::Internal, "format_double failed");
        }
        return std::string(buf.data(), end);
    }

    std::optional<double> parse_double(std::string_view text)
    {
        // from_chars rejects a leading '+', which hand-edited files do contain.
        if (!text.empty() && text.front() == '+')
        {
            text.remove_prefix(1);
        }
        if (text.empty())
        {
            return std::nullopt;
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size())
        {
            return std::nullopt;
        }
        return v;
    }

    std::string read_text_file(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw Error(ErrorCode::Io, "cannot open " + path);
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
}
