#include "drive/errors.hpp"
#include "drive/route.hpp"
#include "drive/text.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <optional>

namespace drive
{
    namespace
    {
        struct Tag
        {
            enum class Kind
            {
                Open,
                SelfClosing,
                Close,
            };
            Kind kind = Kind::Open;
            std::string name;
            std::map<std::string, std::string> attributes;
            int line = 1;
        };

        // Reads the element structure of a small XML document. Prolog, comments and
        // whitespace are skipped; character data anywhere else is an error.
        class XmlReader
        {
        public:
            explicit XmlReader(std::string_view text) : m_text(text) {}

            std::optional<Tag> next()
            {
                for (;;)
                {
                    skip_space();
                    if (m_pos >= m_text.size())
                    {
                        return std::nullopt;
                    }
                    if (m_text[m_pos] != '<')
                    {
                        fail("unexpected character data");
                    }
                    if (starts_with("<?"))
                    {
                        skip_past("?>", "unterminated processing instruction");
                        continue;
                    }
                    if (starts_with("<!--"))
                    {
                        skip_past("-->", "unterminated comment");
                        continue;
                    }
                    if (starts_with("<!"))
                    {
                        fail("DTD declarations are not supported");
                    }
                    return read_tag();
                }
            }

            int line() const noexcept { return m_line; }

            [[noreturn]] void fail(const std::string &reason) const { throw ParseError(m_line, reason); }

        private:
            bool starts_with(std::string_view s) const { return m_text.substr(m_pos, s.size()) == s; }

            void advance()
            {
                if (m_text[m_pos] == '\n')
                {
                    ++m_line;
                }
                ++m_pos;
            }

            void skip_space()
            {
                while (m_pos < m_text.size() && std::isspace(static_cast<unsigned char>(m_text[m_pos])))
                {
                    advance();
                }
            }

            void skip_past(std::string_view terminator, const char *error)
            {
                while (m_pos < m_text.size() && !starts_with(terminator))
                {
                    advance();
                }
                if (m_pos >= m_text.size())
                {
                    fail(error);
                }
                m_pos += terminator.size();
            }

            std::string read_name()
            {
                const std::size_t start = m_pos;
                while (m_pos < m_text.size())
                {
                    const char c = m_text[m_pos];
                    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' || c == '.')
                    {
                        ++m_pos;
                    }
                    else
                    {
                        break;
                    }
                }
                if (m_pos == start)
                {
                    fail("expected a name");
                }
                return std::string(m_text.substr(start, m_pos - start));
            }

            std::string decode_entities(std::string_view raw)
            {
                std::string out;
                for (std::size_t i = 0; i < raw.size(); ++i)
                {
                    if (raw[i] != '&')
                    {
                        out.push_back(raw[i]);
                        continue;
                    }
                    const std::size_t semi = raw.find(';', i);
                    if (semi == std::string_view::npos)
                    {
                        fail("unterminated entity");
                    }
                    const std::string_view entity = raw.substr(i + 1, semi - i - 1);
                    if (entity == "amp")
                        out.push_back('&');
                    else if (entity == "lt")
                        out.push_back('<');
                    else if (entity == "gt")
                        out.push_back('>');
                    else if (entity == "quot")
                        out.push_back('"');
                    else if (entity == "apos")
                        out.push_back('\'');
                    else
                        fail("unknown entity &" + std::string(entity) + ";");
                    i = semi;
                }
                return out;
            }

            Tag read_tag()
            {
                Tag tag;
                tag.line = m_line;
                ++m_pos; // '<'
                if (m_pos < m_text.size() && m_text[m_pos] == '/')
                {
                    ++m_pos;
                    tag.kind = Tag::Kind::Close;
                    tag.name = read_name();
                    skip_space();
                    if (m_pos >= m_text.size() || m_text[m_pos] != '>')
                    {
                        fail("expected '>' after </" + tag.name);
                    }
                    ++m_pos;
                    return tag;
                }

                tag.name = read_name();
                for (;;)
                {
                    skip_space();
                    if (m_pos >= m_text.size())
                    {
                        fail("unterminated tag <" + tag.name);
                    }
                    if (starts_with("/>"))
                    {
                        m_pos += 2;
                        tag.kind = Tag::Kind::SelfClosing;
                        return tag;
                    }
                    if (m_text[m_pos] == '>')
                    {
                        ++m_pos;
                        return tag;
                    }
                    const std::string key = read_name();
                    skip_space();
                    if (m_pos >= m_text.size() || m_text[m_pos] != '=')
                    {
                        fail("expected '=' after attribute " + key);
                    }
                    ++m_pos;
                    skip_space();
                    if (m_pos >= m_text.size() || (m_text[m_pos] != '"' && m_text[m_pos] != '\''))
                    {
                        fail("attribute " + key + " must be quoted");
                    }
                    const char quote = m_text[m_pos++];
                    const std::size_t start = m_pos;
                    while (m_pos < m_text.size() && m_text[m_pos] != quote)
                    {
                        if (m_text[m_pos] == '<')
                        {
                            fail("'<' inside attribute " + key);
                        }
                        advance();
                    }
                    if (m_pos >= m_text.size())
                    {
                        fail("unterminated attribute " + key);
                    }
                    std::string value = decode_entities(m_text.substr(start, m_pos - start));
                    ++m_pos;
                    if (!tag.attributes.emplace(key, std::move(value)).second)
                    {
                        fail("duplicate attribute " + key);
                    }
                }
            }

            std::string_view m_text;
            std::size_t m_pos = 0;
            int m_line = 1;
        };

        std::string take_attribute(Tag &tag, const std::string &key)
        {
            auto it = tag.attributes.find(key);
            if (it == tag.attributes.end())
            {
                throw ParseError(tag.line, "<" + tag.name + "> is missing attribute '" + key + "'");
            }
            std::string v = std::move(it->second);
            tag.attributes.erase(it);
            return v;
        }

        double take_number(Tag &tag, const std::string &key)
        {
            const std::string raw = take_attribute(tag, key);
            const auto v = parse_double(raw);
            if (!v || !std::isfinite(*v))
            {
                throw ParseError(tag.line, "attribute '" + key + "' is not a finite decimal: '" + raw + "'");
            }
            return *v;
        }

        void reject_extra_attributes(const Tag &tag)
        {
            if (!tag.attributes.empty())
            {
                throw ParseError(tag.line, "<" + tag.name + "> has unknown attribute '" + tag.attributes.begin()->first + "'");
            }
        }

        std::string escape(std::string_view s)
        {
            std::string out;
            for (char c : s)
            {
                switch (c)
                {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '"': out += "&quot;"; break;
                case '\'': out += "&apos;"; break;
                default: out.push_back(c);
                }
            }
            return out;
        }

        constexpr double kDegToRad = kPi / 180.0;
    }

    void validate_route_file(const RouteFile &route)
    {
        if (route.keypoints.empty())
        {
            throw Error(ErrorCode::EmptyRoute, "route '" + route.route_id + "' has no waypoints");
        }
        if (route.keypoints.size() < 2)
        {
            throw Error(ErrorCode::EmptyRoute, "route '" + route.route_id + "' needs at least 2 waypoints");
        }
        for (std::size_t i = 0; i < route.keypoints.size(); ++i)
        {
            const Transform &k = route.keypoints[i];
            if (!std::isfinite(k.x) || !std::isfinite(k.y) || !std::isfinite(k.yaw))
            {
                throw Error(ErrorCode::NonFinite, "waypoint " + std::to_string(i) + " is not finite");
            }
            if (i > 0 && norm(position_of(k) - position_of(route.keypoints[i - 1])) <= 1e-9)
            {
                throw Error(ErrorCode::DuplicateConsecutivePoint,
                            "waypoint " + std::to_string(i) + " coincides with waypoint " + std::to_string(i - 1),
                            static_cast<std::int64_t>(i));
            }
        }
    }

    RouteFile parse_route(std::string_view text)
    {
        XmlReader reader(text);
        auto root = reader.next();
        if (!root)
        {
            throw ParseError(reader.line(), "document has no <route> element");
        }
        if (root->kind == Tag::Kind::Close || root->name != "route")
        {
            throw ParseError(root->line, "root element must be <route>, found <" + root->name + ">");
        }

        RouteFile route;
        route.route_id = take_attribute(*root, "id");
        route.town = take_attribute(*root, "town");
        reject_extra_attributes(*root);

        if (root->kind == Tag::Kind::Open)
        {
            for (;;)
            {
                auto tag = reader.next();
                if (!tag)
                {
                    reader.fail("missing </route>");
                }
                if (tag->kind == Tag::Kind::Close)
                {
                    if (tag->name != "route")
                    {
                        throw ParseError(tag->line, "mismatched </" + tag->name + ">");
                    }
                    break;
                }
                if (tag->name != "waypoint")
                {
                    throw ParseError(tag->line, "unexpected element <" + tag->name + ">");
                }
                if (tag->kind != Tag::Kind::SelfClosing)
                {
                    // Tolerate <waypoint ...></waypoint>.
                    auto close = reader.next();
                    if (!close || close->kind != Tag::Kind::Close || close->name != "waypoint")
                    {
                        throw ParseError(tag->line, "<waypoint> must be empty");
                    }
                }
                Transform k;
                k.x = take_number(*tag, "x");
                k.y = take_number(*tag, "y");
                k.yaw = normalize_yaw(take_number(*tag, "yaw") * kDegToRad);
                reject_extra_attributes(*tag);
                route.keypoints.push_back(k);
            }
        }
        if (auto trailing = reader.next())
        {
            throw ParseError(trailing->line, "content after </route>");
        }

        validate_route_file(route);
        return route;
    }

    RouteFile load_route_file(const std::string &path) { return parse_route(read_text_file(path)); }

    std::string serialize_route(const RouteFile &route)
    {
        std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out += "<route id=\"" + escape(route.route_id) + "\" town=\"" + escape(route.town) + "\">\n";
        for (const Transform &k : route.keypoints)
        {
            out += "  <waypoint x=\"" + format_double(k.x) + "\" y=\"" + format_double(k.y) + "\" yaw=\"" +
                   format_double(k.yaw / kDegToRad) + "\"/>\n";
        }
        out += "</route>\n";
        return out;
    }
}
