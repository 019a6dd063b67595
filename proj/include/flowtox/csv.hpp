#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowtox::csv {

/// Shortest decimal text that round-trips to the same double.
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] std::vector<std::string_view> split(std::string_view line, char sep = ',');

[[nodiscard]] std::optional<double> parse_double(std::string_view s);
[[nodiscard]] std::optional<std::int64_t> parse_int(std::string_view s);

/// Writes rows of comma-separated fields; doubles use format_double.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    Writer& field(std::string_view s);
    Writer& field(double v);
    Writer& field(std::int64_t v);
    Writer& field(int v) { return field(static_cast<std::int64_t>(v)); }
    Writer& field(std::size_t v) { return field(static_cast<std::int64_t>(v)); }
    Writer& empty_field();
    void end_row();

    void header(std::initializer_list<std::string_view> names);

private:
    std::ostream& out_;
    bool first_ = true;
};

}  // namespace flowtox::csv
