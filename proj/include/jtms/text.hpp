#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace jtms {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Strict parse of a full token; throws std::invalid_argument on junk.
double parse_double(std::string_view token, const std::string& context);
long long parse_int(std::string_view token, const std::string& context);

/// Splits on single spaces/tabs, skipping runs of whitespace.
std::vector<std::string_view> split_fields(std::string_view line);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// Walks a text blob line by line, tracking 1-based line numbers for error
/// reporting.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    /// Next non-empty line, or false at end of input.
    bool next(std::string_view& line);
    std::size_t line_number() const { return line_number_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_number_ = 0;
};

}  // namespace jtms
