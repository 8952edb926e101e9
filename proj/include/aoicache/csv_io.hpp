#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace aoicache::io {

/// Reads text lines from a plain or gzip file (".gz" extension).
class LineReader {
public:
    explicit LineReader(std::string path);
    ~LineReader();
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    /// False at end of file. Strips the trailing newline / CR.
    bool next(std::string& line);
    std::size_t line_number() const { return line_number_; }
    const std::string& path() const { return path_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string path_;
    std::size_t line_number_ = 0;
};

/// Writes text to a plain or gzip file (".gz" extension). Throws std::runtime_error
/// if the file cannot be opened or written.
class LineWriter {
public:
    explicit LineWriter(std::string path);
    ~LineWriter();
    LineWriter(const LineWriter&) = delete;
    LineWriter& operator=(const LineWriter&) = delete;

    void write_line(std::string_view line);
    /// Flushes and closes; errors surface here rather than in the destructor.
    void close();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string path_;
};

std::vector<std::string_view> split(std::string_view line, char sep = ';');

/// Strict integer parse; throws std::invalid_argument.
std::int64_t parse_int(std::string_view text);
double parse_double(std::string_view text);

/// Round-trippable shortest decimal for a double.
std::string format_double(double value);

bool ends_with(std::string_view s, std::string_view suffix);

}  // namespace aoicache::io
