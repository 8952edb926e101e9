#include "aoicache/csv_io.hpp"

#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <system_error>

namespace aoicache::io {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

struct LineReader::Impl {
    gzFile file = nullptr;  // gzread also reads uncompressed files transparently
};

LineReader::LineReader(std::string path) : impl_(std::make_unique<Impl>()), path_(std::move(path)) {
    impl_->file = gzopen(path_.c_str(), "rb");
    if (impl_->file == nullptr) throw std::runtime_error("cannot open '" + path_ + "' for reading");
}

LineReader::~LineReader() {
    if (impl_ && impl_->file != nullptr) gzclose(impl_->file);
}

bool LineReader::next(std::string& line) {
    line.clear();
    char buf[4096];
    bool got = false;
    while (gzgets(impl_->file, buf, sizeof buf) != nullptr) {
        got = true;
        line += buf;
        if (!line.empty() && line.back() == '\n') break;
    }
    if (!got) {
        int err = 0;
        const char* msg = gzerror(impl_->file, &err);
        if (err != Z_OK && err != Z_STREAM_END) throw std::runtime_error("read error in '" + path_ + "': " + msg);
        return false;
    }
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    ++line_number_;
    return true;
}

struct LineWriter::Impl {
    gzFile gz = nullptr;
    std::FILE* plain = nullptr;
};

LineWriter::LineWriter(std::string path) : impl_(std::make_unique<Impl>()), path_(std::move(path)) {
    if (ends_with(path_, ".gz")) {
        // Fixed compression level and no timestamp keep output byte-stable.
        impl_->gz = gzopen(path_.c_str(), "wb6");
        if (impl_->gz == nullptr) throw std::runtime_error("cannot open '" + path_ + "' for writing");
    } else {
        impl_->plain = std::fopen(path_.c_str(), "wb");
        if (impl_->plain == nullptr) throw std::runtime_error("cannot open '" + path_ + "' for writing");
    }
}

LineWriter::~LineWriter() {
    if (!impl_) return;
    if (impl_->gz != nullptr) gzclose(impl_->gz);
    if (impl_->plain != nullptr) std::fclose(impl_->plain);
}

void LineWriter::write_line(std::string_view line) {
    if (impl_->gz != nullptr) {
        if (!line.empty() && gzwrite(impl_->gz, line.data(), static_cast<unsigned>(line.size())) == 0)
            throw std::runtime_error("write error in '" + path_ + "'");
        if (gzputc(impl_->gz, '\n') == -1) throw std::runtime_error("write error in '" + path_ + "'");
    } else if (impl_->plain != nullptr) {
        if (std::fwrite(line.data(), 1, line.size(), impl_->plain) != line.size() ||
            std::fputc('\n', impl_->plain) == EOF)
            throw std::runtime_error("write error in '" + path_ + "'");
    } else {
        throw std::logic_error("write to closed file '" + path_ + "'");
    }
}

void LineWriter::close() {
    int rc = 0;
    if (impl_->gz != nullptr) {
        rc = gzclose(impl_->gz) == Z_OK ? 0 : -1;
        impl_->gz = nullptr;
    }
    if (impl_->plain != nullptr) {
        rc = std::fclose(impl_->plain);
        impl_->plain = nullptr;
    }
    if (rc != 0) throw std::runtime_error("error closing '" + path_ + "'");
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

namespace {
std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}
}  // namespace

std::int64_t parse_int(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
    return v;
}

double parse_double(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    return v;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
    return std::string(buf, ptr);
}

}  // namespace aoicache::io
