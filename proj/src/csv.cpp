#include "csv.hpp"

#include "kdtpl/error.hpp"

#include <charconv>
#include <sstream>

namespace kdtpl::csv {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == ' ' || field.back() == '\r'))
            field.pop_back();
        std::size_t b = 0;
        while (b < field.size() && field[b] == ' ') ++b;
        out.push_back(field.substr(b));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size())
            fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) +
                                            ": expected " + std::to_string(t.header.size()) +
                                            " fields");
        t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) fail(ErrorCode::ParseError, path.string() + ": missing header");
    return t;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    return out;
}

double to_double(const std::string& field, const std::filesystem::path& path, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) +
                                        ": not a number '" + field + "'");
    return v;
}

std::size_t to_index(const std::string& field, const std::filesystem::path& path, std::size_t line) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) +
                                        ": not an index '" + field + "'");
    return v;
}

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace kdtpl::csv
