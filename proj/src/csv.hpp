#pragma once

// Minimal CSV helpers shared by the readers/writers. Not installed.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace kdtpl::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read(const std::filesystem::path& path);

std::ofstream open_out(const std::filesystem::path& path);

double to_double(const std::string& field, const std::filesystem::path& path, std::size_t line);
std::size_t to_index(const std::string& field, const std::filesystem::path& path, std::size_t line);

// Shortest representation that round-trips.
std::string fmt(double v);

} // namespace kdtpl::csv
