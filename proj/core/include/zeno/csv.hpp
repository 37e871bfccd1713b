#pragma once

// Minimal CSV interchange for pipeline stages: one header row, comma separated,
// numbers written in shortest round-trip form so a read-back is bit exact.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace zeno::csv {

std::string format(double value);
std::string format(std::uint64_t value);
std::string format(int value);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const;  // InvalidArgument if absent
    std::vector<double> doubles(std::string_view name) const;
    std::vector<std::uint64_t> integers(std::string_view name) const;
};

/// MissingInputError if the file does not exist.
Table read(const std::filesystem::path& path);

void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows);

}  // namespace zeno::csv
