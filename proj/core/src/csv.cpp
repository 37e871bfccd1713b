#include "zeno/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "zeno/error.hpp"

namespace zeno::csv {
namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

std::string format(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

std::string format(std::uint64_t value) { return std::to_string(value); }
std::string format(int value) { return std::to_string(value); }

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw InvalidArgument("CSV has no column '" + std::string(name) + "'");
}

std::vector<double> Table::doubles(std::string_view name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string& s = rows[r].at(c);
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw InvalidArgument("CSV row " + std::to_string(r + 2) + ", column '" + std::string(name) +
                                  "': not a number: '" + s + "'");
        }
        out.push_back(v);
    }
    return out;
}

std::vector<std::uint64_t> Table::integers(std::string_view name) const {
    const std::size_t c = column(name);
    std::vector<std::uint64_t> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string& s = rows[r].at(c);
        std::uint64_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw InvalidArgument("CSV row " + std::to_string(r + 2) + ", column '" + std::string(name) +
                                  "': not an unsigned integer: '" + s + "'");
        }
        out.push_back(v);
    }
    return out;
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("missing input file " + path.string());
    Table t;
    std::string line;
    if (!std::getline(in, line)) return t;
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw InvalidArgument(path.string() + ": row with " + std::to_string(cells.size()) +
                                  " cells, header has " + std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    emit(header);
    for (const auto& r : rows) emit(r);
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace zeno::csv
