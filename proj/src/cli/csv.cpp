#include <sdbf/cli/csv.hpp>

#include <sdbf/error.hpp>

#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace sdbf::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view field, std::size_t line) {
    const std::string_view t = trim(field);
    double v = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    if (!t.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (t.empty() || ec != std::errc() || ptr != end) {
        throw IngestionError("line " + std::to_string(line) + ": cannot parse '" + std::string(t) + "' as a number", line);
    }
    return v;
}

}  // namespace

Matrix read_csv(std::istream& in) {
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string text;
    for (std::size_t line = 1; std::getline(in, text); ++line) {
        const std::string_view row = trim(text);
        if (row.empty()) continue;
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = row.find(',', start);
            values.push_back(parse_number(row.substr(start, comma == std::string_view::npos ? row.npos : comma - start), line));
            ++count;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (cols == 0) {
            cols = count;
        } else if (count != cols) {
            throw IngestionError("line " + std::to_string(line) + ": expected " + std::to_string(cols) + " fields, found " +
                                     std::to_string(count),
                                 line);
        }
        ++rows;
    }
    if (rows == 0) throw IngestionError("no data rows");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
    }
    return m;
}

Matrix read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open data file '" + path.string() + "'");
    try {
        return read_csv(in);
    } catch (const IngestionError& e) {
        throw IngestionError(path.string() + ": " + e.what(), e.line());
    }
}

}  // namespace sdbf::cli
