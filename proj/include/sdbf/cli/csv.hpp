#pragma once

#include <sdbf/stats_dist.hpp>

#include <filesystem>
#include <istream>

namespace sdbf::cli {

/// Headerless numeric CSV, comma separated. Blank lines are skipped. Throws
/// IngestionError carrying the 1-based line number for ragged rows or bad numbers.
Matrix read_csv(std::istream& in);
/// As above; a missing or unreadable file raises IngestionError naming the path.
Matrix read_csv_file(const std::filesystem::path& path);

}  // namespace sdbf::cli
