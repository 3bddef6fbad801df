#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace covar::cli {

inline constexpr int kSchemaVersion = 1;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a computation produced nothing usable (exit code 5).
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ordered key/value pairs echoed into every output.
using Provenance = std::vector<std::pair<std::string, std::string>>;

struct CsvTable {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;  // 1-based line number of each row in the file

    std::optional<std::size_t> column(std::string_view name) const;
};

/// Reads a comma-separated file with a header line. Lines starting with '#'
/// and blank lines are skipped; double-quoted fields are supported.
CsvTable read_csv(const std::filesystem::path& path);

/// Parses a column as finite doubles; a bad cell raises DataError naming the
/// line and column.
std::vector<double> numeric_column(const CsvTable& table, std::size_t col);

/// Checks an ISO-8601 calendar date (YYYY-MM-DD); DataError otherwise.
void validate_date(std::string_view text, const std::string& where);

/// Shortest stable rendering used in every output: %.10g, with nan/inf spelled out.
std::string format_number(double x);

/// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(std::string_view s);

/// Creates the directory (and parents); IoError with the path on failure.
void ensure_directory(const std::filesystem::path& dir);

class CsvWriter {
public:
    /// Writes the reproducibility header (schema version and provenance) and
    /// the column names.
    CsvWriter(const std::filesystem::path& path, const Provenance& provenance, const std::vector<std::string>& columns);

    void row(const std::vector<std::string>& fields);
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t width_;
};

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace covar::cli
