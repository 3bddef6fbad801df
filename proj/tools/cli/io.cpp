#include "io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <system_error>

#include "covar/errors.hpp"

namespace covar::cli {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_line(std::string_view line, std::size_t line_no, const std::string& source) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && trim(cur).empty()) {
            quoted = true;
            was_quoted = true;
            cur.clear();
        } else if (c == ',') {
            fields.emplace_back(was_quoted ? cur : std::string(trim(cur)));
            cur.clear();
            was_quoted = false;
        } else {
            cur += c;
        }
    }
    if (quoted) throw DataError(source + ": line " + std::to_string(line_no) + ": unterminated quoted field");
    fields.emplace_back(was_quoted ? cur : std::string(trim(cur)));
    return fields;
}

}  // namespace

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open input file '" + path.string() + "'");
    CsvTable t;
    t.source = path.string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto fields = split_line(view, line_no, t.source);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size())
            throw DataError(t.source + ": line " + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
        t.lines.push_back(line_no);
    }
    if (in.bad()) throw IoError("error reading '" + t.source + "'");
    if (t.header.empty()) throw DataError(t.source + ": no header line");
    return t;
}

std::vector<double> numeric_column(const CsvTable& table, std::size_t col) {
    std::vector<double> out(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& cell = table.rows[r][col];
        double x = 0.0;
        const char* first = cell.data();
        const char* last = first + cell.size();
        const auto [ptr, ec] = std::from_chars(first, last, x);
        if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(x))
            throw DataError(table.source + ": line " + std::to_string(table.lines[r]) + ", column '" +
                            table.header[col] + "': not a finite number: '" + cell + "'");
        out[r] = x;
    }
    return out;
}

void validate_date(std::string_view text, const std::string& where) {
    auto fail = [&] { throw DataError(where + ": invalid ISO date '" + std::string(text) + "' (expected YYYY-MM-DD)"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') fail();
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto num = [&](std::size_t pos, std::size_t len, auto& v) {
        const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
        if (ec != std::errc() || ptr != text.data() + pos + len) fail();
    };
    num(0, 4, y);
    num(5, 2, m);
    num(8, 2, d);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) fail();
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x == 0.0 ? 0.0 : x);
    return buf;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const Provenance& provenance,
                     const std::vector<std::string>& columns)
    : path_(path), out_(path, std::ios::binary), width_(columns.size()) {
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
    out_ << "# schema_version=" << kSchemaVersion << '\n';
    for (const auto& [k, v] : provenance) out_ << "# " << k << '=' << v << '\n';
    row(columns);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw std::logic_error("CsvWriter: row width does not match the header");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << csv_field(fields[i]);
    }
    out_ << '\n';
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw IoError("error writing '" + path_.string() + "'");
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.close();
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace covar::cli
