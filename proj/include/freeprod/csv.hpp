#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace freeprod {

/// Fixed-format numeric cell: shortest %.17g, '.' decimal (the process never
/// changes the C locale), identical across runs for identical doubles.
inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_num(long v) { return std::to_string(v); }
inline std::string csv_num(int v) { return std::to_string(v); }
inline std::string csv_num(std::size_t v) { return std::to_string(v); }

/// Minimal CSV table with a mandatory header row. Cells are written verbatim;
/// callers quote nothing because all emitted values are word/number tokens.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header_.size())
            throw std::invalid_argument("csv row width does not match the header");
        rows_.push_back(std::move(cells));
    }

    std::size_t row_count() const { return rows_.size(); }

    std::string to_string() const {
        std::string out;
        append_line(out, header_);
        for (const auto& row : rows_) append_line(out, row);
        return out;
    }

private:
    static void append_line(std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out.push_back(',');
            out += cells[i];
        }
        out.push_back('\n');
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Write-then-rename so concurrent readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace freeprod
