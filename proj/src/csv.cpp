#include "qspace/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace qspace {

std::string format_g17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), columns_(columns.size()) {
    const auto dir = std::filesystem::path(path).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    out_.open(path);
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
    for (std::size_t i = 0; i < columns.size(); ++i)
        out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
}

void CsvWriter::begin_row() {
    if (row_open_) throw std::logic_error("csv row already open");
    row_open_ = true;
    in_row_ = 0;
}

void CsvWriter::put(const std::string& value) {
    if (!row_open_) throw std::logic_error("csv put outside row");
    out_ << (in_row_ ? "," : "") << value;
    ++in_row_;
}

void CsvWriter::put(double value) { put(format_g17(value)); }
void CsvWriter::put(std::int64_t value) { put(std::to_string(value)); }
void CsvWriter::put(std::size_t value) { put(std::to_string(value)); }
void CsvWriter::put(bool value) { put(std::string(value ? "true" : "false")); }

void CsvWriter::end_row() {
    if (!row_open_) throw std::logic_error("csv end_row outside row");
    if (in_row_ != columns_) throw std::logic_error("csv row width mismatch");
    out_ << '\n';
    out_.flush();
    row_open_ = false;
}

} // namespace qspace
