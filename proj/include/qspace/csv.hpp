#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace qspace {

// CSV writer with the frozen serialization rules: floating-point values with
// 17 significant digits, one row per measurement.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);

    void begin_row();
    void put(const std::string& value);
    void put(double value);
    void put(std::int64_t value);
    void put(std::size_t value);
    void put(bool value);
    void end_row();

    const std::string& path() const { return path_; }

private:
    std::ofstream out_;
    std::string path_;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
    bool row_open_ = false;
};

std::string format_g17(double value);

} // namespace qspace
