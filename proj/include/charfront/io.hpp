#pragma once

#include <string>
#include <vector>

#include "charfront/linalg.hpp"

namespace charfront {

// Writes through a sibling temporary file and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

// Fixed 17-significant-digit formatting shared by every numeric output.
std::string format_number(double v);

// CSV with a header row "name [unit]"; rows must match the column count.
class CsvTable {
public:
    struct Column {
        std::string name;
        std::string unit;
    };

    explicit CsvTable(std::vector<Column> columns);
    void add_row(const Vec& row);
    std::string str() const;
    void save(const std::string& path) const { write_atomic(path, str()); }
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<Column> columns_;
    std::vector<Vec> rows_;
};

// Minimal reader for tables written by CsvTable: returns the rows, and the
// bare column names (units stripped) when names is non-null.
std::vector<Vec> read_csv(const std::string& path, std::vector<std::string>* names = nullptr);

}  // namespace charfront
