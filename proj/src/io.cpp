#include "charfront/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "charfront/errors.hpp"

namespace charfront {

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(ErrorCode::ConfigError, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorCode::ConfigError, "cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // no negative zero
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable::CsvTable(std::vector<Column> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(const Vec& row) {
    if (row.size() != columns_.size())
        throw Error(ErrorCode::BadParams, "CSV row has " + std::to_string(row.size()) + " fields, expected " +
                                              std::to_string(columns_.size()));
    rows_.push_back(row);
}

std::string CsvTable::str() const {
    std::string s;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (c) s += ',';
        s += columns_[c].name;
        if (!columns_[c].unit.empty()) s += " [" + columns_[c].unit + "]";
    }
    s += '\n';
    for (const Vec& r : rows_) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c) s += ',';
            s += format_number(r[c]);
        }
        s += '\n';
    }
    return s;
}

std::vector<Vec> read_csv(const std::string& path, std::vector<std::string>* names) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path);
    std::string line;
    std::vector<Vec> rows;
    if (!std::getline(in, line)) return rows;
    if (names) {
        names->clear();
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) {
            const auto br = cell.find(" [");
            names->push_back(br == std::string::npos ? cell : cell.substr(0, br));
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Vec r;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) r.push_back(std::strtod(cell.c_str(), nullptr));
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace charfront
