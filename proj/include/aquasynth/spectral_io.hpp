#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aquasynth/errors.hpp"
#include "aquasynth/spectra.hpp"

#ifndef AQUASYNTH_DEFAULT_DATA_DIR
#define AQUASYNTH_DEFAULT_DATA_DIR "data"
#endif

namespace aquasynth {

/// Numeric CSV table: one header row, then rows of equal width.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t lead = 0;
        while (lead < cell.size() && cell[lead] == ' ') ++lead;
        cells.push_back(cell.substr(lead));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline double parse_cell(const std::string& cell, const std::string& where) {
    if (cell.empty()) throw DecodeError(where + ": empty cell");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        throw DecodeError(where + ": not a number: '" + cell + "'");
    }
    if (used != cell.size()) throw DecodeError(where + ": trailing characters in '" + cell + "'");
    return v;
}

} // namespace detail

/// Reads a CSV whose header must equal `expected_header` exactly.
inline CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw DecodeError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DecodeError(path.string() + ": empty file");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3); // BOM
    CsvTable table;
    table.header = detail::split_csv_line(line);
    if (table.header != expected_header) {
        std::string want;
        for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
        throw DecodeError(path.string() + ": unexpected header '" + line + "', expected '" + want + "'");
    }
    table.columns.resize(table.header.size());

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (cells.size() != table.header.size())
            throw DecodeError(where + ": expected " + std::to_string(table.header.size()) + " cells");
        for (std::size_t i = 0; i < cells.size(); ++i)
            table.columns[i].push_back(detail::parse_cell(cells[i], where));
    }
    if (table.rows() < 2) throw DecodeError(path.string() + ": need at least two data rows");
    return table;
}

/// `wavelength_nm,value`
inline SpectralCurve load_spectral_curve(const std::filesystem::path& path) {
    auto t = read_csv(path, {"wavelength_nm", "value"});
    return SpectralCurve(std::move(t.columns[0]), std::move(t.columns[1]));
}

/// `wavelength_nm,r,g,b`
inline CameraResponse load_camera_response(const std::filesystem::path& path) {
    auto t = read_csv(path, {"wavelength_nm", "r", "g", "b"});
    return CameraResponse({SpectralCurve(t.columns[0], t.columns[1]),
                           SpectralCurve(t.columns[0], t.columns[2]),
                           SpectralCurve(t.columns[0], t.columns[3])});
}

/// `wavelength_nm,a,b,kd`
inline WaterType load_water_type(const std::filesystem::path& path, std::string name) {
    auto t = read_csv(path, {"wavelength_nm", "a", "b", "kd"});
    return {std::move(name), SpectralCurve(t.columns[0], t.columns[1]),
            SpectralCurve(t.columns[0], t.columns[2]), SpectralCurve(t.columns[0], t.columns[3])};
}

/// Data directory: $AQUASYNTH_DATA_DIR if set, otherwise the bundled tables.
inline std::filesystem::path data_directory() {
    if (const char* env = std::getenv("AQUASYNTH_DATA_DIR"); env && *env) return env;
    return AQUASYNTH_DEFAULT_DATA_DIR;
}

/// Every water class plus the camera response, resampled to one working grid.
/// Immutable once built; share it freely between threads.
class SpectralLibrary {
public:
    explicit SpectralLibrary(const std::filesystem::path& root = data_directory(),
                             std::vector<double> grid = default_working_grid())
        : root_(root), grid_(std::move(grid)) {
        camera_ = load_camera_response(root_ / "camera" / "nikon_d90.csv").resampled(grid_);
        for (auto name : kJerlovTypes) {
            const auto file = root_ / "jerlov" / (std::string(name) + ".csv");
            waters_.emplace(std::string(name), load_water_type(file, std::string(name)).resampled(grid_));
        }
    }

    const WaterType& water(const std::string& name) const {
        auto it = waters_.find(name);
        if (it == waters_.end()) throw DomainError("unknown water type '" + name + "'");
        return it->second;
    }

    const CameraResponse& camera() const noexcept { return camera_; }
    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::filesystem::path& root() const noexcept { return root_; }

    /// Loads a `wavelength_nm,value` illuminant onto the working grid.
    SpectralCurve load_illuminant(const std::filesystem::path& path) const {
        return resample(load_spectral_curve(path), grid_);
    }

private:
    std::filesystem::path root_;
    std::vector<double> grid_;
    CameraResponse camera_;
    std::map<std::string, WaterType> waters_;
};

} // namespace aquasynth
