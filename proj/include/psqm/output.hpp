#pragma once

// Result files: fixed-format CSV tables, SVG plots, content hashing.

#include "psqm/core_algebra.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace psqm {

/// Rows of t,hbar,quantity,real,imag. Numbers are written with %.12e and rows
/// keep insertion order, so identical inputs give identical bytes.
class CsvTable {
public:
    void add(double t, double hbar, std::string quantity, Complex value);
    void add(double t, double hbar, std::string quantity, double value) { add(t, hbar, std::move(quantity), Complex(value, 0.0)); }

    std::size_t size() const noexcept { return rows_.size(); }
    std::string str() const;

private:
    struct Row {
        double t;
        double hbar;
        std::string quantity;
        Complex value;
    };
    std::vector<Row> rows_;
};

/// %.12e
std::string format_number(double x);

/// Writes the whole file or throws Error.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a as 16 hex digits.
std::string content_hash(std::string_view bytes);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

/// A standalone SVG line plot. Non-positive values are dropped on log axes.
std::string svg_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

/// Renders and writes a plot; returns false instead of throwing on any failure.
bool try_write_plot(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<PlotSeries>& series) noexcept;

}  // namespace psqm
