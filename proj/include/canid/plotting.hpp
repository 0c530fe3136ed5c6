#pragma once
// Chart emission for reports: accuracy-vs-task curves and time-per-task
// charts as self-contained SVG, with the plotted points also written as CSV
// (the CSV is the testable artifact; the images are a convenience).

#include <filesystem>
#include <string>
#include <vector>

namespace canid {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

// columns: series,x,y
void write_points_csv(const std::filesystem::path& path, const std::vector<Series>& series);

} // namespace canid
