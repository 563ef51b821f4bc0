#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace corrtext::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;  // NaN breaks the line
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 800;
    int height = 400;
    bool x_is_date = false;  // x holds days since 1970-01-01
};

void line_chart(const std::vector<Series>& series, const ChartOptions& options,
                const std::filesystem::path& path);
void scatter_chart(const Series& points, const ChartOptions& options, const std::filesystem::path& path);
// Horizontal bars, drawn top to bottom in the given order.
void bar_chart(const std::vector<std::pair<std::string, double>>& bars, const ChartOptions& options,
               const std::filesystem::path& path);

}  // namespace corrtext::svg
