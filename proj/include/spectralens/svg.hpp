#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace spectralens::svg {

enum class Style { Line, Points, Bars };

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    Style style = Style::Line;
};

/// Minimal 2-D plot: axes with ticks, one or more series, a legend.
struct Plot {
    Plot(std::string title_, std::string x_label_, std::string y_label_, bool log_x_ = false, bool log_y_ = false)
        : title(std::move(title_)), x_label(std::move(x_label_)), y_label(std::move(y_label_)), log_x(log_x_),
          log_y(log_y_) {}

    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    int width = 640;
    int height = 440;
    std::vector<Series> series;

    Plot& add(Series s) {
        series.push_back(std::move(s));
        return *this;
    }

    [[nodiscard]] std::string render() const;
    void save(const std::filesystem::path& path) const;
};

}  // namespace spectralens::svg
