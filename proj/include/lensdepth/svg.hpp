#pragma once

#include <string>
#include <vector>

namespace lensdepth::svg {

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    int group = 0;
};

struct Labels {
    std::string title;
    std::string x;
    std::string y;
};

// Static scatter plot; `diagonal` draws y = x across the plot box.
std::string scatter(const std::vector<ScatterPoint>& points, const Labels& labels, bool diagonal = false);

struct LineSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Static line chart with a legend.
std::string lines(const std::vector<LineSeries>& series, const Labels& labels);

}  // namespace lensdepth::svg
