#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gmbayes {

struct SvgSeries {
  std::string label;
  Eigen::VectorXd y;
};

/// Simple line plot (index on the x axis) with a legend and axis ticks.
void write_line_plot_svg(const std::string& path, const std::string& title, const std::vector<SvgSeries>& series);

/// Horizontal bar chart, one bar per label; values annotated.
void write_bar_chart_svg(const std::string& path, const std::string& title, const std::vector<std::string>& labels,
                         const std::vector<double>& values);

}  // namespace gmbayes
