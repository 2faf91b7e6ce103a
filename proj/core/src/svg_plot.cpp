#include "gmbayes/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gmbayes {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 160;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

void open_file(std::ofstream& f, const std::string& path) {
  f.open(path);
  if (!f) throw std::runtime_error("svg_plot: cannot open " + path);
}

}  // namespace

void write_line_plot_svg(const std::string& path, const std::string& title, const std::vector<SvgSeries>& series) {
  if (series.empty()) throw std::invalid_argument("write_line_plot_svg: no series");
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -ymin;
  long nmax = 0;
  for (const auto& s : series) {
    if (s.y.size() == 0) throw std::invalid_argument("write_line_plot_svg: empty series");
    ymin = std::min(ymin, s.y.minCoeff());
    ymax = std::max(ymax, s.y.maxCoeff());
    nmax = std::max<long>(nmax, s.y.size());
  }
  if (ymax == ymin) {
    ymax += 1.0;
    ymin -= 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double pw = kWidth - kMarginLeft - kMarginRight;
  const double ph = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double i) { return kMarginLeft + (nmax > 1 ? i / (nmax - 1) * pw : pw / 2); };
  auto sy = [&](double v) { return kMarginTop + (ymax - v) / (ymax - ymin) * ph; };

  std::ofstream f;
  open_file(f, path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" font-family=\"sans-serif\">"
    << escape(title) << "</text>\n";

  for (int t = 0; t <= 4; ++t) {
    const double v = ymin + t * (ymax - ymin) / 4;
    f << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt(sy(v)) << "\" x2=\"" << kWidth - kMarginRight << "\" y2=\""
      << fmt(sy(v)) << "\" stroke=\"#dddddd\"/>\n";
    f << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(sy(v) + 4)
      << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(v) << "</text>\n";
  }

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (long i = 0; i < s.y.size(); ++i) f << fmt(sx(static_cast<double>(i))) << "," << fmt(sy(s.y[i])) << " ";
    f << "\"/>\n";
    const double ly = kMarginTop + 16.0 * static_cast<double>(si);
    f << "<rect x=\"" << kWidth - kMarginRight + 10 << "\" y=\"" << fmt(ly) << "\" width=\"12\" height=\"4\" fill=\""
      << color << "\"/>\n";
    f << "<text x=\"" << kWidth - kMarginRight + 28 << "\" y=\"" << fmt(ly + 6)
      << "\" font-size=\"11\" font-family=\"sans-serif\">" << escape(s.label) << "</text>\n";
  }
  f << "</svg>\n";
}

void write_bar_chart_svg(const std::string& path, const std::string& title, const std::vector<std::string>& labels,
                         const std::vector<double>& values) {
  if (labels.size() != values.size() || labels.empty())
    throw std::invalid_argument("write_bar_chart_svg: labels/values mismatch");
  const double vmax = *std::max_element(values.begin(), values.end());
  const double scale = vmax > 0.0 ? vmax : 1.0;

  const int rows = static_cast<int>(labels.size());
  const int height = kMarginTop + 28 * rows + 30;
  const double pw = kWidth - kMarginLeft - kMarginRight;

  std::ofstream f;
  open_file(f, path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" font-family=\"sans-serif\">"
    << escape(title) << "</text>\n";
  for (int r = 0; r < rows; ++r) {
    const double w = values[r] / scale * pw;
    const double y = kMarginTop + 28.0 * r;
    f << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(y + 14)
      << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" << escape(labels[r]) << "</text>\n";
    f << "<rect x=\"" << kMarginLeft << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(std::max(w, 0.0))
      << "\" height=\"20\" fill=\"" << kPalette[r % 8] << "\"/>\n";
    f << "<text x=\"" << fmt(kMarginLeft + std::max(w, 0.0) + 6) << "\" y=\"" << fmt(y + 14)
      << "\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(values[r]) << "</text>\n";
  }
  f << "</svg>\n";
}

}  // namespace gmbayes
