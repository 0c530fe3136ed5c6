#include "canid/plotting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "canid/common.hpp"

namespace canid {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

} // namespace

void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const int W = 760, H = 460;
    const int L = 70, R = 180, T = 50, B = 55;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

    std::ofstream os(path);
    if (!os) throw IoError("cannot write chart: " + path.string());
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << (L + (W - L - R) / 2) << "' y='24' text-anchor='middle' font-size='16' "
          "font-family='sans-serif'>"
       << title << "</text>\n";

    // axes and gridlines
    os << "<line x1='" << L << "' y1='" << (H - B) << "' x2='" << (W - R) << "' y2='" << (H - B)
       << "' stroke='black'/>\n";
    os << "<line x1='" << L << "' y1='" << T << "' x2='" << L << "' y2='" << (H - B)
       << "' stroke='black'/>\n";
    for (int g = 0; g <= 5; ++g) {
        double yv = ymin + g * (ymax - ymin) / 5;
        os << "<line x1='" << L << "' y1='" << py(yv) << "' x2='" << (W - R) << "' y2='" << py(yv)
           << "' stroke='#dddddd'/>\n";
        os << "<text x='" << (L - 8) << "' y='" << (py(yv) + 4)
           << "' text-anchor='end' font-size='11' font-family='sans-serif'>";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", yv);
        os << buf << "</text>\n";
    }
    for (int g = 0; g <= 6; ++g) {
        double xv = xmin + g * (xmax - xmin) / 6;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", xv);
        os << "<text x='" << px(xv) << "' y='" << (H - B + 18)
           << "' text-anchor='middle' font-size='11' font-family='sans-serif'>" << buf << "</text>\n";
    }
    os << "<text x='" << (L + (W - L - R) / 2) << "' y='" << (H - 12)
       << "' text-anchor='middle' font-size='13' font-family='sans-serif'>" << x_label << "</text>\n";
    os << "<text x='18' y='" << (T + (H - T - B) / 2)
       << "' text-anchor='middle' font-size='13' font-family='sans-serif' transform='rotate(-90 18 "
       << (T + (H - T - B) / 2) << ")'>" << y_label << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        os << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        os << "'/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i]) << "' r='3' fill='" << color
               << "'/>\n";
        int ly = T + 16 + static_cast<int>(si) * 18;
        os << "<line x1='" << (W - R + 14) << "' y1='" << ly << "' x2='" << (W - R + 38) << "' y2='"
           << ly << "' stroke='" << color << "' stroke-width='2'/>\n";
        os << "<text x='" << (W - R + 44) << "' y='" << (ly + 4)
           << "' font-size='12' font-family='sans-serif'>" << s.name << "</text>\n";
    }
    os << "</svg>\n";
}

void write_points_csv(const std::filesystem::path& path, const std::vector<Series>& series) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write points csv: " + path.string());
    os << "series,x,y\n";
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << s.name << ',' << s.x[i] << ',' << s.y[i] << '\n';
}

} // namespace canid
