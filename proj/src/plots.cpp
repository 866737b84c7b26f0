#include "pce/plots.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pce/csv.hpp"

namespace pce {

namespace fs = std::filesystem;

namespace {

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string axis_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct LinearScale {
    double lo = 0.0, hi = 1.0;
    double pix_lo = 0.0, pix_hi = 1.0;
    double operator()(double v) const {
        return pix_lo + (v - lo) / (hi - lo) * (pix_hi - pix_lo);
    }
};

double parse_double(const std::string& s, const std::string& path) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("non-numeric cell '" + s + "' in " + path);
    return v;
}

}  // namespace

std::string render_bar_svg(const std::string& title, const std::vector<BarRow>& rows) {
    if (rows.empty()) throw InvalidArgument("bar chart: no rows");
    const double slot = 26.0;
    const double left = 70.0, right = 20.0, top = 40.0, bottom = 90.0;
    const double plot_h = 300.0;
    const double width = left + right + slot * static_cast<double>(rows.size());
    const double height = top + plot_h + bottom;

    double lo = 0.0, hi = 0.0;
    for (const auto& r : rows) {
        lo = std::min(lo, r.mean - r.stddev);
        hi = std::max(hi, r.mean + r.stddev);
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    LinearScale y{lo - pad, hi + pad, top + plot_h, top};

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\""
        << px(height) << "\" viewBox=\"0 0 " << px(width) << ' ' << px(height) << "\">\n";
    out << "<text x=\"" << px(width / 2) << "\" y=\"20\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    // axes
    out << "<line x1=\"" << px(left - 8) << "\" y1=\"" << px(y(0.0)) << "\" x2=\""
        << px(width - right) << "\" y2=\"" << px(y(0.0))
        << "\" stroke=\"#999\" stroke-width=\"1\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = y.lo + (y.hi - y.lo) * tick / 4.0;
        out << "<text x=\"" << px(left - 12) << "\" y=\"" << px(y(v) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
            << axis_label(v) << "</text>\n";
        out << "<line x1=\"" << px(left - 8) << "\" y1=\"" << px(y(v)) << "\" x2=\""
            << px(left - 2) << "\" y2=\"" << px(y(v)) << "\" stroke=\"#999\"/>\n";
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const BarRow& r = rows[i];
        const double cx = left + slot * (static_cast<double>(i) + 0.5);
        const double y0 = y(0.0);
        const double y1 = y(r.mean);
        out << "<rect class=\"bar\" x=\"" << px(cx - 8) << "\" y=\"" << px(std::min(y0, y1))
            << "\" width=\"16\" height=\"" << px(std::abs(y0 - y1))
            << "\" fill=\"#4878cf\"/>\n";
        out << "<line class=\"whisker\" x1=\"" << px(cx) << "\" y1=\"" << px(y(r.mean - r.stddev))
            << "\" x2=\"" << px(cx) << "\" y2=\"" << px(y(r.mean + r.stddev))
            << "\" stroke=\"#333\" stroke-width=\"1.5\"/>\n";
        out << "<line x1=\"" << px(cx - 4) << "\" y1=\"" << px(y(r.mean - r.stddev)) << "\" x2=\""
            << px(cx + 4) << "\" y2=\"" << px(y(r.mean - r.stddev)) << "\" stroke=\"#333\"/>\n";
        out << "<line x1=\"" << px(cx - 4) << "\" y1=\"" << px(y(r.mean + r.stddev)) << "\" x2=\""
            << px(cx + 4) << "\" y2=\"" << px(y(r.mean + r.stddev)) << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << px(cx) << "\" y=\"" << px(top + plot_h + 14)
            << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\" "
               "transform=\"rotate(-60 " << px(cx) << ' ' << px(top + plot_h + 14) << ")\">"
            << r.feature << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_scatter_matrix_svg(const std::string& title, std::size_t n_objectives,
                                      const std::vector<std::vector<double>>& points,
                                      const std::vector<bool>& is_base) {
    if (points.empty()) throw InvalidArgument("scatter matrix: no points");
    if (points.size() != is_base.size())
        throw InvalidArgument("scatter matrix: flag length mismatch");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n_objectives; ++i)
        for (std::size_t j = i + 1; j < n_objectives; ++j) pairs.emplace_back(i, j);

    const double panel = 240.0, gap = 60.0, top = 50.0, left = 60.0;
    const double width = left + (panel + gap) * static_cast<double>(pairs.size());
    const double height = top + panel + 60.0;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\""
        << px(height) << "\" viewBox=\"0 0 " << px(width) << ' ' << px(height) << "\">\n";
    out << "<text x=\"" << px(width / 2) << "\" y=\"22\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";

    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [a, b] = pairs[p];
        const double x0 = left + (panel + gap) * static_cast<double>(p);
        double alo = points[0][a], ahi = points[0][a], blo = points[0][b], bhi = points[0][b];
        for (const auto& pt : points) {
            alo = std::min(alo, pt[a]);
            ahi = std::max(ahi, pt[a]);
            blo = std::min(blo, pt[b]);
            bhi = std::max(bhi, pt[b]);
        }
        if (ahi - alo < 1e-12) ahi = alo + 1.0;
        if (bhi - blo < 1e-12) bhi = blo + 1.0;
        const double apad = 0.06 * (ahi - alo), bpad = 0.06 * (bhi - blo);
        LinearScale sx{alo - apad, ahi + apad, x0, x0 + panel};
        LinearScale sy{blo - bpad, bhi + bpad, top + panel, top};

        out << "<g class=\"panel\">\n";
        out << "<rect x=\"" << px(x0) << "\" y=\"" << px(top) << "\" width=\"" << px(panel)
            << "\" height=\"" << px(panel)
            << "\" fill=\"none\" stroke=\"#777\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << px(x0 + panel / 2) << "\" y=\"" << px(top + panel + 32)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">objective_"
            << (a + 1) << "</text>\n";
        out << "<text x=\"" << px(x0 - 10) << "\" y=\"" << px(top + panel / 2)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
               "transform=\"rotate(-90 " << px(x0 - 10) << ' ' << px(top + panel / 2)
            << ")\">objective_" << (b + 1) << "</text>\n";
        out << "<text x=\"" << px(x0) << "\" y=\"" << px(top + panel + 16)
            << "\" font-family=\"sans-serif\" font-size=\"9\">" << axis_label(sx.lo)
            << "</text>\n";
        out << "<text x=\"" << px(x0 + panel) << "\" y=\"" << px(top + panel + 16)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\">"
            << axis_label(sx.hi) << "</text>\n";
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (is_base[i]) {
                out << "<circle class=\"base\" cx=\"" << px(sx(points[i][a])) << "\" cy=\""
                    << px(sy(points[i][b])) << "\" r=\"5\" fill=\"#d43a3a\"/>\n";
            } else {
                out << "<circle class=\"ce\" cx=\"" << px(sx(points[i][a])) << "\" cy=\""
                    << px(sy(points[i][b])) << "\" r=\"3\" fill=\"#3a66d4\"/>\n";
            }
        }
        out << "</g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void emit_plots(const std::string& run_dir) {
    const fs::path dir(run_dir);
    const std::vector<std::pair<std::string, std::string>> bar_files = {
        {"bar_ce_with_base.csv", "CE averages across base cases (with base values)"},
        {"bar_ce_delta.csv", "CE average deltas across base cases"},
    };
    struct Rendered {
        fs::path path;
        std::string content;
    };
    std::vector<Rendered> outputs;

    for (const auto& [name, title] : bar_files) {
        const fs::path csv = dir / name;
        if (!fs::exists(csv)) throw IoError("missing input file: " + csv.string());
        const CsvStrings table = read_csv_strings(csv.string());
        if (table.rows.empty()) throw ParseError("no data rows: " + csv.string());
        std::vector<BarRow> rows;
        for (const auto& cells : table.rows) {
            BarRow r;
            r.feature = cells.at(0);
            r.mean = parse_double(cells.at(1), csv.string());
            r.stddev = parse_double(cells.at(2), csv.string());
            rows.push_back(std::move(r));
        }
        outputs.push_back({dir / (name.substr(0, name.size() - 4) + ".svg"),
                           render_bar_svg(title, rows)});
    }

    {
        const fs::path csv = dir / "pareto_front.csv";
        if (!fs::exists(csv)) throw IoError("missing input file: " + csv.string());
        const CsvTable table = read_numeric_csv(csv.string());
        const std::size_t n_obj = table.header.size() - 1;
        std::vector<std::vector<double>> points;
        std::vector<bool> is_base;
        std::size_t ce_count = 0;
        for (const auto& row : table.rows) {
            points.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(n_obj));
            const bool base = row.back() != 0.0;
            is_base.push_back(base);
            if (!base) ++ce_count;
        }
        if (ce_count == 0) throw ParseError("no explanation rows in " + csv.string());
        outputs.push_back({dir / "pareto_front.svg",
                           render_scatter_matrix_svg("Pareto front (red: base, blue: CEs)",
                                                     n_obj, points, is_base)});
    }

    // All inputs parsed and rendered; only now touch the filesystem.
    for (const auto& r : outputs) {
        std::ofstream out(r.path, std::ios::binary);
        if (!out) throw IoError("cannot write file: " + r.path.string());
        out << r.content;
    }
}

}  // namespace pce
