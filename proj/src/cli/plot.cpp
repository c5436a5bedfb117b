// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "raydf/cli.hpp"
#include "raydf/error.hpp"

namespace raydf::cli {

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != t.header.size())
      throw DataError("csv line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  if (first) throw DataError("csv has no header");
  return t;
}

namespace {

bool to_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(v);
}

int column(const CsvTable& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw UsageError("csv has no column '" + name + "'");
  return static_cast<int>(it - t.header.begin());
}

bool numeric_column(const CsvTable& t, int c) {
  double v;
  bool any = false;
  for (const auto& r : t.rows) {
    if (r[c].empty()) continue;
    if (!to_number(r[c], v)) return false;
    any = true;
  }
  return any;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> pts;
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string plot_svg(const CsvTable& table, const std::string& x, const std::vector<std::string>& ys,
                     const std::string& group, const std::string& title) {
  if (table.rows.empty()) throw DataError("csv has no data rows");
  const int xc = x.empty() ? 0 : column(table, x);
  if (!numeric_column(table, xc)) throw DataError("x column is not numeric");
  std::vector<int> ycols;
  if (ys.empty()) {
    for (int c = 0; c < static_cast<int>(table.header.size()); ++c)
      if (c != xc && table.header[c] != group && numeric_column(table, c)) ycols.push_back(c);
  } else {
    for (const auto& y : ys) ycols.push_back(column(table, y));
  }
  if (ycols.empty()) throw DataError("no numeric series to plot");
  const int gc = group.empty() ? -1 : column(table, group);

  // Series keyed by (y column, group value) in first-seen order.
  std::vector<Series> series;
  std::map<std::pair<int, std::string>, std::size_t> index;
  for (const auto& r : table.rows) {
    double xv;
    if (!to_number(r[xc], xv)) continue;
    for (int yc : ycols) {
      double yv;
      if (!to_number(r[yc], yv)) continue;
      const std::string g = gc >= 0 ? r[gc] : "";
      const auto key = std::make_pair(yc, g);
      auto it = index.find(key);
      if (it == index.end()) {
        std::string label = table.header[yc];
        if (gc >= 0) label += " " + table.header[gc] + "=" + g;
        it = index.emplace(key, series.size()).first;
        series.push_back({label, {}});
      }
      series[it->second].pts.emplace_back(xv, yv);
    }
  }
  if (series.empty()) throw DataError("no plottable points");

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (const auto& [a, b] : s.pts) {
      x0 = std::min(x0, a), x1 = std::max(x1, a);
      y0 = std::min(y0, b), y1 = std::max(y1, b);
    }
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;

  const double W = 720, H = 440, L = 70, R = 200, T = 40, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return T + (1.0 - (v - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << L + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(title) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    o << "<line x1=\"" << px(xv) << "\" y1=\"" << T + ph << "\" x2=\"" << px(xv) << "\" y2=\""
      << T + ph + 5 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << px(xv) << "\" y=\"" << T + ph + 18 << "\" text-anchor=\"middle\">"
      << fmt(xv) << "</text>\n";
    o << "<line x1=\"" << L - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << L << "\" y2=\"" << py(yv)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << L - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv)
      << "</text>\n";
  }
  o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
    << escape(table.header[xc]) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[i].pts.size(); ++k) {
      if (k) o << ' ';
      o << fmt(px(series[i].pts[k].first)) << ',' << fmt(py(series[i].pts[k].second));
    }
    o << "\"/>\n";
    const double ly = T + 12 + 18.0 * static_cast<double>(i);
    o << "<line x1=\"" << L + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << L + pw + 32 << "\" y2=\""
      << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << L + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape(series[i].label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace raydf::cli
