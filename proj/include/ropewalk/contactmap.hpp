#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "thickness.hpp"

namespace ropewalk {

/// One contact: a square of side `size` centred at arclength pair (s, t), s < t.
struct ContactBox {
  double s = 0.0;
  double t = 0.0;
  double size = 0.0;
  std::optional<double> weight;
};

struct PlotTick {
  double value = 0.0;
  bool component_break = false;
};

/// Rectangle [s0, s1] x [t0, t1] covering contacts between components ci <= cj.
/// Diagonal blocks (ci == cj) are drawn as their lower triangle.
struct PlotRegion {
  int ci = 0;
  int cj = 0;
  double s0 = 0.0, s1 = 0.0, t0 = 0.0, t1 = 0.0;
  bool dark = false;
};

/// Device-independent description of the triangular self-contact plot.
struct ContactPlot {
  double total_length = 0.0;
  std::vector<double> component_offsets;
  std::vector<double> component_lengths;
  double box_size = 0.0;
  std::vector<ContactBox> boxes;
  std::vector<PlotTick> ticks;
  std::vector<PlotRegion> regions;
};

/// Maps every strut with a positive multiplier to a box at its endpoints'
/// global arclength coordinates. With `require_multiplier` false, struts whose
/// multiplier is unsolved are drawn too (without weight); zero multipliers are
/// always omitted.
inline ContactPlot build_contact_plot(const PolyLink& link, const std::vector<Strut>& struts,
                                      bool require_multiplier = true) {
  const ArclengthIndex idx(link);
  ContactPlot plot;
  plot.total_length = idx.total_length();
  for (int c = 0; c < link.num_components(); ++c) {
    plot.component_offsets.push_back(idx.component_offsets()[static_cast<std::size_t>(c)]);
    plot.component_lengths.push_back(idx.component_lengths()[static_cast<std::size_t>(c)]);
  }
  plot.box_size = average_edge_length(link);

  for (const auto& st : struts) {
    for (const StrutEnd* e : {&st.a, &st.b})
      if (e->comp < 0 || e->comp >= link.num_components() || e->edge < 0 ||
          e->edge >= link.component(e->comp).size())
        throw GeometryError("strut references edge (" + std::to_string(e->comp) + "," + std::to_string(e->edge) +
                            ") outside the link");
    if (st.lambda ? !(*st.lambda > 0.0) : require_multiplier) continue;
    double s = idx.coordinate(st.a.comp, st.a.edge, st.a.param);
    double t = idx.coordinate(st.b.comp, st.b.edge, st.b.param);
    if (s > t) std::swap(s, t);
    plot.boxes.push_back({s, t, plot.box_size, st.lambda});
  }

  const double total = plot.total_length;
  for (int k = 0; k <= 10; ++k) plot.ticks.push_back({total * k / 10.0, false});
  for (std::size_t c = 1; c < plot.component_offsets.size(); ++c) plot.ticks.push_back({plot.component_offsets[c], true});
  std::stable_sort(plot.ticks.begin(), plot.ticks.end(),
                   [](const PlotTick& a, const PlotTick& b) { return a.value < b.value; });

  const int n = link.num_components();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      plot.regions.push_back({i, j, plot.component_offsets[ui], plot.component_offsets[ui] + plot.component_lengths[ui],
                              plot.component_offsets[uj], plot.component_offsets[uj] + plot.component_lengths[uj],
                              (i + j) % 2 == 1});
    }
  return plot;
}

/// Colours, sizes and strokes of the rendered plot.
struct PlotStyle {
  int width = 1000;
  int height = 1000;
  double margin = 70.0;
  std::string background = "#ffffff";
  std::string shade_light = "#f4f4f4";
  std::string shade_dark = "#e2e2e2";
  std::string box_fill = "#1b6e2d";
  std::string box_stroke = "none";
  std::string axis_color = "#000000";
  std::vector<std::string> band_colors{"#8c8c8c", "#f28e1c", "#3aa655"};
  double band_width = 10.0;
  double stroke_width = 1.0;
  double font_size = 12.0;
};

/// Reads `key = value` lines (whole-line '#' comments) over the defaults. Unknown keys
/// and malformed values raise ParseError.
inline PlotStyle read_style(std::istream& in) {
  PlotStyle st;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    // colours start with '#', so only whole-line comments
    if (const auto b = line.find_first_not_of(" \t\r"); b != std::string::npos && line[b] == '#') continue;
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", no);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    auto number = [&] {
      double x = 0.0;
      const auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), x);
      if (ec != std::errc() || p != val.data() + val.size() || !std::isfinite(x) || x < 0.0)
        throw ParseError("bad value for '" + key + "'", no);
      return x;
    };
    if (key == "width") st.width = static_cast<int>(number());
    else if (key == "height") st.height = static_cast<int>(number());
    else if (key == "margin") st.margin = number();
    else if (key == "background") st.background = val;
    else if (key == "shade_light") st.shade_light = val;
    else if (key == "shade_dark") st.shade_dark = val;
    else if (key == "box_fill") st.box_fill = val;
    else if (key == "box_stroke") st.box_stroke = val;
    else if (key == "axis_color") st.axis_color = val;
    else if (key == "band_width") st.band_width = number();
    else if (key == "stroke_width") st.stroke_width = number();
    else if (key == "font_size") st.font_size = number();
    else if (key == "band_colors") {
      st.band_colors.clear();
      std::stringstream ss(val);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!trim(tok).empty()) st.band_colors.push_back(trim(tok));
      if (st.band_colors.empty()) throw ParseError("band_colors needs at least one colour", no);
    } else
      throw ParseError("unknown style key '" + key + "'", no);
  }
  if (st.width <= 0 || st.height <= 0) throw ParseError("canvas size must be positive", 0);
  return st;
}

inline PlotStyle read_style(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open style file '" + path.string() + "'");
  return read_style(in);
}

/// Style from the file named by ROPEWALK_STYLE, or the defaults.
inline PlotStyle default_style() {
  if (const char* p = std::getenv("ROPEWALK_STYLE"); p && *p) return read_style(std::filesystem::path(p));
  return {};
}

namespace detail {
inline std::string fixed(double x, int digits = 3) {
  std::array<char, 64> buf{};
  if (x == 0.0) x = 0.0;  // no "-0.000"
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::fixed, digits);
  std::string s(buf.data(), r.ptr);
  if (s.find_first_not_of("-0.") == std::string::npos) s = std::string(digits > 0 ? "0." : "0") + std::string(static_cast<std::size_t>(digits), '0');
  return s;
}
}  // namespace detail

/// Renders the plot as SVG 1.1: s runs left to right, t top to bottom, so
/// contacts (s < t) fill the lower triangle. Output depends only on the inputs.
inline void emit_svg(std::ostream& out, const ContactPlot& plot, const PlotStyle& style = {}) {
  using detail::fixed;
  const double side = std::max(1.0, std::min(style.width, style.height) - 2.0 * style.margin);
  const double total = plot.total_length > 0.0 ? plot.total_length : 1.0;
  const double k = side / total;
  const double x0 = style.margin;
  const double y0 = style.margin;
  auto X = [&](double s) { return fixed(x0 + k * s); };
  auto Y = [&](double t) { return fixed(y0 + k * t); };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << style.width << "\" height=\""
      << style.height << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height << "\" fill=\""
      << style.background << "\"/>\n";

  out << "<g id=\"regions\" stroke=\"none\">\n";
  for (const auto& r : plot.regions) {
    const std::string& fill = r.dark ? style.shade_dark : style.shade_light;
    if (r.ci == r.cj)
      out << "<polygon points=\"" << X(r.s0) << ',' << Y(r.t0) << ' ' << X(r.s0) << ',' << Y(r.t1) << ' ' << X(r.s1)
          << ',' << Y(r.t1) << "\" fill=\"" << fill << "\"/>\n";
    else
      out << "<rect x=\"" << X(r.s0) << "\" y=\"" << Y(r.t0) << "\" width=\"" << fixed(k * (r.s1 - r.s0))
          << "\" height=\"" << fixed(k * (r.t1 - r.t0)) << "\" fill=\"" << fill << "\"/>\n";
  }
  out << "</g>\n";

  out << "<g id=\"bands\" stroke-width=\"" << fixed(style.band_width) << "\" stroke-linecap=\"butt\">\n";
  for (std::size_t c = 0; c < plot.component_offsets.size(); ++c) {
    const double a = plot.component_offsets[c];
    const double b = a + plot.component_lengths[c];
    const std::string& col = style.band_colors[c % style.band_colors.size()];
    out << "<line x1=\"" << X(a) << "\" y1=\"" << Y(a) << "\" x2=\"" << X(b) << "\" y2=\"" << Y(b) << "\" stroke=\""
        << col << "\"/>\n";
  }
  out << "</g>\n";

  out << "<g id=\"boxes\" fill=\"" << style.box_fill << "\" stroke=\"" << style.box_stroke << "\">\n";
  const double half = 0.5 * k * plot.box_size;
  for (const auto& b : plot.boxes)
    out << "<rect class=\"box\" x=\"" << fixed(x0 + k * b.s - half) << "\" y=\"" << fixed(y0 + k * b.t - half) << "\" width=\""
        << fixed(2.0 * half) << "\" height=\"" << fixed(2.0 * half) << "\"/>\n";
  out << "</g>\n";

  // Axes along the top (s) and left (t) edges; component breaks are labelled
  // further out so they stand clear of the uniform ticks.
  const double tick = 6.0;
  out << "<g id=\"axes\" stroke=\"" << style.axis_color << "\" stroke-width=\"" << fixed(style.stroke_width)
      << "\" fill=\"none\">\n";
  out << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(total) << "\" y2=\"" << Y(0) << "\"/>\n";
  out << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(0) << "\" y2=\"" << Y(total) << "\"/>\n";
  out << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(total) << "\" y2=\"" << Y(total) << "\"/>\n";
  for (const auto& t : plot.ticks) {
    const double len = t.component_break ? 2.5 * tick : tick;
    out << "<line x1=\"" << X(t.value) << "\" y1=\"" << fixed(y0) << "\" x2=\"" << X(t.value) << "\" y2=\""
        << fixed(y0 - len) << "\"/>\n";
    out << "<line x1=\"" << fixed(x0) << "\" y1=\"" << Y(t.value) << "\" x2=\"" << fixed(x0 - len) << "\" y2=\""
        << Y(t.value) << "\"/>\n";
  }
  out << "</g>\n";
  out << "<g id=\"labels\" font-family=\"sans-serif\" font-size=\"" << fixed(style.font_size) << "\" fill=\""
      << style.axis_color << "\">\n";
  for (const auto& t : plot.ticks) {
    const double lift = t.component_break ? 2.5 * tick + 2.0 * style.font_size : tick + 0.5 * style.font_size;
    const std::string label = fixed(t.value, 2);
    const char* cls = t.component_break ? "<text class=\"break\" x=\"" : "<text x=\"";
    out << cls << X(t.value) << "\" y=\"" << fixed(y0 - lift) << "\" text-anchor=\"middle\">" << label
        << "</text>\n";
    out << cls << fixed(x0 - lift) << "\" y=\"" << Y(t.value) << "\" text-anchor=\"end\" dy=\"0.35em\">"
        << label << "</text>\n";
  }
  out << "</g>\n";
  out << "</svg>\n";
}

inline std::string svg_string(const ContactPlot& plot, const PlotStyle& style = {}) {
  std::ostringstream os;
  emit_svg(os, plot, style);
  return os.str();
}

}  // namespace ropewalk
