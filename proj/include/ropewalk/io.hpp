#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "geometry.hpp"
#include "solver.hpp"
#include "thickness.hpp"

namespace ropewalk {

/// Shortest decimal that reads back to exactly `x`.
inline std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_real(std::string_view tok, int line) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("bad number '" + std::string(tok) + "'", line);
  if (!std::isfinite(x)) throw ParseError("non-finite coordinate '" + std::string(tok) + "'", line);
  return x;
}

inline long parse_count(std::string_view tok, int line) {
  long n = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("bad integer '" + std::string(tok) + "'", line);
  return n;
}

// Non-empty lines with '#' comments stripped, tagged with 1-based line numbers.
struct ContentLines {
  std::vector<std::pair<int, std::string>> lines;
  std::size_t next = 0;

  explicit ContentLines(std::istream& in) {
    std::string raw;
    int no = 0;
    while (std::getline(in, raw)) {
      ++no;
      std::string_view v(raw);
      if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
      v = trim(v);
      if (!v.empty()) lines.emplace_back(no, std::string(v));
    }
  }
  bool done() const { return next >= lines.size(); }
  int last_line() const { return lines.empty() ? 0 : lines.back().first; }
  const std::pair<int, std::string>& take(const char* expecting) {
    if (done()) throw ParseError(std::string("unexpected end of file, expected ") + expecting, last_line() + 1);
    return lines[next++];
  }
};

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void check_written(const std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace detail

// ---------------------------------------------------------------- POLYLINK 1

inline void write_link(std::ostream& out, const PolyLink& link) {
  out << "POLYLINK 1\n";
  out << "components " << link.num_components() << "\n";
  for (const auto& c : link.components()) {
    out << "vertices " << c.size() << "\n";
    for (const auto& v : c.vertices())
      out << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << "\n";
  }
}

inline void write_link(const std::filesystem::path& path, const PolyLink& link) {
  auto out = detail::open_out(path);
  write_link(out, link);
  detail::check_written(out, path);
}

/// Parses a POLYLINK 1 file. Throws ParseError carrying the offending line.
inline PolyLink read_link(std::istream& in) {
  detail::ContentLines src(in);
  {
    const auto& [no, text] = src.take("header");
    const auto tok = detail::split_ws(text);
    if (tok.size() != 2 || tok[0] != "POLYLINK" || tok[1] != "1")
      throw ParseError("expected header 'POLYLINK 1'", no);
  }
  long ncomp = 0;
  {
    const auto& [no, text] = src.take("'components <n>'");
    const auto tok = detail::split_ws(text);
    if (tok.size() != 2 || tok[0] != "components") throw ParseError("expected 'components <n>'", no);
    ncomp = detail::parse_count(tok[1], no);
    if (ncomp < 1) throw ParseError("link needs at least one component", no);
  }
  std::vector<Component> comps;
  for (long c = 0; c < ncomp; ++c) {
    const auto& [no, text] = src.take("'vertices <m>'");
    const auto tok = detail::split_ws(text);
    if (tok.size() != 2 || tok[0] != "vertices") throw ParseError("expected 'vertices <m>'", no);
    const long m = detail::parse_count(tok[1], no);
    if (m < 3) throw ParseError("component needs >= 3 vertices", no);
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(m));
    for (long k = 0; k < m; ++k) {
      const auto& [vno, vtext] = src.take("vertex coordinates");
      const auto xyz = detail::split_ws(vtext);
      if (xyz.size() != 3) {
        if (xyz.size() == 2 && (xyz[0] == "vertices" || xyz[0] == "components"))
          throw ParseError("vertex count mismatch: component " + std::to_string(c) + " declares " +
                               std::to_string(m) + " vertices but has " + std::to_string(k),
                           vno);
        throw ParseError("expected 'x y z'", vno);
      }
      pts.emplace_back(detail::parse_real(xyz[0], vno), detail::parse_real(xyz[1], vno),
                       detail::parse_real(xyz[2], vno));
    }
    Component comp(std::move(pts));
    for (int i = 0; i < comp.size(); ++i)
      if (!(comp.edge_length(i) > 0.0))
        throw ParseError("zero-length edge " + std::to_string(i) + " in component " + std::to_string(c), no);
    comps.push_back(std::move(comp));
  }
  if (!src.done()) throw ParseError("vertex count mismatch: unexpected trailing content", src.lines[src.next].first);
  return PolyLink(std::move(comps));
}

inline PolyLink read_link(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_link(in);
}

// ---------------------------------------------------------------- VECT import

/// Reads a Geomview VECT file: every polyline is taken as a closed component;
/// a repeated closing vertex is dropped. Colours are ignored.
inline PolyLink read_vect(std::istream& in) {
  detail::ContentLines src(in);
  std::vector<std::pair<int, std::string_view>> tokens;
  for (const auto& [no, text] : src.lines)
    for (auto t : detail::split_ws(text)) tokens.emplace_back(no, t);
  std::size_t pos = 0;
  auto next = [&](const char* what) -> std::pair<int, std::string_view> {
    if (pos >= tokens.size()) throw ParseError(std::string("unexpected end of file, expected ") + what, src.last_line() + 1);
    return tokens[pos++];
  };
  {
    const auto [no, head] = next("VECT header");
    if (head != "VECT") throw ParseError("expected 'VECT' header", no);
  }
  auto count = [&](const char* what) {
    const auto [no, t] = next(what);
    return std::pair{no, detail::parse_count(t, no)};
  };
  const auto [l1, npoly] = count("polyline count");
  const auto [l2, nvert] = count("vertex count");
  const auto [l3, ncolor] = count("colour count");
  if (npoly < 1 || nvert < 0 || ncolor < 0) throw ParseError("bad VECT counts", l1);
  std::vector<long> per;
  long sum = 0;
  for (long i = 0; i < npoly; ++i) {
    const auto [no, n] = count("polyline vertex count");
    per.push_back(std::labs(n));
    sum += std::labs(n);
  }
  if (sum != nvert) throw ParseError("polyline vertex counts do not sum to " + std::to_string(nvert), l2);
  long csum = 0;
  for (long i = 0; i < npoly; ++i) csum += count("polyline colour count").second;
  if (csum != ncolor) throw ParseError("colour counts do not sum to " + std::to_string(ncolor), l3);
  std::vector<Component> comps;
  for (long n : per) {
    std::vector<Vec3> pts;
    int first_line = 0;
    for (long k = 0; k < n; ++k) {
      Vec3 p;
      for (int d = 0; d < 3; ++d) {
        const auto [no, t] = next("vertex coordinate");
        if (k == 0 && d == 0) first_line = no;
        p(d) = detail::parse_real(t, no);
      }
      pts.push_back(p);
    }
    if (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
    if (pts.size() < 3) throw ParseError("component needs >= 3 vertices", first_line);
    comps.emplace_back(std::move(pts));
  }
  try {
    return PolyLink(std::move(comps));
  } catch (const GeometryError& e) {
    throw ParseError(e.what(), 0);
  }
}

inline PolyLink read_vect(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_vect(in);
}

/// Writes each component as a closed VECT polyline (negative vertex count).
inline void write_vect(std::ostream& out, const PolyLink& link) {
  out << "VECT\n" << link.num_components() << ' ' << link.num_vertices() << " 0\n";
  for (const auto& c : link.components()) out << -c.size() << ' ';
  out << "\n";
  for (int i = 0; i < link.num_components(); ++i) out << "0 ";
  out << "\n";
  for (const auto& c : link.components())
    for (const auto& v : c.vertices())
      out << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << "\n";
}

inline void write_vect(const std::filesystem::path& path, const PolyLink& link) {
  auto out = detail::open_out(path);
  write_vect(out, link);
  detail::check_written(out, path);
}

// ---------------------------------------------------------------- CSV

inline constexpr std::string_view kStrutCsvHeader = "compA,edgeA,u,compB,edgeB,v,chord,lambda";

/// One row per strut in (compA, edgeA, compB, edgeB) order. An unsolved
/// multiplier is written as an empty field.
inline void write_struts_csv(std::ostream& out, std::vector<Strut> struts) {
  std::stable_sort(struts.begin(), struts.end(), strut_order);
  out << kStrutCsvHeader << "\n";
  for (const auto& s : struts) {
    out << s.a.comp << ',' << s.a.edge << ',' << format_double(s.a.param) << ',' << s.b.comp << ',' << s.b.edge
        << ',' << format_double(s.b.param) << ',' << format_double(s.chord) << ',';
    if (s.lambda) out << format_double(*s.lambda);
    out << "\n";
  }
}

inline void write_struts_csv(const std::filesystem::path& path, const std::vector<Strut>& struts) {
  auto out = detail::open_out(path);
  write_struts_csv(out, struts);
  detail::check_written(out, path);
}

namespace detail {
inline std::vector<std::string_view> split_csv(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}
}  // namespace detail

inline std::vector<Strut> read_struts_csv(std::istream& in) {
  std::string line;
  int no = 0;
  std::vector<Strut> out;
  if (!std::getline(in, line) || detail::trim(line) != kStrutCsvHeader)
    throw ParseError("expected header '" + std::string(kStrutCsvHeader) + "'", 1);
  ++no;
  while (std::getline(in, line)) {
    ++no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(detail::trim(line));
    if (f.size() != 8) throw ParseError("expected 8 fields", no);
    Strut s;
    s.a = {static_cast<int>(detail::parse_count(f[0], no)), static_cast<int>(detail::parse_count(f[1], no)),
           detail::parse_real(f[2], no)};
    s.b = {static_cast<int>(detail::parse_count(f[3], no)), static_cast<int>(detail::parse_count(f[4], no)),
           detail::parse_real(f[5], no)};
    s.chord = detail::parse_real(f[6], no);
    if (!f[7].empty()) s.lambda = detail::parse_real(f[7], no);
    out.push_back(s);
  }
  return out;
}

inline constexpr std::string_view kStepLogHeader =
    "step,length_before,length_after,pthi_before,pthi_after,n_active_struts,n_active_kinks,projected_grad_norm,"
    "step_size,accepted";

inline void write_step_log(std::ostream& out, const std::vector<StepReport>& log) {
  out << kStepLogHeader << "\n";
  for (const auto& r : log)
    out << r.step_index << ',' << format_double(r.length_before) << ',' << format_double(r.length_after) << ','
        << format_double(r.pthi_before) << ',' << format_double(r.pthi_after) << ',' << r.n_active_struts << ','
        << r.n_active_kinks << ',' << format_double(r.projected_grad_norm) << ',' << format_double(r.step_size)
        << ',' << (r.accepted ? 1 : 0) << "\n";
}

inline void write_step_log(const std::filesystem::path& path, const std::vector<StepReport>& log) {
  auto out = detail::open_out(path);
  write_step_log(out, log);
  detail::check_written(out, path);
}

inline std::vector<StepReport> read_step_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kStepLogHeader)
    throw ParseError("expected step-log header", 1);
  std::vector<StepReport> out;
  int no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(detail::trim(line));
    if (f.size() != 10) throw ParseError("expected 10 fields", no);
    StepReport r;
    r.step_index = static_cast<int>(detail::parse_count(f[0], no));
    r.length_before = detail::parse_real(f[1], no);
    r.length_after = detail::parse_real(f[2], no);
    r.pthi_before = detail::parse_real(f[3], no);
    r.pthi_after = detail::parse_real(f[4], no);
    r.n_active_struts = static_cast<int>(detail::parse_count(f[5], no));
    r.n_active_kinks = static_cast<int>(detail::parse_count(f[6], no));
    r.projected_grad_norm = detail::parse_real(f[7], no);
    r.step_size = detail::parse_real(f[8], no);
    r.accepted = detail::parse_count(f[9], no) != 0;
    out.push_back(r);
  }
  return out;
}

inline std::vector<StepReport> read_step_log(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_step_log(in);
}

}  // namespace ropewalk
