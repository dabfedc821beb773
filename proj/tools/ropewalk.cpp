// ropewalk: thickness, struts, tightening and contact plots for polygonal links.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include <ropewalk/ropewalk.hpp>

namespace rw = ropewalk;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

rw::PolyLink load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rw::Error("cannot open '" + path + "' for reading");
  std::stringstream text;
  text << in.rdbuf();
  const std::string body = text.str();
  bool empty = true;
  std::istringstream lines(body);
  for (std::string line; std::getline(lines, line);) {
    line = line.substr(0, line.find('#'));
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      empty = false;
      break;
    }
  }
  if (empty) throw UsageError("link file '" + path + "' is empty");
  std::istringstream src(body);
  if (body.rfind("VECT", body.find_first_not_of(" \t\r\n")) == body.find_first_not_of(" \t\r\n"))
    return rw::read_vect(src);
  return rw::read_link(src);
}

json strut_json(const rw::Strut& s) {
  json j = {{"a", {{"comp", s.a.comp}, {"edge", s.a.edge}, {"param", s.a.param}}},
            {"b", {{"comp", s.b.comp}, {"edge", s.b.edge}, {"param", s.b.param}}},
            {"chord", s.chord}};
  if (s.lambda) j["lambda"] = *s.lambda;
  return j;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

int cmd_info(const std::string& path, bool as_json, double delta) {
  const rw::PolyLink link = load(path);
  const rw::ThicknessReport rep = rw::thickness(link);
  const auto struts = rw::strut_set(link, rep, delta);
  if (as_json) {
    json gov;
    if (const auto* v = std::get_if<rw::VertexRef>(&rep.governing))
      gov = {{"kind", "kink"}, {"comp", v->comp}, {"vertex", v->vert}};
    else
      gov = {{"kind", "strut"}, {"strut", strut_json(std::get<rw::Strut>(rep.governing))}};
    json out = {{"components", link.num_components()},
                {"vertices", link.num_vertices()},
                {"total_length", rep.total_length},
                {"pthi", rep.pthi},
                {"prop", rep.prop},
                {"governing", gov},
                {"min_minrad", finite_or_null(rep.min_minrad)},
                {"min_strut_halfdist", finite_or_null(rep.min_strut_halfdist)},
                {"delta", delta},
                {"struts", struts.size()}};
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::cout << "components " << link.num_components() << "\n";
  std::cout << "vertices " << link.num_vertices() << "\n";
  std::cout << "length " << fmt(rep.total_length, 6) << "\n";
  std::cout << "PThi " << fmt(rep.pthi, 6) << "\n";
  std::cout << "PRop " << fmt(rep.prop, 4) << "\n";
  if (const auto* v = std::get_if<rw::VertexRef>(&rep.governing))
    std::cout << "governing kink (" << v->comp << "," << v->vert << ")\n";
  else {
    const auto& s = std::get<rw::Strut>(rep.governing);
    std::cout << "governing strut (" << s.a.comp << "," << s.a.edge << ")-(" << s.b.comp << "," << s.b.edge << ")\n";
  }
  std::cout << "min MinRad " << (std::isfinite(rep.min_minrad) ? fmt(rep.min_minrad, 6) : "inf") << "\n";
  std::cout << "struts " << struts.size() << " (delta " << delta << ")\n";
  return 0;
}

struct TightenArgs {
  std::string input;
  std::string seed;
  double tau = 0.5;
  double delta = rw::kDefaultActiveTol;
  int max_steps = 20000;
  double grad_tol = 1e-4;
  int resample_every = 50;
  std::string out;
  std::string log;
  int threads = 1;
  bool quiet = false;
};

rw::TightenConfig make_config(const TightenArgs& a) {
  rw::TightenConfig cfg;
  cfg.tau = a.tau;
  cfg.active_tol = a.delta;
  cfg.max_steps = a.max_steps;
  cfg.grad_tol = a.grad_tol;
  cfg.resample_every = a.resample_every;
  cfg.validate();
  return cfg;
}

int cmd_tighten(const TightenArgs& a) {
  if (a.input.empty() == a.seed.empty()) throw UsageError("give exactly one of a link file or --seed");
  if (a.threads < 1) throw UsageError("--threads must be at least 1");
  const rw::PolyLink seed = a.seed.empty() ? load(a.input) : rw::seeds::from_spec(a.seed);
  rw::TightenConfig cfg = make_config(a);
  const auto t0 = std::chrono::steady_clock::now();
  if (!a.quiet)
    cfg.on_step = [&](int k, const rw::PolyLink& l) {
      if ((k + 1) % 100 == 0) {
        const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << "step " << k + 1 << "  length " << fmt(rw::total_length(l), 6) << "  " << fmt(el, 1) << " s\n";
      }
    };
  const rw::TightenResult res = rw::tighten(seed, cfg);
  if (!a.out.empty()) rw::write_link(std::filesystem::path(a.out), res.link);
  if (!a.log.empty()) rw::write_step_log(std::filesystem::path(a.log), res.log);
  const rw::SmoothBound sb = rw::smooth_bound(res.link);
  std::cout << "steps " << res.log.size() << (res.converged ? " (converged)" : "") << "\n";
  std::cout << "PRop " << fmt(res.report.prop, 4) << "\n";
  std::cout << "smooth bound " << fmt(sb.bound, 4) << "\n";
  std::cout << "active struts " << res.active.num_struts() << ", kinks " << res.active.num_kinks() << "\n";
  return 0;
}

int cmd_struts(const std::string& path, double delta, const std::string& out) {
  const rw::PolyLink link = load(path);
  const auto struts = rw::struts_with_multipliers(link, delta);
  if (out.empty())
    rw::write_struts_csv(std::cout, struts);
  else
    rw::write_struts_csv(std::filesystem::path(out), struts);
  return 0;
}

int cmd_contactmap(const std::string& path, const std::string& out, const std::string& style_path, double delta) {
  const rw::PolyLink link = load(path);
  const rw::PlotStyle style = style_path.empty() ? rw::default_style() : rw::read_style(std::filesystem::path(style_path));
  const rw::ContactPlot plot = rw::build_contact_plot(link, rw::struts_with_multipliers(link, delta));
  if (out.empty()) {
    rw::emit_svg(std::cout, plot, style);
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw rw::Error("cannot open '" + out + "' for writing");
    rw::emit_svg(f, plot, style);
  }
  return 0;
}

int cmd_smoothbound(const std::string& path) {
  const rw::SmoothBound sb = rw::smooth_bound(load(path));
  std::cout << "PRop " << fmt(sb.polygon_ropelength, 4) << "\n";
  std::cout << "smooth bound " << fmt(sb.bound, 4) << "\n";
  std::cout << "smooth length " << fmt(sb.smooth_length, 6) << ", thickness " << fmt(sb.smooth_thickness, 6) << "\n";
  return 0;
}

struct BenchRow {
  const char* name;
  const char* seed;
  double known;
  double limit;  // PRop must not exceed this
};

int cmd_bench(bool quick, bool borromean, int max_steps) {
  std::vector<BenchRow> rows{{"hopf", "hopf:108", 8.0 * std::numbers::pi, 25.26}};
  if (!quick) rows.push_back({"chain", "chain:128", 12.0 * std::numbers::pi + 4.0, 41.92});
  if (borromean) rows.push_back({"borromean", "borromean:210", 58.006, 58.32});
  bool ok = true;
  std::cout << "row        edges  PRop       bound      known      rel.err   time\n";
  for (const auto& r : rows) {
    rw::TightenConfig cfg;
    cfg.max_steps = max_steps;
    const auto t0 = std::chrono::steady_clock::now();
    const rw::TightenResult res = rw::tighten(rw::seeds::from_spec(r.seed), cfg);
    const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double bound = rw::smooth_ropelength_bound(res.link);
    const double err = (res.report.prop - r.known) / r.known;
    const bool pass = res.report.prop <= r.limit && bound <= res.report.prop;
    ok = ok && pass;
    std::printf("%-10s %5d  %-9s  %-9s  %-9s  %6.3f%%   %.0f s  %s\n", r.name, res.link.num_edges(),
                fmt(res.report.prop, 4).c_str(), fmt(bound, 4).c_str(), fmt(r.known, 4).c_str(), 100.0 * err, el,
                pass ? "ok" : "MISSED");
  }
  return ok ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ropewalk: thickness, ropelength and tightening of polygonal knots and links"};
  app.require_subcommand(1);

  bool info_json = false;
  std::string path;
  double delta = rw::kDefaultActiveTol;
  auto* info = app.add_subcommand("info", "Thickness report for a link file");
  info->add_option("link", path, "POLYLINK or VECT file")->required();
  info->add_flag("--json", info_json, "Machine-readable output");
  info->add_option("--delta", delta, "Strut tolerance on the chord")->check(CLI::NonNegativeNumber);

  TightenArgs targs;
  auto* tight = app.add_subcommand("tighten", "Minimise length at fixed thickness");
  tight->add_option("link", targs.input, "Seed link file");
  tight->add_option("--seed", targs.seed, "Generated seed, e.g. hopf:108, torus:2,3,400, chain:128");
  tight->add_option("--tau", targs.tau, "Target thickness")->check(CLI::PositiveNumber);
  tight->add_option("--delta", targs.delta, "Active-constraint tolerance")->check(CLI::PositiveNumber);
  tight->add_option("--max-steps", targs.max_steps, "Step limit")->check(CLI::NonNegativeNumber);
  tight->add_option("--grad-tol", targs.grad_tol, "Projected-gradient stopping tolerance")->check(CLI::PositiveNumber);
  tight->add_option("--resample-every", targs.resample_every, "Accepted steps between equilateralisations (0: never)")
      ->check(CLI::NonNegativeNumber);
  tight->add_option("--out", targs.out, "Write the final link here");
  tight->add_option("--log", targs.log, "Write the step log (CSV) here");
  tight->add_option("--threads", targs.threads, "Worker cap (computation is sequential)");
  tight->add_flag("--quiet", targs.quiet, "No progress on stderr");

  std::string out;
  auto* struts = app.add_subcommand("struts", "Strut set with multipliers as CSV");
  struts->add_option("link", path, "Link file")->required();
  struts->add_option("--delta", delta, "Strut tolerance on the chord")->check(CLI::NonNegativeNumber);
  struts->add_option("--out", out, "CSV path (default stdout)");

  std::string style;
  auto* cmap = app.add_subcommand("contactmap", "Self-contact plot as SVG");
  cmap->add_option("link", path, "Link file")->required();
  cmap->add_option("--out", out, "SVG path (default stdout)");
  cmap->add_option("--style", style, "Style file (default $ROPEWALK_STYLE)");
  cmap->add_option("--delta", delta, "Strut tolerance on the chord")->check(CLI::NonNegativeNumber);

  auto* smooth = app.add_subcommand("smoothbound", "Ropelength of the corner-rounded curve");
  smooth->add_option("link", path, "Link file")->required();

  bool quick = false;
  bool borromean = false;
  int bench_steps = 20000;
  auto* bench = app.add_subcommand("bench", "Tighten the validation links and compare with known minima");
  bench->add_flag("--quick", quick, "Hopf link only");
  bench->add_flag("--borromean", borromean, "Include the Borromean rings (slow)");
  bench->add_option("--max-steps", bench_steps, "Step limit per run")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*info) return cmd_info(path, info_json, delta);
    if (*tight) return cmd_tighten(targs);
    if (*struts) return cmd_struts(path, delta, out);
    if (*cmap) return cmd_contactmap(path, out, style, delta);
    if (*smooth) return cmd_smoothbound(path);
    if (*bench) return cmd_bench(quick, borromean, bench_steps);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const rw::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const rw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
