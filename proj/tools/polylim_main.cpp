// polylim: generate polygonal branch-limit constraints, reproduce the
// side-count tables, profile per-side errors, and run the linear OPF.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polylim/caseio.hpp"
#include "polylim/halfplanes.hpp"
#include "polylim/lopf.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string num12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("POLYLIM_OUT_DIR"); env && *env) return env;
  return ".";
}

std::filesystem::path write_file(const std::string& dir, const std::string& name,
                                 const std::string& content) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  return path;
}

polylim::PolygonKind parse_kind(const std::string& kind) {
  return kind == "regular" ? polylim::PolygonKind::Regular : polylim::PolygonKind::Irregular;
}

struct RunReport {
  nlohmann::json j;

  explicit RunReport(int argc, char** argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
      if (i) cmd += ' ';
      cmd += argv[i];
    }
    j["command"] = cmd;
    j["timings_ms"] = nlohmann::json::object();
    j["outputs"] = nlohmann::json::array();
    j["summary"] = nlohmann::json::object();
  }

  void timing(const std::string& phase, double ms) { j["timings_ms"][phase] = ms; }
  void output(const std::filesystem::path& p) { j["outputs"].push_back(p.string()); }
  void print() const { std::cout << j.dump(2) << "\n"; }
};

std::string vertices_csv(const polylim::Polygon& poly) {
  std::string out = "vertex,p_mva,q_mva\n";
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    out += std::to_string(i + 1) + "," + num12(poly.vertices[i].p) + "," +
           num12(poly.vertices[i].q) + "\n";
  }
  return out;
}

std::string vertices_json(const polylim::Polygon& poly) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    arr.push_back(
        {{"vertex", i + 1}, {"p", poly.vertices[i].p}, {"q", poly.vertices[i].q}});
  }
  return arr.dump(2);
}

int cmd_polygon(double s, double e, const std::string& kind, const std::string& format,
                const std::string& out_dir) {
  const polylim::CircleLimit limit{s, 0};
  const polylim::Polygon poly = parse_kind(kind) == polylim::PolygonKind::Regular
                                    ? polylim::build_regular(limit, e)
                                    : polylim::build_irregular(limit, e);
  const std::vector<polylim::ConstraintSet> sets = {polylim::polygon_to_constraints(poly)};
  const std::string dir = resolve_out_dir(out_dir);
  if (format == "csv") {
    write_file(dir, "polygon_constraints.csv", polylim::constraints_to_csv(sets));
    write_file(dir, "polygon_vertices.csv", vertices_csv(poly));
  } else {
    write_file(dir, "polygon_constraints.json", polylim::constraints_to_json(sets));
    write_file(dir, "polygon_vertices.json", vertices_json(poly));
  }
  std::cout << poly.m << "\n";
  return 0;
}

int cmd_table1(const std::string& out_dir) {
  const std::vector<double> errors = {0.1, 0.2, 0.3};
  const std::vector<double> limits = {16, 220, 880, 1800};
  std::string csv = "e_mva,s_mva,m_regular,m_irregular\n";
  std::printf("%-8s%-36s%s\n", "", "regular polygon", "irregular polygon");
  std::printf("%-8s", "e (MVA)");
  for (int rep = 0; rep < 2; ++rep) {
    for (double s : limits) std::printf("%-9g", s);
  }
  std::printf("\n");
  for (double e : errors) {
    std::printf("%-8g", e);
    std::string irr_cells;
    for (double s : limits) {
      const int mreg = polylim::regular_side_count({s, 0}, e);
      const int mirr = 4 * polylim::irregular_quadrant_count({s, 0}, e);
      std::printf("%-9d", mreg);
      char cell[32];
      std::snprintf(cell, sizeof(cell), "%-9d", mirr);
      irr_cells += cell;
      csv += num12(e) + "," + num12(s) + "," + std::to_string(mreg) + "," +
             std::to_string(mirr) + "\n";
    }
    std::printf("%s\n", irr_cells.c_str());
  }
  const auto path = write_file(resolve_out_dir(out_dir), "table1.csv", csv);
  std::cerr << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_table2(const std::vector<std::string>& case_paths, const std::string& out_dir) {
  const std::vector<double> errors = {0.1, 0.2, 0.3};
  std::string csv = "case,e_mva,regular_total,irregular_total\n";
  std::printf("%-12s%-8s%-16s%s\n", "case", "e (MVA)", "regular total", "irregular total");
  for (const std::string& path : case_paths) {
    const polylim::CaseData cd = polylim::load_case(path);
    const auto limits = polylim::branch_limits(cd);
    const std::string label = cd.name.empty() ? path : cd.name;
    for (double e : errors) {
      const long long reg =
          polylim::count_system_constraints(limits, e, polylim::PolygonKind::Regular);
      const long long irr =
          polylim::count_system_constraints(limits, e, polylim::PolygonKind::Irregular);
      std::printf("%-12s%-8g%-16lld%lld\n", label.c_str(), e, reg, irr);
      csv += label + "," + num12(e) + "," + std::to_string(reg) + "," + std::to_string(irr) +
             "\n";
    }
  }
  const auto path = write_file(resolve_out_dir(out_dir), "table2.csv", csv);
  std::cerr << "wrote " << path.string() << "\n";
  return 0;
}

// Rows for one polygon, plus the first-segment sweep over the standard
// limits; min/max flags use a 1e-9*s tolerance so mirror-image ties count.
int cmd_profile(double s, int mq, double e, const std::string& out_dir) {
  const polylim::CircleLimit limit{s, 0};
  const polylim::Polygon poly =
      mq > 0 ? polylim::build_irregular_mq(limit, mq) : polylim::build_irregular(limit, e);

  double min_sag = poly.sides[0].sagitta, max_len = poly.sides[0].length;
  for (const polylim::ChordSpec& side : poly.sides) {
    min_sag = std::min(min_sag, side.sagitta);
    max_len = std::max(max_len, side.length);
  }
  const double tol = 1e-9 * s;
  std::string csv = "side,length_mva,sagitta_mva,delta_theta_rad,is_min_error,is_max_length\n";
  for (std::size_t i = 0; i < poly.sides.size(); ++i) {
    const polylim::ChordSpec& side = poly.sides[i];
    csv += std::to_string(i + 1) + "," + num12(side.length) + "," + num12(side.sagitta) + "," +
           num12(side.delta_theta) + "," + (side.sagitta <= min_sag + tol ? "1" : "0") + "," +
           (side.length >= max_len - tol ? "1" : "0") + "\n";
  }
  const std::string dir = resolve_out_dir(out_dir);
  const auto sides_path = write_file(dir, "profile_sides.csv", csv);

  std::string sweep = "limit_mva,e_min_mva,mq,delta_theta_1_rad,l_fg_mva,e_1_mva\n";
  for (double lim : {16.0, 220.0, 880.0, 1800.0}) {
    for (int i = 0; i < 25; ++i) {
      const double ee = 0.01 * std::pow(100.0, i / 24.0);  // log grid 0.01..1 MVA
      const int q = polylim::irregular_quadrant_count({lim, 0}, ee);
      const polylim::FirstSegment fs = polylim::first_segment_stats({lim, 0}, q);
      sweep += num12(lim) + "," + num12(ee) + "," + std::to_string(q) + "," +
               num12(fs.delta_theta_1) + "," + num12(fs.l_fg) + "," + num12(fs.e_1) + "\n";
    }
  }
  const auto sweep_path = write_file(dir, "profile_sweep.csv", sweep);

  std::cout << poly.m << "\n";
  std::cerr << "wrote " << sides_path.string() << " and " << sweep_path.string() << "\n";
  return 0;
}

int cmd_opf(const std::string& case_path, double e, const std::string& kind, bool parallel,
            const std::string& out_dir, RunReport& report) {
  const std::string dir = resolve_out_dir(out_dir);
  polylim::LpOptions opts;
  opts.parallel = parallel;

  auto t0 = Clock::now();
  const polylim::CaseData cd = polylim::load_case(case_path);
  report.timing("parse", ms_since(t0));

  t0 = Clock::now();
  const polylim::LopfModel model = polylim::build_model(cd, e, parse_kind(kind), parallel);
  report.timing("build", ms_since(t0));

  t0 = Clock::now();
  const polylim::OpfSolution sol = polylim::solve_built_model(cd, model, opts);
  report.timing("solve", ms_since(t0));

  report.output(write_file(dir, "opf_solution.json", polylim::solution_to_json(cd, sol)));
  report.j["summary"]["status"] = sol.status == polylim::LpStatus::Optimal ? "optimal"
                                  : sol.status == polylim::LpStatus::Infeasible
                                      ? "infeasible"
                                      : "unbounded";
  report.j["summary"]["polygon_rows"] = model.polygon_rows;
  report.j["summary"]["lp_iterations"] = sol.iterations;
  if (sol.status != polylim::LpStatus::Optimal) {
    report.j["error"] = sol.diagnostics;
    report.output(write_file(dir, "opf_report.json", report.j.dump(2)));
    report.print();
    return 2;
  }
  report.j["summary"]["objective_per_hour"] = sol.objective;
  report.j["summary"]["binding_sides"] = sol.binding.size();

  // How many rated branches operate in the wedge that alpha-reduced
  // linearizations would cut away (30 degrees off the Q axis).
  const auto norm = polylim::normalized_flows(sol, model.limits);
  int in_wedge = 0;
  if (!model.limits.empty()) {
    for (char c : polylim::alpha_region_check(norm, {1.0, 0}, 30.0 * 3.14159265358979 / 180.0)) {
      in_wedge += c;
    }
  }
  report.j["summary"]["flows_in_alpha30_region"] = in_wedge;

  report.output(write_file(dir, "opf_flows.csv", polylim::flows_to_csv(cd, sol)));
  report.output(write_file(dir, "opf_report.json", report.j.dump(2)));
  report.print();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piecewise-linear branch limits and a linear OPF harness"};
  app.require_subcommand(1);

  double s = 0.0, e = 0.0;
  int mq = 0;
  std::string kind = "irregular", format = "csv", out_dir, case_path, which;
  std::vector<std::string> case_paths;
  bool parallel = false;

  CLI::App* polygon = app.add_subcommand("polygon", "write half-planes and vertices for one limit");
  polygon->add_option("--s", s, "branch MVA rating")->required();
  polygon->add_option("--e", e, "target error in MVA")->required();
  polygon->add_option("--kind", kind, "regular|irregular")
      ->check(CLI::IsMember({"regular", "irregular"}));
  polygon->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  polygon->add_option("--out-dir", out_dir, "output directory (or POLYLIM_OUT_DIR)");

  CLI::App* tables = app.add_subcommand("tables", "reproduce the side-count tables");
  tables->add_option("which", which, "table1|table2")
      ->required()
      ->check(CLI::IsMember({"table1", "table2"}));
  tables->add_option("--case", case_paths, "case file path(s), required for table2");
  tables->add_option("--out-dir", out_dir, "output directory");

  CLI::App* profile = app.add_subcommand("profile", "per-side error/length profile and sweep");
  profile->add_option("--s", s, "branch MVA rating")->required();
  profile->add_option("--mq", mq, "sides per quadrant");
  profile->add_option("--e", e, "target minimum error in MVA");
  profile->add_option("--out-dir", out_dir, "output directory");

  CLI::App* opf = app.add_subcommand("opf", "solve the linear OPF with polygonal limits");
  opf->add_option("--case", case_path, "case file path")->required();
  opf->add_option("--e", e, "target error in MVA")->required();
  opf->add_option("--kind", kind, "regular|irregular")
      ->check(CLI::IsMember({"regular", "irregular"}));
  opf->add_flag("--parallel", parallel, "parallelize row kernels with OpenMP");
  opf->add_option("--out-dir", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& pe) {
    app.exit(pe);
    return 1;
  }

  RunReport report(argc, argv);
  try {
    if (polygon->parsed()) return cmd_polygon(s, e, kind, format, out_dir);
    if (tables->parsed()) {
      if (which == "table1") return cmd_table1(out_dir);
      if (case_paths.empty()) {
        std::cerr << "error: tables table2 requires at least one --case path\n";
        return 1;
      }
      return cmd_table2(case_paths, out_dir);
    }
    if (profile->parsed()) {
      if ((mq > 0) == (e > 0.0)) {
        std::cerr << "error: profile needs exactly one of --mq or --e\n";
        return 1;
      }
      return cmd_profile(s, mq, e, out_dir);
    }
    return cmd_opf(case_path, e, kind, parallel, out_dir, report);
  } catch (const polylim::ParseError& ex) {
    report.j["error"] = ex.what();
    if (opf->parsed()) report.print();
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::domain_error& ex) {
    report.j["error"] = ex.what();
    if (opf->parsed()) report.print();
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& ex) {
    report.j["error"] = ex.what();
    if (opf->parsed()) report.print();
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    // Solver failures; the report carries the error too.
    report.j["error"] = ex.what();
    if (opf->parsed()) report.print();
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}
