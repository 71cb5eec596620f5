// Compares the serial and OpenMP paths of the row-parallel kernels, and the
// regular-vs-irregular linear OPF wall time on a case file.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "polylim/caseio.hpp"
#include "polylim/halfplanes.hpp"
#include "polylim/lopf.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = Clock::now();
    fn();
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

std::vector<polylim::CircleLimit> synthetic_limits(int count) {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(16.0, 1800.0);
  std::vector<polylim::CircleLimit> limits(count);
  for (int i = 0; i < count; ++i) limits[i] = {dist(rng), i};
  return limits;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel benchmark"};
  std::string case_path;
  int reps = 5;
  int branches = 2000;
  app.add_option("--case", case_path, "case file for the OPF comparison");
  app.add_option("--reps", reps, "repetitions per measurement");
  app.add_option("--branches", branches, "synthetic branch count");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled at build time; both paths run serially\n");
#endif
  std::printf("%-44s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms", "speedup");

  {
    const auto limits = synthetic_limits(branches);
    std::vector<polylim::ConstraintSet> out_s, out_p;
    const double ts = best_of(reps, [&] {
      out_s = polylim::system_constraints(limits, 0.1, polylim::PolygonKind::Irregular, false);
    });
    const double tp = best_of(reps, [&] {
      out_p = polylim::system_constraints(limits, 0.1, polylim::PolygonKind::Irregular, true);
    });
    const bool same = out_s.size() == out_p.size();
    std::printf("%-44s %12.3f %12.3f %8.2f%s\n",
                ("system_constraints / " + std::to_string(branches) + " branches").c_str(), ts,
                tp, ts / tp, same ? "" : "  MISMATCH");
  }

  {
    const auto poly = polylim::build_irregular({130.0, 0}, 0.1);
    const auto cs = polylim::polygon_to_constraints(poly);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-143.0, 143.0);
    std::vector<polylim::PqPoint> pts(1000000);
    for (auto& pt : pts) pt = {dist(rng), dist(rng)};
    std::vector<char> in_s, in_p;
    const double ts = best_of(reps, [&] { in_s = polylim::classify_points(cs, pts, false); });
    const double tp = best_of(reps, [&] { in_p = polylim::classify_points(cs, pts, true); });
    std::printf("%-44s %12.3f %12.3f %8.2f%s\n", "classify_points / 1e6 points", ts, tp,
                ts / tp, in_s == in_p ? "" : "  MISMATCH");
  }

  if (!case_path.empty()) {
    const polylim::CaseData cd = polylim::load_case(case_path);
    for (const double e : {0.1, 0.05, 0.01}) {
      double obj_s = 0.0, obj_p = 0.0;
      const double ts = best_of(reps, [&] {
        auto sol = polylim::solve_opf(cd, e, polylim::PolygonKind::Irregular, {.parallel = false});
        obj_s = sol.objective;
      });
      const double tp = best_of(reps, [&] {
        auto sol = polylim::solve_opf(cd, e, polylim::PolygonKind::Irregular, {.parallel = true});
        obj_p = sol.objective;
      });
      std::printf("%-44s %12.3f %12.3f %8.2f%s\n",
                  ("opf irregular e=" + std::to_string(e)).c_str(), ts, tp, ts / tp,
                  obj_s == obj_p ? "" : "  MISMATCH");
    }

    std::printf("\n%-44s %12s %12s\n", "build+solve", "regular ms", "irregular ms");
    for (const double e : {0.1, 0.05, 0.01}) {
      const double tr = best_of(reps, [&] {
        (void)polylim::solve_opf(cd, e, polylim::PolygonKind::Regular, {});
      });
      const double ti = best_of(reps, [&] {
        (void)polylim::solve_opf(cd, e, polylim::PolygonKind::Irregular, {});
      });
      std::printf("%-44s %12.3f %12.3f\n", ("e=" + std::to_string(e)).c_str(), tr, ti);
    }
  }
  return 0;
}
