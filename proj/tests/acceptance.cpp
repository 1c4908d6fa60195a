// Acceptance harness: one PASS/FAIL line per criterion.
//
// Criteria listed with --known-failure still print their real verdict but do
// not change the exit status. The reasons are written up in the README.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gheat/bench.hpp"
#include "gheat/gexp.hpp"
#include "gheat/linsys.hpp"
#include "gheat/stepper.hpp"
#include "oracles.hpp"

using namespace gheat;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within_rel(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

// Target values, per level (10,50) (20,200) (40,800) (80,3200).
const std::vector<double> ex1_linf{1.9013e-01, 5.1659e-02, 1.3075e-02, 3.2597e-03};
const std::vector<double> ex1_l2{1.6062e-01, 4.3689e-02, 1.1067e-02, 2.7594e-03};
const std::vector<double> ex1_orders{1.88, 1.98, 2.00};
const std::vector<double> ex2_linf{2.3641e-01, 9.0651e-02, 2.8399e-02, 7.3077e-03};
const std::vector<double> ex2_orders{1.38, 1.65, 1.96};

// State shared between criteria 1-3 and 6.
struct Runs {
  std::vector<bench::LevelRun> example1;
  std::vector<bench::LevelRun> example2;
  std::vector<double> reference_decrease;
  std::vector<int> reference_iterations;
  bool example1_ok = false;
  bool example2_ok = false;
};

Verdict example1_table(Runs& runs) {
  const auto m = bench::example1_problem();
  const auto levels = bench::table_levels();
  const auto start = std::chrono::steady_clock::now();
  runs.example1 = bench::convergence_study(m.problem, m.exact, levels, SolverConfig{});
  runs.example1_ok = true;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  bool ok = true;
  std::ostringstream os;
  os << "linf";
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& row = runs.example1[k].row;
    ok &= within_rel(row.linf_error, ex1_linf[k], 0.10);
    ok &= row.l2_error <= 2 * ex1_l2[k] && row.l2_error >= ex1_l2[k] / 2;
    os << fmt(" %.4e", row.linf_error);
  }
  os << " orders";
  for (std::size_t k = 1; k < 4; ++k) {
    const auto& row = runs.example1[k].row;
    ok &= std::abs(*row.linf_order - ex1_orders[k - 1]) <= 0.10;
    ok &= std::abs(*row.l2_order - ex1_orders[k - 1]) <= 0.15;
    os << fmt(" %.3f/%.3f", *row.linf_order, *row.l2_order);
  }
  os << " l2";
  for (const auto& r : runs.example1) os << fmt(" %.4e", r.row.l2_error);
  os << fmt(" (%.0fs)", secs);
  return {ok, os.str()};
}

Verdict example2_table(Runs& runs, const std::filesystem::path& cache_dir) {
  const auto p = bench::example2_problem();
  const auto levels = bench::table_levels();
  const Grid fine = make_grid(1.0, 320, 1.0, 6400);
  const Grid stored = make_grid(1.0, 80, 1.0, 3200);
  const auto start = std::chrono::steady_clock::now();
  const auto ref = bench::cached_reference("example2", p, fine, stored, SolverConfig{}, cache_dir);
  runs.reference_decrease = ref.worst_decrease();
  runs.reference_iterations = ref.iterations();
  runs.example2 = bench::convergence_study(p, ref.evaluator(), levels, SolverConfig{});
  runs.example2_ok = true;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  bool ok = true;
  std::ostringstream os;
  os << "reference M=320 N=6400; linf";
  for (std::size_t k = 0; k < 4; ++k) {
    ok &= within_rel(runs.example2[k].row.linf_error, ex2_linf[k], 0.15);
    os << fmt(" %.4e", runs.example2[k].row.linf_error);
  }
  os << " orders";
  for (std::size_t k = 1; k < 4; ++k) {
    const double order = *runs.example2[k].row.linf_order;
    ok &= std::abs(order - ex2_orders[k - 1]) <= 0.15;
    os << fmt(" %.3f", order);
  }
  os << fmt(" (%.0fs)", secs);
  return {ok, os.str()};
}

std::pair<bool, std::string> iteration_range(const bench::LevelRun& run, int lo, int hi, int k_max) {
  std::map<int, int> histogram;
  bool ok = true;
  for (const auto& r : run.reports) {
    ++histogram[r.iterations];
    ok &= r.iterations >= lo && r.iterations <= hi && r.iterations < k_max;
  }
  std::ostringstream os;
  os << "{";
  for (auto it = histogram.begin(); it != histogram.end(); ++it)
    os << (it == histogram.begin() ? "" : ", ") << "k=" << it->first << ": " << it->second;
  os << "}";
  return {ok, os.str()};
}

Verdict iteration_counts(const Runs& runs) {
  if (!runs.example1_ok || !runs.example2_ok) return {false, "criteria 1 and 2 did not complete"};
  const int k_max = SolverConfig{}.k_max;
  const auto [ok1, h1] = iteration_range(runs.example1.back(), 3, 5, k_max);
  const auto [ok2, h2] = iteration_range(runs.example2.back(), 3, 6, k_max);
  return {ok1 && ok2, "example 1 " + std::string(ok1 ? "ok " : "out of [3,5] ") + h1 + "; example 2 " +
                          (ok2 ? "ok " : "out of [3,6] ") + h2};
}

Verdict gexp_identities() {
  auto query = [](SpatialFunction payoff, SpaceTimeFunction boundary) {
    gexp::GExpQuery q;
    q.payoff = std::move(payoff);
    q.boundary = std::move(boundary);
    q.box = bench::example_box();
    q.cells = 40;
    q.steps = 100;
    return q;
  };
  const SolverConfig cfg;
  struct Case {
    const char* name;
    gexp::GExpQuery q;
    double want;
  };
  const std::vector<Case> cases{
      {"x^2", query([](double x, double) { return x * x; }, [](double t, double x, double) { return x * x + 0.09 * t; }), 0.09},
      {"-x^2", query([](double x, double) { return -x * x; }, [](double t, double x, double) { return -x * x - 0.04 * t; }), -0.04},
      {"xy", query([](double x, double y) { return x * y; }, [](double t, double x, double y) { return x * y + 0.03 * t; }), 0.03},
      {"-xy", query([](double x, double y) { return -x * y; }, [](double t, double x, double y) { return -x * y + 0.04 * t; }), 0.04},
  };
  bool ok = true;
  std::ostringstream os;
  for (const auto& c : cases) {
    const double v = gexp::g_expectation(c.q, cfg).value;
    ok &= std::abs(v - c.want) <= 1e-8;
    os << fmt("%s%s=%.12f", &c == &cases.front() ? "" : " ", c.name, v);
  }
  return {ok, os.str()};
}

LatticeLevel random_level(int nodes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LatticeLevel level(nodes);
  for (auto& v : level.values()) v = u(rng);
  return level;
}

Verdict m_matrix_suite() {
  std::mt19937_64 rng(1001);
  int rows = 0, violations = 0, inverses = 0, negative = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto box = oracle::random_dominant_box(rng);
    const int m = 2 * (2 + static_cast<int>(rng() % 6));
    const Grid g = make_grid(0.5 + (rng() % 100) / 40.0, m, 1.0, 1 + static_cast<int>(rng() % 400));
    const auto prev = random_level(g.nodes_per_axis(), rng);
    const auto it = random_level(g.nodes_per_axis(), rng);
    const auto op = linsys::assemble(prev, linsys::build_coefficients(it, g, box), g, it);
    const double scale = 1 / g.dt() + 2 * (box.sigma1_sq_hi + box.sigma2_sq_hi) / (g.h() * g.h());
    for (int r = 0; r < op.unknowns; ++r, ++rows) {
      double sum = op.boundary_weight_sum[r], diag = 0.0;
      bool bad = op.boundary_weight_max[r] > 0.0;
      for (int k = op.row_ptr[r]; k < op.row_ptr[r + 1]; ++k) {
        sum += op.vals[k];
        if (op.cols[k] == r)
          diag = op.vals[k];
        else
          bad |= op.vals[k] > 0.0;
      }
      bad |= !(diag > 0.0);
      bad |= std::abs(sum - 1 / g.dt()) > 1e-12 * scale;
      violations += bad;
    }
    if (op.unknowns <= 16) {
      ++inverses;
      for (const auto& row : oracle::inverse(op.to_dense()))
        for (double v : row) negative += v < 0.0;
    }
  }
  return {violations == 0 && negative == 0 && inverses > 0,
          fmt("1000 boxes, %d rows, %d row violations; %d inverses, %d negative entries", rows, violations,
              inverses, negative)};
}

Verdict monotone_iteration(const Runs& runs) {
  if (!runs.example1_ok || !runs.example2_ok) return {false, "criteria 1 and 2 did not complete"};
  const double limit = -10 * SolverConfig{}.tol_lin;
  int steps = 0, violations = 0;
  double worst = 0.0;
  auto visit = [&](double w) {
    ++steps;
    violations += w < limit;
    worst = std::min(worst, w);
  };
  for (const auto* set : {&runs.example1, &runs.example2})
    for (const auto& run : *set)
      for (const auto& r : run.reports) visit(r.worst_decrease);
  for (double w : runs.reference_decrease) visit(w);
  return {violations == 0, fmt("%d steps, %d violations, worst decrease %.3e", steps, violations, worst)};
}

ProblemSpec random_problem(std::mt19937_64& rng) {
  const auto f = oracle::random_field(rng);
  ProblemSpec p;
  p.box = oracle::random_dominant_box(rng);
  p.initial = [f](double x, double y) { return f(0, x, y); };
  p.boundary = f;
  return p;
}

Grid random_grid(std::mt19937_64& rng) {
  return make_grid(0.5 + (rng() % 8) / 4.0, 2 * (2 + static_cast<int>(rng() % 7)), 0.25 + (rng() % 8) / 8.0,
                   2 + static_cast<int>(rng() % 30));
}

Verdict stability() {
  std::mt19937_64 rng(7007);
  const SolverConfig cfg;
  int violations = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_problem(rng);
    const Grid g = random_grid(rng);
    try {
      const auto s = stepper::march_streaming(p, g, cfg, nullptr);
      const double bound = s.data_bound + stepper::stability_slack(g.steps(), cfg.tol_lin);
      violations += s.solution_max > bound;
      worst_ratio = std::max(worst_ratio, s.solution_max / bound);
    } catch (const Error&) {
      ++violations;
    }
  }
  return {violations == 0, fmt("100 problems, %d violations, max max|U|/bound %.6f", violations, worst_ratio)};
}

Verdict scheme_monotonicity() {
  std::mt19937_64 rng(8008);
  std::uniform_real_distribution<double> eps(1e-6, 0.5);
  int violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto box = oracle::random_dominant_box(rng);
    const int m = 2 * (2 + static_cast<int>(rng() % 4));
    const Grid g = make_grid(1.0, m, 1.0, 1 + static_cast<int>(rng() % 100));
    const auto prev = random_level(g.nodes_per_axis(), rng);
    const auto next = random_level(g.nodes_per_axis(), rng);
    const int i = 1 + static_cast<int>(rng() % (m - 1)), j = 1 + static_cast<int>(rng() % (m - 1));
    const double e = eps(rng);
    const double base = linsys::discrete_residual(next, prev, i, j, g, box);
    // rounding allowance: a few ulps of the largest stencil term
    const double slack = 1e-13 * (1 / g.dt() + 4 * (box.sigma1_sq_hi + box.sigma2_sq_hi) / (g.h() * g.h())) * 2;

    auto center = next;
    center(i, j) += e;
    violations += linsys::discrete_residual(center, prev, i, j, g, box) < base - slack;

    const int which = static_cast<int>(rng() % 8);
    const int di = std::array{-1, -1, -1, 0, 0, 1, 1, 1}[which];
    const int dj = std::array{-1, 0, 1, -1, 1, -1, 0, 1}[which];
    auto nb = next;
    nb(i + di, j + dj) += e;
    violations += linsys::discrete_residual(nb, prev, i, j, g, box) > base + slack;

    auto older = prev;
    older(i, j) += e;
    violations += linsys::discrete_residual(next, older, i, j, g, box) > base + slack;
  }
  return {violations == 0, fmt("10000 triples, %d violations", violations)};
}

Verdict comparison() {
  std::mt19937_64 rng(9009);
  std::uniform_real_distribution<double> shift(1e-3, 0.5);
  const SolverConfig cfg;
  int violations = 0;
  double min_gap = INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const auto lower = random_problem(rng);
    const Grid g = random_grid(rng);
    auto upper = lower;
    const double c = shift(rng);
    switch (trial % 3) {
      case 0: upper.initial = [f = lower.initial, c](double x, double y) { return f(x, y) + c; }; break;
      case 1: upper.boundary = [f = lower.boundary, c](double t, double x, double y) { return f(t, x, y) + c; }; break;
      default: upper.forcing = [c](double, double, double) { return c; }; break;
    }
    const auto r = stepper::verify_comparison(upper, lower, g, cfg);
    violations += !r.ordered;
    min_gap = std::min(min_gap, r.min_difference);
  }
  return {violations == 0, fmt("100 pairs, %d violations, min U-V %.3e", violations, min_gap)};
}

Verdict oracle_equivalence() {
  const Grid g = make_grid(1.0, 10, 1.0, 50);
  const SolverConfig cfg;
  double worst = 0.0;
  auto compare = [&](const ProblemSpec& p, int n, const LatticeLevel& prev) {
    const auto ours = stepper::picard_step(prev, n, p, g, cfg);
    const auto forcing = p.forcing;
    std::function<double(int, int)> f;
    if (forcing) f = [&](int i, int j) { return forcing(g.t(n), g.x(i), g.y(j)); };
    const auto want = oracle::picard_step(oracle::to_dense(prev), oracle::to_dense(sample(g, g.t(n), p.boundary)),
                                          g.h(), g.dt(), p.box, f, 1e-13);
    const auto dense = oracle::from_dense(want.next);
    for (std::size_t k = 0; k < dense.values().size(); ++k)
      worst = std::max(worst, std::abs(dense.values()[k] - ours.next.values()[k]));
  };
  const auto p2 = bench::example2_problem();
  compare(p2, 1, sample(g, p2.initial));
  const auto m1 = bench::example1_problem();
  compare(m1.problem, 1, sample(g, m1.problem.initial));
  compare(m1.problem, 30, sample(g, g.t(29), m1.exact));
  return {worst <= 1e-10, fmt("example 2 step 1, example 1 steps 1 and 30; max difference %.3e", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the G-heat solver"};
  std::filesystem::path cache_dir = "reference-cache";
  std::vector<int> known, only;
  app.add_option("--cache-dir", cache_dir, "Directory for the cached reference solution");
  app.add_option("--known-failure", known, "Criteria whose FAIL does not affect the exit status");
  app.add_option("--only", only, "Run only these criteria (3 and 6 also need 1 and 2)");
  CLI11_PARSE(app, argc, argv);

  Runs runs;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"example 1 convergence table", [&] { return example1_table(runs); }},
      {"example 2 convergence table", [&] { return example2_table(runs, cache_dir); }},
      {"inner iteration counts at 80x80, N=3200", [&] { return iteration_counts(runs); }},
      {"G-expectation identities", gexp_identities},
      {"M-matrix property suite", m_matrix_suite},
      {"monotone inner iteration", [&] { return monotone_iteration(runs); }},
      {"discrete maximum principle", stability},
      {"scheme monotonicity perturbations", scheme_monotonicity},
      {"comparison principle", comparison},
      {"dense oracle equivalence", oracle_equivalence},
  };

  std::set<int> selected(only.begin(), only.end());
  const std::set<int> tolerated(known.begin(), known.end());
  int blocking = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const bool excused = !v.pass && tolerated.count(id);
    std::printf("%s %2d %s: %s%s\n", v.pass ? "PASS" : "FAIL", id, criteria[k].first, v.detail.c_str(),
                excused ? " [known failure]" : "");
    std::fflush(stdout);
    blocking += !v.pass && !excused;
  }
  return blocking == 0 ? 0 : 1;
}
