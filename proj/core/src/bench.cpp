#include "gheat/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gheat::bench {

UncertaintyBox example_box() {
  return UncertaintyBox::from_volatilities(0.2, 0.3, 0.25, 0.35, -0.04, 0.03);
}

double example1_forcing(const UncertaintyBox& box, double t, double x, double y) {
  const double w = 5.0 * (x + y + t);
  const double s = std::sin(w);
  // All three coefficients multiply sin(w): the minimum sits at the lower
  // corner when sin(w) >= 0 and at the upper corner otherwise.
  const double c = s >= 0.0
                       ? box.sigma1_sq_lo / 2.0 + box.sigma2_sq_lo / 2.0 + box.b12_lo
                       : box.sigma1_sq_hi / 2.0 + box.sigma2_sq_hi / 2.0 + box.b12_hi;
  return 5.0 * std::cos(w) + 25.0 * c * s;
}

ManufacturedProblem example1_problem() {
  ManufacturedProblem m;
  m.problem.box = example_box();
  m.problem.initial = [](double x, double y) { return std::sin(5.0 * (x + y)); };
  m.problem.boundary = [](double t, double x, double y) { return std::sin(5.0 * (x + y + t)); };
  m.problem.forcing = [box = m.problem.box](double t, double x, double y) {
    return example1_forcing(box, t, x, y);
  };
  m.exact = m.problem.boundary;
  return m;
}

ProblemSpec example2_problem() {
  ProblemSpec p = example1_problem().problem;
  p.forcing = nullptr;
  return p;
}

// ---------------------------------------------------------------------------

void ErrorAccumulator::add_level(int n, const LatticeLevel& level,
                                 const SpaceTimeFunction& exact) {
  if (n == 0) return;
  const double t = grid_.t(n);
  double sq = 0.0;
  for (int i = 0; i <= grid_.cells(); ++i) {
    for (int j = 0; j <= grid_.cells(); ++j) {
      const double e = std::abs(level(i, j) - exact(t, grid_.x(i), grid_.y(j)));
      linf_ = std::max(linf_, e);
      sq += e * e;
    }
  }
  const double weight = n == grid_.steps() ? 0.5 : 1.0;
  weighted_sq_ += weight * sq;
  plain_sq_ += sq;
  ++levels_seen_;
}

ErrorNorms ErrorAccumulator::result() const {
  ErrorNorms norms;
  norms.linf = linf_;
  const double h = grid_.h();
  norms.l2 = std::sqrt(grid_.dt() * h * h * weighted_sq_);
  if (levels_seen_ > 0)
    norms.rms = std::sqrt(plain_sq_ / (static_cast<double>(levels_seen_) * grid_.node_count()));
  return norms;
}

ErrorNorms error_norms(const SolutionLattice& numeric, const SpaceTimeFunction& exact) {
  ErrorAccumulator acc(numeric.grid);
  for (std::size_t n = 1; n < numeric.levels.size(); ++n)
    acc.add_level(static_cast<int>(n), numeric.levels[n], exact);
  return acc.result();
}

// ---------------------------------------------------------------------------

std::vector<ConvergenceLevel> table_levels() { return {{10, 50}, {20, 200}, {40, 800}, {80, 3200}}; }

namespace {

LevelRun run_level(const ProblemSpec& problem, const SpaceTimeFunction& exact,
                   const ConvergenceLevel& level, const SolverConfig& cfg, double half_width,
                   double horizon) {
  const Grid grid = make_grid(half_width, level.cells, horizon, level.steps);
  ErrorAccumulator acc(grid);
  LevelRun run;
  run.level = level;
  try {
    auto summary = stepper::march_streaming(
        problem, grid, cfg,
        [&](int n, const LatticeLevel& u, const IterationReport*) { acc.add_level(n, u, exact); });
    run.reports = std::move(summary.reports);
  } catch (const stepper::MarchError& e) {
    throw stepper::MarchError("level M=" + std::to_string(level.cells) +
                                  " N=" + std::to_string(level.steps) + ": " + e.what(),
                              e.step(), e.iteration_cap(), e.partial());
  }
  const auto norms = acc.result();
  run.row.steps = level.steps;
  run.row.nodes = static_cast<int>(grid.node_count());
  run.row.linf_error = norms.linf;
  run.row.l2_error = norms.l2;
  run.row.rms_error = norms.rms;
  return run;
}

std::optional<double> order_of(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::nullopt;
  return std::log2(coarse / fine);
}

}  // namespace

std::vector<LevelRun> convergence_study(const ProblemSpec& problem,
                                        const SpaceTimeFunction& exact,
                                        std::span<const ConvergenceLevel> levels,
                                        const SolverConfig& cfg, double half_width,
                                        double horizon, int jobs) {
  std::vector<ConvergenceLevel> sorted(levels.begin(), levels.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.cells != b.cells ? a.cells < b.cells : a.steps < b.steps;
  });

  std::vector<LevelRun> runs;
  runs.reserve(sorted.size());
  const std::size_t batch = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t start = 0; start < sorted.size(); start += batch) {
    const std::size_t end = std::min(sorted.size(), start + batch);
    if (end - start == 1) {
      runs.push_back(run_level(problem, exact, sorted[start], cfg, half_width, horizon));
      continue;
    }
    std::vector<std::future<LevelRun>> pending;
    for (std::size_t k = start; k < end; ++k) {
      pending.push_back(std::async(std::launch::async, run_level, std::cref(problem),
                                   std::cref(exact), sorted[k], std::cref(cfg), half_width,
                                   horizon));
    }
    for (auto& f : pending) runs.push_back(f.get());
  }

  for (std::size_t k = 1; k < runs.size(); ++k) {
    runs[k].row.linf_order = order_of(runs[k - 1].row.linf_error, runs[k].row.linf_error);
    runs[k].row.l2_order = order_of(runs[k - 1].row.l2_error, runs[k].row.l2_error);
  }
  return runs;
}

// ---------------------------------------------------------------------------

int nested_index(double coordinate, double origin, double spacing) {
  const double q = (coordinate - origin) / spacing;
  const double k = std::round(q);
  if (!(std::abs(q - k) <= 1e-9 * std::max(1.0, std::abs(q))))
    throw std::domain_error("coordinate " + std::to_string(coordinate) +
                            " is not a node of the lattice");
  return static_cast<int>(k);
}

ReferenceSolution::ReferenceSolution(const Grid& fine, const Grid& stored)
    : fine_(fine), stored_(stored), space_stride_(0), time_stride_(0) {
  if (fine.half_width() != stored.half_width() || fine.horizon() != stored.horizon())
    throw std::invalid_argument("reference and storage grids cover different domains");
  if (fine.cells() % stored.cells() != 0 || fine.steps() % stored.steps() != 0)
    throw std::invalid_argument("storage lattice (M=" + std::to_string(stored.cells()) +
                                ", N=" + std::to_string(stored.steps()) +
                                ") does not nest in the reference grid (M=" +
                                std::to_string(fine.cells()) + ", N=" +
                                std::to_string(fine.steps()) + ")");
  space_stride_ = fine.cells() / stored.cells();
  time_stride_ = fine.steps() / stored.steps();
}

ReferenceSolution ReferenceSolution::compute(const ProblemSpec& problem, const Grid& fine,
                                             const Grid& stored, const SolverConfig& cfg) {
  ReferenceSolution ref(fine, stored);
  ref.levels_.reserve(static_cast<std::size_t>(stored.steps()) + 1);
  ref.iterations_.reserve(fine.steps());
  ref.worst_decrease_.reserve(fine.steps());
  stepper::march_streaming(problem, fine, cfg,
                           [&](int n, const LatticeLevel& u, const IterationReport* report) {
                             if (report) {
                               ref.iterations_.push_back(report->iterations);
                               ref.worst_decrease_.push_back(report->worst_decrease);
                             }
                             if (n % ref.time_stride_ != 0) return;
                             LatticeLevel kept(stored.nodes_per_axis());
                             for (int i = 0; i <= stored.cells(); ++i)
                               for (int j = 0; j <= stored.cells(); ++j)
                                 kept(i, j) = u(i * ref.space_stride_, j * ref.space_stride_);
                             ref.levels_.push_back(std::move(kept));
                           });
  return ref;
}

int ReferenceSolution::fine_node(double coordinate) const {
  const int k = nested_index(coordinate, -fine_.half_width(), fine_.h());
  if (k < 0 || k > fine_.cells()) throw std::domain_error("coordinate outside the domain");
  return k;
}

int ReferenceSolution::fine_step(double t) const {
  const int n = nested_index(t, 0.0, fine_.dt());
  if (n < 0 || n > fine_.steps()) throw std::domain_error("time outside the horizon");
  return n;
}

double ReferenceSolution::value(double t, double x, double y) const {
  const int n = nested_index(t, 0.0, stored_.dt());
  const int i = nested_index(x, -stored_.half_width(), stored_.h());
  const int j = nested_index(y, -stored_.half_width(), stored_.h());
  if (n < 0 || n >= static_cast<int>(levels_.size()) || i < 0 || j < 0 || i > stored_.cells() ||
      j > stored_.cells())
    throw std::domain_error("point outside the stored reference lattice");
  return levels_[n](i, j);
}

SpaceTimeFunction ReferenceSolution::evaluator() const {
  return [this](double t, double x, double y) { return value(t, x, y); };
}

void ReferenceSolution::check_nested(const Grid& coarse) const {
  if (coarse.half_width() != stored_.half_width() || coarse.horizon() != stored_.horizon() ||
      stored_.cells() % coarse.cells() != 0 || stored_.steps() % coarse.steps() != 0) {
    throw std::invalid_argument("grid M=" + std::to_string(coarse.cells()) +
                                " N=" + std::to_string(coarse.steps()) +
                                " is not nested in the reference lattice");
  }
}

namespace {

constexpr const char* kMagic = "GHEAT-REFERENCE 1";

template <typename T>
void write_raw(std::ostream& out, const T* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
bool read_raw(std::istream& in, T* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  return static_cast<bool>(in);
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string grid_text(const Grid& g) {
  std::ostringstream os;
  os.precision(17);
  os << g.half_width() << ' ' << g.cells() << ' ' << g.horizon() << ' ' << g.steps();
  return os.str();
}

}  // namespace

void ReferenceSolution::save(const std::filesystem::path& path, std::uint64_t hash) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write reference cache " + tmp);
    out << kMagic << '\n'
        << "hash " << hex(hash) << '\n'
        << "fine " << grid_text(fine_) << '\n'
        << "stored " << grid_text(stored_) << '\n'
        << "levels " << levels_.size() << '\n'
        << "steps " << iterations_.size() << '\n'
        << "data\n";
    for (const auto& level : levels_) write_raw(out, level.values().data(), level.values().size());
    write_raw(out, iterations_.data(), iterations_.size());
    write_raw(out, worst_decrease_.data(), worst_decrease_.size());
    if (!out) throw Error("failed writing reference cache " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::optional<ReferenceSolution> ReferenceSolution::load(const std::filesystem::path& path,
                                                         std::uint64_t expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line) || line != kMagic) return std::nullopt;
  if (!std::getline(in, line) || line != "hash " + hex(expected_hash)) return std::nullopt;

  auto read_grid = [&](const std::string& key) -> std::optional<Grid> {
    if (!std::getline(in, line)) return std::nullopt;
    std::istringstream is(line);
    std::string tag;
    double l = 0, t = 0;
    int m = 0, n = 0;
    if (!(is >> tag >> l >> m >> t >> n) || tag != key) return std::nullopt;
    try {
      return make_grid(l, m, t, n);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  };
  auto read_count = [&](const std::string& key) -> std::optional<std::size_t> {
    if (!std::getline(in, line)) return std::nullopt;
    std::istringstream is(line);
    std::string tag;
    std::size_t v = 0;
    if (!(is >> tag >> v) || tag != key) return std::nullopt;
    return v;
  };

  const auto fine = read_grid("fine");
  if (!fine) return std::nullopt;
  const auto stored = read_grid("stored");
  if (!stored) return std::nullopt;
  const auto levels = read_count("levels");
  const auto steps = read_count("steps");
  if (!levels || !steps || !std::getline(in, line) || line != "data") return std::nullopt;
  if (*levels != static_cast<std::size_t>(stored->steps()) + 1 ||
      *steps != static_cast<std::size_t>(fine->steps()))
    return std::nullopt;

  try {
    ReferenceSolution ref(*fine, *stored);
    ref.levels_.assign(*levels, LatticeLevel(stored->nodes_per_axis()));
    for (auto& level : ref.levels_)
      if (!read_raw(in, level.values().data(), level.values().size())) return std::nullopt;
    ref.iterations_.resize(*steps);
    ref.worst_decrease_.resize(*steps);
    if (!read_raw(in, ref.iterations_.data(), *steps)) return std::nullopt;
    if (!read_raw(in, ref.worst_decrease_.data(), *steps)) return std::nullopt;
    return ref;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

std::uint64_t content_hash(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string reference_description(std::string_view problem_name, const UncertaintyBox& box,
                                  const Grid& fine, const Grid& stored, const SolverConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "problem=" << problem_name << ";box=" << box.sigma1_sq_lo << ',' << box.sigma1_sq_hi << ','
     << box.sigma2_sq_lo << ',' << box.sigma2_sq_hi << ',' << box.b12_lo << ',' << box.b12_hi
     << ";fine=" << grid_text(fine) << ";stored=" << grid_text(stored)
     << ";tol_picard=" << cfg.tol_picard << ";tol_lin=" << cfg.tol_lin << ";k_max=" << cfg.k_max;
  return os.str();
}

ReferenceSolution cached_reference(std::string_view problem_name, const ProblemSpec& problem,
                                   const Grid& fine, const Grid& stored, const SolverConfig& cfg,
                                   const std::filesystem::path& cache_dir) {
  const auto hash = content_hash(reference_description(problem_name, problem.box, fine, stored, cfg));
  const auto path = cache_dir / ("reference-" + std::string(problem_name) + "-" + hex(hash) + ".bin");
  if (auto cached = ReferenceSolution::load(path, hash)) return std::move(*cached);
  auto ref = ReferenceSolution::compute(problem, fine, stored, cfg);
  ref.save(path, hash);
  return ref;
}

// ---------------------------------------------------------------------------

std::vector<SeriesRow> iteration_series(const Grid& grid, std::span<const IterationReport> reports) {
  std::vector<SeriesRow> rows;
  rows.reserve(reports.size());
  for (const auto& r : reports) {
    if (!r.coefficients)
      throw std::invalid_argument("reports carry no coefficient statistics; march with "
                                  "record_coefficients");
    rows.push_back({r.step, grid.t(r.step), r.iterations, *r.coefficients});
  }
  return rows;
}

std::vector<SeriesRow> iteration_series(const SolutionLattice& solution) {
  return iteration_series(solution.grid, solution.reports);
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

namespace {
constexpr const char* kEol = "\r\n";
}

void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRow> rows) {
  out << "timesteps,nodes,linf_error,linf_order,l2_error,l2_order" << kEol;
  for (const auto& r : rows) {
    out << r.steps << ',' << r.nodes << ',' << format_real(r.linf_error) << ','
        << (r.linf_order ? format_real(*r.linf_order) : "") << ',' << format_real(r.l2_error) << ','
        << (r.l2_order ? format_real(*r.l2_order) : "") << kEol;
  }
}

void write_series_csv(std::ostream& out, std::span<const SeriesRow> rows) {
  out << "step,time,iterations,frac_sigma1_hi,frac_sigma2_hi,frac_b12_hi,mean_sigma1_sq,"
         "mean_sigma2_sq,mean_b12,center_sigma1_sq,center_sigma2_sq,center_b12"
      << kEol;
  for (const auto& r : rows) {
    const auto& s = r.stats;
    out << r.step << ',' << format_real(r.time) << ',' << r.iterations << ','
        << format_real(s.frac_sigma1_hi) << ',' << format_real(s.frac_sigma2_hi) << ','
        << format_real(s.frac_b12_hi) << ',' << format_real(s.mean_sigma1_sq) << ','
        << format_real(s.mean_sigma2_sq) << ',' << format_real(s.mean_b12) << ','
        << format_real(s.center_sigma1_sq) << ',' << format_real(s.center_sigma2_sq) << ','
        << format_real(s.center_b12) << kEol;
  }
}

void write_slice_csv(std::ostream& out, const Grid& grid, int n, const LatticeLevel& level) {
  out << "t,x,y,u" << kEol;
  const std::string t = format_real(grid.t(n));
  for (int i = 0; i <= grid.cells(); ++i)
    for (int j = 0; j <= grid.cells(); ++j)
      out << t << ',' << format_real(grid.x(i)) << ',' << format_real(grid.y(j)) << ','
          << format_real(level(i, j)) << kEol;
}

}  // namespace gheat::bench
