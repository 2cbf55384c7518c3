#include "tvcs/experiment.hpp"

#include "tvcs/imaging.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace tvcs::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

class LineError {
 public:
  LineError(int line, std::string key) : line_(line), key_(std::move(key)) {}

  [[noreturn]] void operator()(const std::string& what) const {
    std::ostringstream msg;
    msg << "line " << line_ << ": key '" << key_ << "': " << what;
    throw ValidationError(msg.str());
  }

 private:
  int line_;
  std::string key_;
};

double parse_double(std::string_view text, const LineError& error) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    error("cannot parse '" + std::string(text) + "' as a number");
  }
  return value;
}

template <typename Int>
Int parse_integer(std::string_view text, const LineError& error) {
  Int value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) error("cannot parse '" + std::string(text) + "' as an integer");
  return value;
}

double positive(double v, const LineError& error) {
  if (!(v > 0.0)) error("must be positive");
  return v;
}

}  // namespace

Index measurement_count(double sample_ratio, Index side) {
  return static_cast<Index>(std::llround(sample_ratio * static_cast<double>(side * side)));
}

ExperimentSpec parse_config(std::string_view text) {
  ExperimentSpec spec;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const LineError error(line_no, key);
    if (!seen.insert(key).second) error("duplicate key");
    if (value.empty()) error("missing value");

    if (key == "input") {
      if (value.starts_with("phantom")) {
        const std::string_view rest = value.substr(7);
        if (rest.empty()) {
          spec.phantom_side = 64;
        } else if (rest.front() == ':') {
          spec.phantom_side = parse_integer<Index>(trim(rest.substr(1)), error);
          if (spec.phantom_side < 8) error("phantom side must be at least 8");
        } else {
          spec.image_path = std::string(value);
        }
      } else {
        spec.image_path = std::string(value);
      }
    } else if (key == "sensing") {
      if (value == "gaussian") {
        spec.sensing = SensingKind::Dense;
      } else if (value == "partial-dct") {
        spec.sensing = SensingKind::PartialDct;
      } else {
        error("expected 'gaussian' or 'partial-dct'");
      }
    } else if (key == "dct_layout") {
      if (value == "1d") {
        spec.dct_layout = DctLayout::Flat;
      } else if (value == "2d") {
        spec.dct_layout = DctLayout::Separable2d;
      } else {
        error("expected '1d' or '2d'");
      }
    } else if (key == "sample_ratio") {
      spec.sample_ratio = parse_double(value, error);
      if (!(spec.sample_ratio > 0.0 && spec.sample_ratio <= 1.0)) error("must lie in (0, 1]");
    } else if (key == "sigma") {
      spec.sigma = parse_double(value, error);
      if (spec.sigma < 0.0) error("must be nonnegative");
    } else if (key == "solver") {
      if (value == "ftvcs") {
        spec.solver = SolverChoice::Ftvcs;
      } else if (value == "iadm") {
        spec.solver = SolverChoice::Iadm;
      } else if (value == "both") {
        spec.solver = SolverChoice::Both;
      } else {
        error("expected 'ftvcs', 'iadm' or 'both'");
      }
    } else if (key == "mu") {
      spec.config.mu = positive(parse_double(value, error), error);
    } else if (key == "beta") {
      spec.config.beta = positive(parse_double(value, error), error);
    } else if (key == "beta_schedule") {
      std::vector<double> betas;
      std::string_view rest = value;
      while (true) {
        const auto comma = rest.find(',');
        betas.push_back(positive(parse_double(trim(rest.substr(0, comma)), error), error));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
      for (std::size_t i = 1; i < betas.size(); ++i) {
        if (!(betas[i] > betas[i - 1])) error("schedule must be strictly increasing");
      }
      spec.config.beta_schedule = std::move(betas);
    } else if (key == "tau_rule") {
      const auto space = value.find_first_of(" \t");
      if (space == std::string_view::npos) error("expected 'fraction <f>' or 'explicit <tau>'");
      const std::string_view kind = value.substr(0, space);
      const double number = parse_double(trim(value.substr(space)), error);
      if (kind == "fraction") {
        if (!(number > 0.0 && number < 2.0)) {
          error("fraction must lie in (0, 2): convergence requires tau < 2 / lambda_max(A^T A)");
        }
        spec.config.tau_rule = TauRule::fraction(number);
      } else if (kind == "explicit") {
        spec.config.tau_rule = TauRule::explicit_value(positive(number, error));
      } else {
        error("expected 'fraction <f>' or 'explicit <tau>'");
      }
    } else if (key == "tol") {
      spec.config.tol_rel_change = positive(parse_double(value, error), error);
    } else if (key == "max_iters") {
      spec.config.max_iters = parse_integer<int>(value, error);
      if (spec.config.max_iters < 1) error("must be positive");
    } else if (key == "seed") {
      spec.seed = parse_integer<std::uint64_t>(value, error);
    } else if (key == "output_dir") {
      spec.output_dir = std::string(value);
    } else {
      error("unknown key");
    }
  }

  if (spec.image_path.empty() &&
      measurement_count(spec.sample_ratio, spec.phantom_side) < 1) {
    throw ValidationError("sample_ratio * n^2 must be at least 1");
  }
  try {
    spec.config.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const IterationTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace.records) {
    out << r.iter << ',' << format_number(r.wall_seconds) << ',' << format_number(r.objective_tv) << ','
        << format_optional(r.objective_penalty) << ',' << format_optional(r.constraint_residual) << ','
        << format_number(r.rel_change) << ',' << format_optional(r.rel_error) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ValidationError("output directory " + dir.string() + " cannot be created");
  }
  const auto probe = dir / ".tvcs_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw ValidationError("output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

class ArtifactGuard {
 public:
  void track(std::filesystem::path p) { paths_.push_back(std::move(p)); }
  void commit() { paths_.clear(); }
  ~ArtifactGuard() {
    std::error_code ec;
    for (const auto& p : paths_) std::filesystem::remove(p, ec);
  }

 private:
  std::vector<std::filesystem::path> paths_;
};

}  // namespace

std::vector<SummaryRow> run_experiment(const ExperimentSpec& spec, std::ostream* log) {
  if (!spec.image_path.empty() && !std::filesystem::exists(spec.image_path)) {
    throw ValidationError("input image " + spec.image_path.string() + " does not exist");
  }
  ensure_writable(spec.output_dir);

  const Image truth = spec.image_path.empty() ? shepp_logan(spec.phantom_side) : read_image(spec.image_path);
  const Index side = truth.side();
  const Index n2 = side * side;
  const Index m = measurement_count(spec.sample_ratio, side);
  if (m < 1) throw ValidationError("sample_ratio * n^2 must be at least 1");

  const std::uint64_t matrix_seed = spec.seed + kMatrixSeedOffset;
  const std::uint64_t noise_seed = spec.seed + kNoiseSeedOffset;
  SensingOperator op = spec.sensing == SensingKind::Dense
                           ? make_gaussian_operator(m, n2, matrix_seed)
                           : make_partial_dct_operator(m, n2, matrix_seed, spec.dct_layout);
  Observation obs = synthesize_observation(op, truth, spec.sigma, noise_seed);
  const Problem problem(std::move(op), std::move(obs.values), side);

  SolverConfig config = spec.config;
  config.oracle_truth = truth;
  config.record_trace = true;

  std::vector<std::string> solvers;
  if (spec.solver != SolverChoice::Iadm) solvers.emplace_back("ftvcs");
  if (spec.solver != SolverChoice::Ftvcs) solvers.emplace_back("iadm");

  ArtifactGuard guard;
  std::vector<SummaryRow> rows;
  for (const std::string& name : solvers) {
    if (log) *log << "running " << name << " on " << side << "x" << side << " (m = " << m << ")\n";
    const SolverResult result = name == "ftvcs" ? run_ftvcs(problem, config) : run_iadm(problem, config);

    const auto recon = spec.output_dir / ("recon_" + name + ".pgm");
    const auto trace = spec.output_dir / ("trace_" + name + ".csv");
    guard.track(recon);
    write_image(recon, result.u);
    guard.track(trace);
    write_trace_csv(trace, result.trace);

    SummaryRow row;
    row.solver = name;
    row.mu = config.mu;
    row.re_percent = relative_error(result.u, truth);
    row.objective = objective_tv_l2(result.u, problem, config.mu).objective_tv;
    row.iters = result.trace.iterations;
    row.wall_seconds = result.trace.wall_seconds;
    if (log) {
      *log << "  " << name << ": RE = " << std::fixed << std::setprecision(2) << row.re_percent
           << "%, objective = " << row.objective << ", iters = " << row.iters << ", time = " << std::setprecision(3)
           << row.wall_seconds << " s" << (result.trace.converged ? "" : " (max_iters reached)") << '\n';
      log->unsetf(std::ios::floatfield);
    }
    rows.push_back(row);
  }

  const auto summary = spec.output_dir / "summary.csv";
  guard.track(summary);
  {
    std::ofstream out(summary);
    if (!out) throw std::runtime_error("cannot write " + summary.string());
    out << kSummaryHeader << '\n';
    for (const SummaryRow& r : rows) {
      out << r.solver << ',' << format_number(r.mu) << ',' << format_number(r.re_percent) << ','
          << format_number(r.objective) << ',' << r.iters << ',' << format_number(r.wall_seconds) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + summary.string());
  }
  guard.commit();
  return rows;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::optional<double> parse_cell(const std::string& cell, const std::filesystem::path& path, int line) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ValidationError(path.string() + ":" + std::to_string(line) + ": malformed number '" + cell + "'");
  }
  return v;
}

}  // namespace

std::string print_trace_summary(const std::filesystem::path& trace_csv) {
  std::ifstream in(trace_csv);
  if (!in) throw ValidationError("cannot open trace file " + trace_csv.string());

  std::string line;
  if (!std::getline(in, line) || trim(line) != kTraceHeader) {
    throw ValidationError(trace_csv.string() + ": missing or unexpected CSV header");
  }
  struct Row {
    double iter;
    double objective;
    std::optional<double> rel_error;
  };
  std::vector<Row> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(std::string(trim(line)));
    if (fields.size() != 7) {
      throw ValidationError(trace_csv.string() + ":" + std::to_string(line_no) + ": expected 7 fields, got " +
                            std::to_string(fields.size()));
    }
    std::array<std::optional<double>, 7> cells;
    for (std::size_t i = 0; i < 7; ++i) cells[i] = parse_cell(fields[i], trace_csv, line_no);
    if (!cells[0] || !cells[2]) {
      throw ValidationError(trace_csv.string() + ":" + std::to_string(line_no) + ": iter and objective_tv are required");
    }
    rows.push_back({*cells[0], cells[3] ? *cells[3] : *cells[2], cells[6]});
  }
  if (rows.empty()) throw ValidationError(trace_csv.string() + ": trace has no rows");

  std::set<std::size_t> picks;
  const std::size_t last = rows.size() - 1;
  for (int d = 0; d <= 10; ++d) {
    picks.insert(static_cast<std::size_t>(std::llround(static_cast<double>(last) * d / 10.0)));
  }

  std::ostringstream out;
  out << std::setw(8) << "iter" << std::setw(20) << "objective" << std::setw(14) << "rel_error" << '\n';
  for (std::size_t i : picks) {
    const Row& r = rows[i];
    out << std::setw(8) << static_cast<long long>(r.iter) << std::setw(20) << format_number(r.objective)
        << std::setw(14) << (r.rel_error ? format_number(*r.rel_error) : std::string("-")) << '\n';
  }
  return out.str();
}

}  // namespace tvcs::cli
