#pragma once

#include "tvcs/image.hpp"
#include "tvcs/sensing.hpp"
#include "tvcs/solvers.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tvcs::cli {

/// Bad configuration or unusable paths, reported before any computation.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SolverChoice { Ftvcs, Iadm, Both };

struct ExperimentSpec {
  Index phantom_side = 64;              // used when image_path is empty
  std::filesystem::path image_path;
  SensingKind sensing = SensingKind::Dense;  // "gaussian" in config files
  DctLayout dct_layout = DctLayout::Flat;
  double sample_ratio = 0.3;
  double sigma = 0.001;
  SolverChoice solver = SolverChoice::Both;
  SolverConfig config;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "tvcs_out";
};

/// Sensing and noise draw from independent streams derived from one seed.
inline constexpr std::uint64_t kMatrixSeedOffset = 0;
inline constexpr std::uint64_t kNoiseSeedOffset = 0x9E3779B97F4A7C15ULL;

/// Parses flat `key = value` lines; `#` starts a comment. Unknown keys,
/// duplicate keys and bad values raise ValidationError naming key and line.
ExperimentSpec parse_config(std::string_view text);
ExperimentSpec load_config(const std::filesystem::path& path);

/// round(sample_ratio * n^2)
Index measurement_count(double sample_ratio, Index side);

struct SummaryRow {
  std::string solver;
  double mu = 0.0;
  double re_percent = 0.0;
  double objective = 0.0;
  int iters = 0;
  double wall_seconds = 0.0;
};

inline constexpr std::string_view kTraceHeader =
    "iter,wall_seconds,objective_tv,objective_penalty,constraint_residual,rel_change,rel_error";
inline constexpr std::string_view kSummaryHeader = "solver,mu,RE_percent,objective,iters,wall_seconds";

void write_trace_csv(const std::filesystem::path& path, const IterationTrace& trace);

/// Builds the problem, runs the requested solver(s) and writes
/// recon_<solver>.pgm, trace_<solver>.csv and summary.csv to output_dir.
/// Artifacts written so far are removed if anything fails.
std::vector<SummaryRow> run_experiment(const ExperimentSpec& spec, std::ostream* log = nullptr);

/// First, decile and last rows of a trace CSV: iteration, objective
/// (the penalty objective when present, else TV/L2) and relative error.
std::string print_trace_summary(const std::filesystem::path& trace_csv);

}  // namespace tvcs::cli
