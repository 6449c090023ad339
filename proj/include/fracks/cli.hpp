#pragma once

#include "fracks/estimates.hpp"
#include "fracks/spectral.hpp"
#include "fracks/wellposed.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fracks {

enum class Experiment {
    ml_eval,
    mainardi_moments,
    decay_heat,
    decay_ml,
    yamazaki,
    product,
    bilinear,
    linear_op,
    solve,
    selfsim,
    uniqueness,
};
const char* to_string(Experiment e);
/// Throws ConfigError for unknown names.
Experiment parse_experiment(const std::string& name);
std::vector<std::string> experiment_names();

struct RunConfig {
    Experiment experiment = Experiment::solve;
    ModelParams model;

    int dim = 1;
    int n = 256;
    double half_width = 3.141592653589793;

    double t_final = 2.0;
    std::size_t steps = 64;
    double grading = 0.0;  ///< 0: 2/alpha

    double p = 2.0;
    double q = 2.0;
    /// Derived from model, dim, p, q; never read from a file.
    IterationConfig iteration;
    int starts = 3;

    std::string data_kind = "band";  ///< zero | band | homogeneous
    double amplitude = 0.05;
    int data_kmax = 0;               ///< band data: 0 means n/8

    DecaySpec decay;
    DecayFamily decay_family = DecayFamily::E_alpha;
    double decay_t_min = 1e-4;
    double decay_t_max = 1e10;
    int decay_per_decade = 8;

    EnsembleSpec ensemble;
    std::vector<double> T_values{1.0, 2.0, 4.0, 8.0};

    double sigma = 2.0;
    int levels = 3;
    double t_from = 0.25;

    YamazakiParams yamazaki;
    std::vector<double> yamazaki_t_final{1e2, 1e3, 1e4};
    int yamazaki_kmax = 0;  ///< 0: n/4

    std::string oracle_path;
    std::string output_dir = "fracks-out";
    std::uint64_t seed = 1;

    Grid grid() const { return Grid(dim, n, half_width); }
    TimeMesh mesh() const;
    /// Recomputes the derived exponents and runs the hypothesis checks for the
    /// experiment. Throws ConfigError listing every violated inequality.
    void finalize();
};

/// Key-value text (INI sections, ';' or '#' comments) or JSON with the same
/// schema, chosen by the .json extension. Throws ConfigError with the line
/// for syntax errors and the key for bad values.
RunConfig load_config(const std::string& path, Experiment experiment);
RunConfig parse_config_text(const std::string& text, Experiment experiment, bool json = false);

/// Runs one experiment, writing artifacts under output_dir/<experiment> and
/// one summary line per check to `log`. Returns the reports.
std::vector<RatioReport> run(const RunConfig& config, std::ostream& log);

/// Exit status for a set of reports: 1 when any check failed, 0 otherwise.
int exit_status(const std::vector<RatioReport>& reports);

/// The result a check id verifies, or "plumbing".
std::string check_anchor(const std::string& check_id);

/// Rebuilds output_dir/index.md from every <experiment>/checks.json below it.
/// Returns the number of rows.
std::size_t report_index(const std::string& output_dir);

}  // namespace fracks
