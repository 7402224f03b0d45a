#pragma once
// Configuration-driven experiment runner: the full pipeline for one
// configuration (field, basis, blocks, operator, preconditioner, solve,
// spectrum), the named table grids, and CSV output.

#include <iosfwd>
#include <string>
#include <vector>

#include "sgfem/validation.hpp"

namespace sgfem {

struct ExperimentConfig {
    int level = 4;
    int M = 5;
    int p = 3;
    double nu = 0.4;
    double sigma = 0.085;
    PressureFamily pressure = PressureFamily::PM1;
    PrecondVariant variant = PrecondVariant::LaplacianDiag;
    double tol = 1e-6;
    int maxit = 1000;
    std::uint64_t seed = 1;

    void validate() const;  // throws on out-of-range settings
};

struct ResultRecord {
    ExperimentConfig config;
    int n_u = 0, n_p = 0, n_y = 0;
    long dim = 0;
    int iterations = 0;
    double time_s = 0.0;
    SpectrumIntervals ritz;
    bool converged = false;
    std::string error;  // nonempty when the cell failed
};

// the experiment body force, constant (1, 1)
BodyForce unit_body_force();

// Runs the pipeline for one configuration.  Results are memoized on the
// configuration key so repeated requests (shared table cells) solve once.
ResultRecord run_experiment(const ExperimentConfig& config);
void clear_experiment_cache();

std::string csv_header();
std::string csv_row(const ResultRecord& r);

// Grids 1..7: 1 spatial dof counts, 2 chaos dimensions, 3-4 spectral
// inclusion intervals (two nu values), 5-7 iteration counts over the full nu
// sweep.  Rows are emitted in grid order; failures are recorded per cell and
// the run continues.
std::vector<ResultRecord> run_table(int table_id, std::ostream* csv_out);

}  // namespace sgfem
