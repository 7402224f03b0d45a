// Command line driver: solve / table / spectrum / validate / dof subcommands
// around the experiment pipeline.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sgfem/experiment.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace sgfem;

void apply_thread_env() {
#ifdef _OPENMP
    if (const char* env = std::getenv("SGFEM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
#endif
}

struct Options {
    ExperimentConfig cfg;
    std::string precond = "laplacian-diag";
    std::string pressure = "pm1";
    std::string out;
    std::string export_dir;
    int table_id = 5;
};

void add_config_options(CLI::App* app, Options& o) {
    app->add_option("--level", o.cfg.level, "mesh refinement level (2..7)");
    app->add_option("--M", o.cfg.M, "number of expansion modes");
    app->add_option("--p", o.cfg.p, "chaos polynomial degree");
    app->add_option("--nu", o.cfg.nu, "Poisson ratio in (0, 0.5)");
    app->add_option("--sigma", o.cfg.sigma, "coefficient amplitude");
    app->add_option("--precond", o.precond,
                    "preconditioner: laplacian-diag | mean-based-full | component-diag");
    app->add_option("--pressure", o.pressure, "pressure family: pm1 | q1");
    app->add_option("--tol", o.cfg.tol, "MINRES relative residual tolerance");
    app->add_option("--maxit", o.cfg.maxit, "MINRES iteration cap");
    app->add_option("--seed", o.cfg.seed, "sampling seed");
    app->add_option("--out", o.out, "CSV output path");
    app->set_config("--config", "", "flat key=value configuration file");
}

void finalize(Options& o) {
    o.cfg.variant = parse_variant(o.precond);
    if (o.pressure == "pm1")
        o.cfg.pressure = PressureFamily::PM1;
    else if (o.pressure == "q1")
        o.cfg.pressure = PressureFamily::Q1;
    else
        throw CLI::ValidationError("--pressure", "expected pm1 or q1");
    o.cfg.validate();
}

void write_csv(const std::string& path, const ResultRecord& r) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << csv_header() << '\n' << csv_row(r) << '\n';
}

void export_blocks(const Options& o) {
    namespace fs = std::filesystem;
    fs::create_directories(o.export_dir);
    RandomFieldExpansion field =
        o.cfg.M > 0 ? kl_2d_modes(o.cfg.M, o.cfg.sigma) : constant_field(1.0);
    FeSpaces spaces = build_spaces(build_mesh(o.cfg.level), o.cfg.pressure,
                                   BoundaryPartition{DirichletLayout::LeftBottomTop});
    FeBlocks blocks = assemble_fe_blocks(spaces, field, unit_body_force());
    StochasticCouplings cpl = build_couplings(build_multi_index_set(o.cfg.M, o.cfg.p));
    auto dump = [&](const std::string& name, const SpMat& m) {
        std::ofstream f(fs::path(o.export_dir) / (name + ".txt"));
        export_triplets(f, m);
    };
    for (int k = 0; k <= blocks.M; ++k) {
        const std::string s = std::to_string(k);
        dump("a11_" + s, blocks.strain[k].sparse(1, 1));
        dump("a12_" + s, blocks.strain[k].sparse(1, 2));
        dump("a22_" + s, blocks.strain[k].sparse(2, 2));
        dump("d_" + s, blocks.D[k].to_sparse());
    }
    dump("b1", blocks.B1.to_sparse());
    dump("b2", blocks.B2.to_sparse());
    dump("c", blocks.C.to_sparse());
    for (int k = 0; k < static_cast<int>(cpl.G.size()); ++k) {
        const CouplingMatrix& g = cpl.G[k];
        std::vector<Triplet> t;
        for (size_t q = 0; q < g.val.size(); ++q) t.emplace_back(g.row[q], g.col[q], g.val[q]);
        SpMat gs(g.n, g.n);
        gs.setFromTriplets(t.begin(), t.end());
        dump("g_" + std::to_string(k), gs);
    }
}

void print_record(const ResultRecord& r) {
    std::cout << "level=" << r.config.level << " M=" << r.config.M << " p=" << r.config.p
              << " nu=" << r.config.nu << " sigma=" << r.config.sigma << " precond="
              << variant_name(r.config.variant) << "\n"
              << "n_u=" << r.n_u << " n_p=" << r.n_p << " n_y=" << r.n_y << " dim=" << r.dim
              << "\n";
    if (!r.error.empty()) {
        std::cout << "error: " << r.error << "\n";
        return;
    }
    std::cout << "iterations=" << r.iterations << " converged=" << (r.converged ? "yes" : "no")
              << " time_s=" << r.time_s << "\n";
    if (r.ritz.has_neg && r.ritz.has_pos)
        std::cout << "ritz intervals: [" << r.ritz.neg_lo << ", " << r.ritz.neg_hi << "] u ["
                  << r.ritz.pos_lo << ", " << r.ritz.pos_hi << "]\n";
}

int cmd_solve(Options& o) {
    finalize(o);
    ResultRecord r = run_experiment(o.cfg);
    print_record(r);
    if (!o.out.empty()) write_csv(o.out, r);
    if (!o.export_dir.empty()) export_blocks(o);
    return (r.error.empty() && r.converged) ? 0 : 1;
}

int cmd_spectrum(Options& o) {
    finalize(o);
    ResultRecord r = run_experiment(o.cfg);
    print_record(r);
    if (!r.error.empty()) return 1;
    RandomFieldExpansion field =
        o.cfg.M > 0 ? kl_2d_modes(o.cfg.M, o.cfg.sigma) : constant_field(1.0);
    FeSpaces spaces = build_spaces(build_mesh(o.cfg.level), o.cfg.pressure,
                                   BoundaryPartition{DirichletLayout::LeftBottomTop});
    FeBlocks blocks = assemble_fe_blocks(spaces, field, unit_body_force());
    StochasticCouplings cpl = build_couplings(build_multi_index_set(o.cfg.M, o.cfg.p));
    BoundReport rep = compute_bound_report(blocks, field, cpl, o.cfg.nu, o.cfg.variant, 1.0);
    std::cout << "coefficient range: [" << rep.field_min << ", " << rep.field_max << "]\n"
              << "Korn constant: " << rep.korn_constant
              << "  inf-sup constant: " << rep.inf_sup_gamma << "\n"
              << "block window: [" << rep.laplacian_diag_window.lo << ", "
              << rep.laplacian_diag_window.hi << "]  Schur window: [" << rep.schur_window.lo
              << ", " << rep.schur_window.hi << "]\n"
              << "analytic inclusion: [" << rep.union_neg.lo << ", " << rep.union_neg.hi
              << "] u [" << rep.union_pos.lo << ", " << rep.union_pos.hi << "]\n";
    if (!o.out.empty()) write_csv(o.out, r);
    return r.converged ? 0 : 1;
}

int cmd_table(Options& o, const std::string& precond) {
    (void)precond;
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!o.out.empty()) {
        file.open(o.out);
        if (!file) throw std::runtime_error("cannot open output file: " + o.out);
        os = &file;
    }
    std::vector<ResultRecord> rows = run_table(o.table_id, os);
    int bad = 0;
    for (const ResultRecord& r : rows) {
        if (!r.error.empty()) {
            std::cerr << "cell failed: level=" << r.config.level << " M=" << r.config.M
                      << " nu=" << r.config.nu << ": " << r.error << "\n";
            ++bad;
        } else if (!r.converged) {
            std::cerr << "cell did not converge: level=" << r.config.level
                      << " M=" << r.config.M << " nu=" << r.config.nu << "\n";
            ++bad;
        }
    }
    return bad == 0 ? 0 : 2;
}

int cmd_validate(Options& o) {
    finalize(o);
    RandomFieldExpansion field =
        o.cfg.M > 0 ? kl_2d_modes(o.cfg.M, o.cfg.sigma) : constant_field(1.0);
    FeSpaces spaces = build_spaces(build_mesh(o.cfg.level), o.cfg.pressure,
                                   BoundaryPartition{DirichletLayout::LeftBottomTop});
    FeBlocks blocks = assemble_fe_blocks(spaces, field, unit_body_force());
    StochasticCouplings cpl = build_couplings(build_multi_index_set(o.cfg.M, o.cfg.p));
    KronSaddleOperator op = build_operator(blocks, cpl, o.cfg.nu);
    if (op.dim() > 5000) {
        std::cerr << "validate requires total dimension <= 5000 (got " << op.dim() << ")\n";
        return 1;
    }
    int failures = 0;
    auto check = [&failures](const std::string& name, bool ok, double measured) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << measured << ")\n";
        if (!ok) ++failures;
    };

    Eigen::MatrixXd kd = dense_assemble_full(op);
    Eigen::MatrixXd oracle = dense_kronecker_oracle(blocks, cpl, o.cfg.nu);
    const double scale = oracle.cwiseAbs().maxCoeff();
    check("operator matches independent dense assembly",
          (kd - oracle).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          (kd - oracle).cwiseAbs().maxCoeff() / scale);
    check("operator symmetry", (kd - kd.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          (kd - kd.transpose()).cwiseAbs().maxCoeff() / scale);

    BlockPreconditioner pre = build_preconditioner(blocks, cpl, o.cfg.nu, o.cfg.variant, 1.0);
    Vec rhs = assemble_rhs(blocks, cpl);
    MinresResult res = minres_solve(op, pre, rhs, 1e-12, 4 * o.cfg.maxit);
    Vec direct = kd.partialPivLu().solve(rhs);
    check("MINRES agrees with direct dense solve",
          (res.solution - direct).norm() <= 1e-8 * direct.norm(),
          (res.solution - direct).norm() / direct.norm());

    BoundReport rep =
        compute_bound_report(blocks, field, cpl, o.cfg.nu, o.cfg.variant, 1.0, true);
    check("preconditioned spectrum inside the inclusion union", rep.containment,
          rep.saddle_eigs.empty() ? 0.0 : rep.saddle_eigs.front());
    return failures == 0 ? 0 : 1;
}

int cmd_dof(Options& o) {
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!o.out.empty()) {
        file.open(o.out);
        if (!file) throw std::runtime_error("cannot open output file: " + o.out);
        os = &file;
    }
    run_table(1, os);
    run_table(2, os);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_env();
    CLI::App app{"stochastic Galerkin solver for nearly incompressible elasticity"};
    app.require_subcommand(1);

    Options solve_o, table_o, spectrum_o, validate_o, dof_o;
    CLI::App* solve = app.add_subcommand("solve", "run one configuration");
    add_config_options(solve, solve_o);
    solve->add_option("--export-blocks", solve_o.export_dir,
                      "directory for sparse triplet dumps of the assembled blocks");

    CLI::App* table = app.add_subcommand("table", "run a named experiment grid");
    add_config_options(table, table_o);
    table->add_option("--table", table_o.table_id, "grid id 1..7")->required();

    CLI::App* spectrum = app.add_subcommand("spectrum", "solve and report eigenvalue windows");
    add_config_options(spectrum, spectrum_o);

    CLI::App* validate = app.add_subcommand("validate", "dense cross-checks on a small instance");
    add_config_options(validate, validate_o);

    CLI::App* dof = app.add_subcommand("dof", "print dof and chaos dimension grids");
    add_config_options(dof, dof_o);

    CLI11_PARSE(app, argc, argv);
    try {
        if (solve->parsed()) return cmd_solve(solve_o);
        if (table->parsed()) return cmd_table(table_o, table_o.precond);
        if (spectrum->parsed()) return cmd_spectrum(spectrum_o);
        if (validate->parsed()) return cmd_validate(validate_o);
        if (dof->parsed()) return cmd_dof(dof_o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
