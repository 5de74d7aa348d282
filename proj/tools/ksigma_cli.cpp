#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "ksigma/error.hpp"
#include "ksigma/io.hpp"

using namespace ksigma;

int main(int argc, char** argv) {
    CLI::App app{"conformal k-Hessian toolkit"};
    app.set_version_flag("--version", io::tool_version());
    app.require_subcommand(1);

    cli::SigmaArgs sigma;
    auto* s = app.add_subcommand("sigma", "elementary symmetric functions and cone membership");
    s->add_option("--lambda", sigma.lambda, "comma-separated eigenvalues");
    s->add_option("--csv", sigma.csv, "CSV file, one eigenvalue tuple per row");
    s->add_option("--k", sigma.k, "order")->required();
    s->add_option("--json", sigma.json_out, "write results as JSON");

    cli::ClassifyArgs classify;
    auto* c = app.add_subcommand("classify", "fundamental/Hoelder classification of a radial profile");
    c->add_option("profile", classify.profile, "CSV with columns r, w (optionally dw, d2w)")->required();
    c->add_option("--n", classify.n)->required();
    c->add_option("--k", classify.k)->required();
    c->add_option("--eps-class", classify.eps_class);
    c->add_option("--c-fd", classify.c_fd, "finite-difference tolerance constant");
    c->add_option("--json", classify.json_out);

    cli::SolveArgs solve;
    auto* so = app.add_subcommand("solve", "radial Newton solve (Dirichlet, subcritical or eigenvalue)");
    so->add_option("--problem", solve.problem)->required();
    so->add_option("--out-dir", solve.out_dir);
    so->add_option("--levels", solve.levels, "number of a-levels in the eigenvalue scheme");

    cli::ContinueArgs cont;
    auto* co = app.add_subcommand("continue", "pseudo-arclength continuation in t");
    co->add_option("--problem", cont.problem)->required();
    co->add_option("--out-dir", cont.out_dir);

    cli::EnvelopeArgs env;
    auto* en = app.add_subcommand("envelope", "radial envelope and its admissibility inequalities");
    en->add_option("--grid", env.grid, "grid field file")->required();
    en->add_option("--center", env.center)->delimiter(',')->expected(3);
    en->add_option("--n", env.n);
    en->add_option("--k", env.k);
    en->add_option("--tau-cells", env.tau_cells, "tolerance in units of the grid spacing");
    en->add_option("--r-start", env.r_start);
    en->add_option("--out-dir", env.out_dir);

    cli::HarnackArgs har;
    auto* ha = app.add_subcommand("harnack", "empirical Harnack constant of a chi-gauge field");
    auto* g_opt = ha->add_option("--grid", har.grid, "grid field file");
    auto* r_opt = ha->add_option("--radial", har.radial, "CSV with columns r, chi");
    g_opt->excludes(r_opt);
    ha->add_option("--n", har.n);
    ha->add_option("--k", har.k);
    ha->add_option("--max-nodes", har.max_nodes);
    ha->add_option("--json", har.json_out);

    cli::VolumeArgs vol;
    auto* vo = app.add_subcommand("volume", "geodesic volume ratio of a radial conformal metric");
    vo->add_option("--metric", vol.metric)->required();
    vo->add_option("--out-dir", vol.out_dir);

    cli::VerifyArgs ver;
    auto* ve = app.add_subcommand("verify", "identity and property suite");
    ve->add_option("--seed", ver.seed);
    ve->add_option("--trials", ver.trials);
    ve->add_option("--json", ver.json_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kBadInput;
    }

    try {
        if (*s) return cli::cmd_sigma(sigma);
        if (*c) return cli::cmd_classify(classify);
        if (*so) return cli::cmd_solve(solve);
        if (*co) return cli::cmd_continue(cont);
        if (*en) return cli::cmd_envelope(env);
        if (*ha) return cli::cmd_harnack(har);
        if (*vo) return cli::cmd_volume(vol);
        if (*ve) return cli::cmd_verify(ver);
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (!e.history().empty()) {
            std::cerr << "residual history:";
            for (double h : e.history()) std::cerr << ' ' << h;
            std::cerr << '\n';
        }
        return cli::kNoConvergence;
    } catch (const AdmissibilityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kNoConvergence;
    } catch (const std::exception& e) {
        // ConfigError, DomainError, UnsupportedRegime, JSON and I/O errors
        std::cerr << "error: " << e.what() << '\n';
        return cli::kBadInput;
    }
    return cli::kBadInput;
}
