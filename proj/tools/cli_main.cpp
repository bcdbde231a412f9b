// Command-line front end: run / verify / convergence / meshgen.
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cgdg/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"continuous-flux Galerkin solver for 2D hyperbolic systems"};
    app.require_subcommand(1);

    std::string config_path;
    bool dry_run = false;
    CLI::App* run = app.add_subcommand("run", "execute a configuration file");
    run->add_option("config", config_path, "path to the configuration file")->required();
    run->add_flag("--dry-run", dry_run, "validate, write the manifest, and stop");

    cgdg::VerifyOptions vopt;
    CLI::App* verify =
        app.add_subcommand("verify", "run the operator identity suite (PASS/FAIL table)");
    verify->add_option("--degrees", vopt.degrees, "element degrees to check (default 0..4)");
    verify->add_option("--nx", vopt.nx, "mesh cells per edge");
    verify->add_option("--ny", vopt.ny, "mesh cells per edge");
    verify->add_option("--perturb", vopt.perturb, "mesh jitter fraction");
    verify->add_option("--seed", vopt.seed, "mesh jitter seed");
    verify->add_flag("--mutate-dual-sign", vopt.mutate_dual_sign,
                     "inject a dual-derivative sign error to demonstrate detection");

    cgdg::ConvergenceOptions copt;
    CLI::App* conv = app.add_subcommand("convergence", "mesh-refinement error study");
    conv->add_option("--preset", copt.preset,
                     "initial data: vortex, acoustic-gaussian, maxwell-gaussian");
    conv->add_option("--degrees", copt.degrees, "element degrees");
    conv->add_option("--meshes", copt.sizes, "mesh sizes (cells per edge)");
    conv->add_option("--t-end", copt.t_end, "final time (0: projection only)");
    conv->add_option("--reconstruction", copt.reconstruction, "l2 or nscheme");
    conv->add_option("--cfl", copt.cfl, "CFL number");
    conv->add_option("--perturb", copt.perturb, "mesh jitter fraction");
    conv->add_option("--seed", copt.seed, "mesh jitter seed");
    conv->add_option("--out", copt.out_prefix, "output CSV prefix");

    cgdg::MeshgenOptions mopt;
    std::vector<double> boxv;
    CLI::App* mg = app.add_subcommand("meshgen", "generate and write a triangulation");
    mg->add_option("--nx", mopt.nx, "cells per edge in x");
    mg->add_option("--ny", mopt.ny, "cells per edge in y");
    mg->add_option("--box", boxv, "domain box: x0 y0 x1 y1")->expected(4);
    mg->add_option("--perturb", mopt.perturb, "interior jitter fraction");
    mg->add_option("--seed", mopt.seed, "jitter seed");
    mg->add_option("--out", mopt.out_path, "output mesh path");

    CLI11_PARSE(app, argc, argv);

    // All computation is deliberately serial for bit-reproducibility; a
    // worker-count request is honored as an upper bound of one.
    if (const char* workers = std::getenv("CGDG_WORKERS"))
        std::cout << "workers: 1 (serial execution; CGDG_WORKERS=" << workers
                  << " treated as an upper bound)\n";

    try {
        if (run->parsed()) return cgdg::cmd_run(config_path, dry_run, std::cout);
        if (verify->parsed()) return cgdg::cmd_verify(vopt, std::cout);
        if (conv->parsed()) return cgdg::cmd_convergence(copt, std::cout);
        if (mg->parsed()) {
            if (boxv.size() == 4) mopt.box = {boxv[0], boxv[1], boxv[2], boxv[3]};
            return cgdg::cmd_meshgen(mopt, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
