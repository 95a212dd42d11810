#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "iondmet/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"DMET-QCC trapped-ion pipeline reproduction"};
    app.require_subcommand(1);

    iondmet::RunConfig cfg;
    std::vector<double> r_sel;
    std::string noise_spec, basis;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--r", r_sel, "bond lengths (default: all five)");
        sub->add_option("--shots", cfg.shots, "shots per basis circuit");
        sub->add_option("--seed", cfg.seed, "master random seed");
        sub->add_option("--noise", noise_spec, "readout flips as p01,p10");
        sub->add_option("--resamples", cfg.resamples, "bootstrap resamples");
        sub->add_flag("--exact", cfg.exact, "exact distributions, no sampling");
        sub->add_option("--out", cfg.out_dir, "output directory for CSV/circuit files");
        sub->add_option("--data", cfg.data_dir, "reference data directory");
        return sub;
    };

    auto* vqe = add_common(app.add_subcommand("vqe", "variational ground-state search"));
    auto* curve = add_common(app.add_subcommand("curve", "full sampled energy curve"));
    auto* entropy = add_common(app.add_subcommand("entropy", "entanglement entropies"));
    auto* compile = add_common(app.add_subcommand("compile", "native-gate compilation"));
    compile->add_option("--basis", basis, "single measurement basis (ZZ, XZ, XX, YY)");
    auto* toy = add_common(app.add_subcommand("dmet-toy", "embedding loop on the lattice fixture"));
    auto* sweep = add_common(app.add_subcommand("purify-sweep", "purification error landscape"));

    CLI11_PARSE(app, argc, argv);

    if (!r_sel.empty()) cfg.r_values = r_sel;
    if (!noise_spec.empty()) {
        std::istringstream is(noise_spec);
        char comma;
        if (!(is >> cfg.noise_p01 >> comma >> cfg.noise_p10) || comma != ',') {
            std::cerr << "--noise expects p01,p10\n";
            return 2;
        }
    }

    try {
        cfg.validate();
        if (vqe->parsed()) return iondmet::cmd_vqe(cfg, std::cout);
        if (curve->parsed()) return iondmet::cmd_curve(cfg, std::cout);
        if (entropy->parsed()) return iondmet::cmd_entropy(cfg, std::cout);
        if (compile->parsed()) return iondmet::cmd_compile(cfg, basis, std::cout);
        if (toy->parsed()) return iondmet::cmd_dmet_toy(cfg, std::cout);
        if (sweep->parsed()) return iondmet::cmd_purify_sweep(cfg, std::cout);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
