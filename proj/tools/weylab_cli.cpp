// weylab command-line driver.

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "weylab/experiments.hpp"

namespace {

int fail(const std::string& msg, int code) {
    std::cerr << "error: " << msg << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace weylab;
    CLI::App app{"weylab: numerical harness for Weyl multipliers on phase space and the Heisenberg group"};
    app.require_subcommand(1);

    std::string run_path, out_dir;
    int workers = 0;
    auto* run = app.add_subcommand("run", "run the experiment described by a JSON config");
    run->add_option("config", run_path, "config file")->required();
    run->add_option("--out", out_dir, "output directory (overrides output_dir)");
    run->add_option("--workers", workers, "worker threads (default from config, 1 = deterministic)");

    auto* list = app.add_subcommand("list-experiments", "list experiment names");

    std::string val_path;
    auto* validate = app.add_subcommand("validate", "check a config against every precondition without running it");
    validate->add_option("config", val_path, "config file")->required();

    std::string op_name, op_out = "operator.bin";
    int op_n = 1, op_N = 64, op_index = 0;
    auto* exp = app.add_subcommand("export-matrix", "write a named operator (A, A*, H, P, chi, S, riesz) in WEYLOPM1 format");
    exp->add_option("name", op_name, "operator name")->required();
    exp->add_option("--n", op_n, "dimension n");
    exp->add_option("--N", op_N, "truncation N");
    exp->add_option("--index", op_index, "j for P_j and S_j, k for chi_k");
    exp->add_option("--out", op_out, "output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ErrorFamily::config);
    }

    try {
        if (*list) {
            for (const auto& e : experiment_registry()) std::cout << e.name << "  " << e.description << "\n";
            return 0;
        }
        if (*validate) {
            const auto cfg = load_config(val_path);
            for (const auto& d : validate_config(cfg)) std::cout << d.level << ": " << d.message << "\n";
            std::cout << "config hash " << cfg.hash_hex() << "\n";
            return 0;
        }
        if (*exp) {
            const double L = std::max(8.0, std::sqrt(4.0 * op_N + 2.0) + 6.0);
            const auto ctx = HermiteContext::build(op_n, op_N, L, static_cast<int>(std::ceil(2.0 * L / 0.125 / 2.0)) * 2);
            save_operator(named_operator(op_name, ctx, op_index), op_out);
            std::cout << op_out << "\n";
            return 0;
        }
        auto cfg = load_config(run_path);
        if (workers > 0) cfg.workers = workers;
        std::filesystem::path dir;
        const int rc = run_config(cfg, out_dir, &dir);
        std::cout << dir.string() << "\n";
        if (rc != 0) std::cerr << "one or more checks failed; see " << (dir / "summary.txt").string() << "\n";
        return rc;
    } catch (const Error& e) {
        return fail(e.what(), e.exit_code());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(e.what(), static_cast<int>(ErrorFamily::io));
    } catch (const std::exception& e) {
        return fail(e.what(), 1);
    }
}
