#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lindyn/config.hpp"
#include "lindyn/golden.hpp"
#include "lindyn/oracle.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot read config file " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lindyn: shadowing and chain recurrence toolkit for weighted shifts"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::int64_t budget_terms = 0;
    int k_max = 0;
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--out", out_dir, "output directory for reports");
    app.add_option("--seed", seed, "seed override");
    app.add_option("--budget-terms", budget_terms, "series term budget override");
    app.add_option("--k-max", k_max, "seminorm truncation override");

    auto* golden = app.add_subcommand("golden", "run the acceptance battery and emit a CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (golden->parsed()) {
            const auto results = lindyn::run_acceptance();
            std::filesystem::create_directories(out_dir);
            const std::string csv = lindyn::acceptance_csv(results);
            std::ofstream(std::filesystem::path(out_dir) / "golden.csv") << csv;
            bool all = true;
            for (const auto& r : results) {
                std::cout << "criterion " << r.id << " [" << r.name << "]: "
                          << (r.pass ? "PASS" : "FAIL") << " (" << r.seconds << " s)";
                if (!r.pass) std::cout << " " << r.detail;
                std::cout << "\n";
                all = all && r.pass;
            }
            return all ? 0 : 1;
        }
        if (config_path.empty()) {
            std::cerr << "error: --config required (or use the golden subcommand)\n";
            return 2;
        }
        const auto cfg =
            lindyn::parse_experiment(read_file(config_path), seed, k_max, budget_terms);
        return lindyn::run_experiment(cfg, out_dir);
    } catch (const lindyn::ResourceError& e) {
        std::cerr << "resource budget exceeded: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    }
}
