#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "secagg/config.hpp"
#include "secagg/flsim/train.hpp"
#include "secagg/report.hpp"

namespace {

int cmd_run(const std::string& config_path, std::uint64_t seed_override, bool has_seed,
            const std::string& out_override) {
    secagg::ExperimentConfig cfg = secagg::load_config(config_path);
    if (has_seed) cfg.seed = seed_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    secagg::flsim::TrainingResult res = secagg::flsim::run_training(cfg);
    std::cout << "final_accuracy=" << res.final_accuracy;
    if (cfg.attack.kind == "scaling") std::cout << " final_asr=" << res.final_asr;
    std::cout << " aborted_rounds=" << res.aborted_rounds << "/" << cfg.iterations << "\n";
    if (res.aborted_rounds >= (cfg.iterations + 1) / 2) {
        std::cerr << "error: round-abort cascade (" << res.aborted_rounds << " of "
                  << cfg.iterations << " rounds aborted)\n";
        return 3;
    }
    return 0;
}

int cmd_comm_report(const std::string& config_path, const std::vector<int>& sweep, int d,
                    const std::string& out_override) {
    secagg::ExperimentConfig cfg = secagg::load_config(config_path);
    secagg::CommReport rep = secagg::comm_report(cfg, sweep, d);
    std::cout << "n,client_bytes,federator_bytes\n";
    for (std::size_t i = 0; i < rep.sweep_n.size(); ++i)
        std::cout << rep.sweep_n[i] << "," << rep.client_bytes[i] << "," << rep.federator_bytes[i]
                  << "\n";
    std::cout << "client_slope=" << rep.client_slope << " federator_slope=" << rep.federator_slope
              << "\n";
    if (!out_override.empty()) {
        std::filesystem::create_directories(out_override);
        secagg::write_comm_report_csv(rep, out_override + "/comm_report.csv");
    }
    return 0;
}

int cmd_compare(const std::string& config_dir, int repeats, const std::string& out_override) {
    namespace fs = std::filesystem;
    std::vector<std::pair<std::string, secagg::ExperimentConfig>> scenarios;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(config_dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) scenarios.emplace_back(p.stem().string(), secagg::load_config(p.string()));
    if (scenarios.empty()) {
        std::cerr << "error: no .json configs under " << config_dir << "\n";
        return 2;
    }
    const std::vector<std::string> aggs{"fedavg", "fltrust_relu", "fltrust_poly_real",
                                        "lobyitfl_secure"};
    auto cells = secagg::compare_runs(scenarios, aggs, repeats);
    std::cout << secagg::format_compare_table(cells);
    if (!out_override.empty()) {
        fs::create_directories(out_override);
        secagg::write_compare_csv(cells, out_override + "/compare.csv");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"secure Byzantine-resilient aggregation simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;

    auto* run = app.add_subcommand("run", "run one experiment from a config file");
    run->add_option("config", config_path, "config JSON")->required();
    run->add_option("--seed", seed, "override config seed")->each([&](const std::string&) {
        has_seed = true;
    });
    run->add_option("--out", out_dir, "output directory (metrics.csv, summary.json, transcripts)");

    std::vector<int> sweep{8, 16, 32, 64};
    int comm_d = 64;
    auto* comm = app.add_subcommand("comm-report", "communication scaling over a sweep of n");
    comm->add_option("config", config_path, "config JSON")->required();
    comm->add_option("--sweep-n", sweep, "client counts to sweep")->delimiter(',');
    comm->add_option("--dim", comm_d, "update dimension for the sweep");
    comm->add_option("--out", out_dir, "output directory for comm_report.csv");

    std::string config_dir;
    int repeats = 3;
    auto* cmp = app.add_subcommand("compare", "accuracy/ASR table over configs x aggregators");
    cmp->add_option("config-dir", config_dir, "directory of scenario configs")->required();
    cmp->add_option("--repeats", repeats, "seeds per cell");
    cmp->add_option("--out", out_dir, "output directory for compare.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e); // prints usage; exit code 2 family for bad usage
    }

    try {
        if (run->parsed()) return cmd_run(config_path, seed, has_seed, out_dir);
        if (comm->parsed()) return cmd_comm_report(config_path, sweep, comm_d, out_dir);
        if (cmp->parsed()) return cmd_compare(config_dir, repeats, out_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
