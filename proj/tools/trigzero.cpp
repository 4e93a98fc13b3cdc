#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "trigzero/config.hpp"
#include "trigzero/format.hpp"
#include "trigzero/kacrice.hpp"
#include "trigzero/kernels.hpp"
#include "trigzero/scenario.hpp"
#include "trigzero/szclt.hpp"
#include "trigzero/zeros.hpp"

namespace tz = trigzero;

namespace {

constexpr int exit_invalid = 2;

int cmd_run(const std::string& config_path, const std::string& output_dir) {
    auto cfg = tz::load_config(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    const auto man = tz::run_scenario(cfg);
    for (const auto& t : man.tasks) {
        std::cout << tz::to_string(t.task) << ": " << t.status;
        if (!t.error.empty()) std::cout << " (" << t.error << ")";
        std::cout << " [" << tz::format_double(t.wall_seconds) << " s]\n";
    }
    const auto manifest_path = std::filesystem::path(cfg.output_dir) / "manifest.json";
    std::cout << "manifest: " << manifest_path.string() << '\n';
    const auto table = tz::compare_report(manifest_path, &cfg);
    std::cout << table.render();
    return table.ok() ? 0 : 1;
}

int cmd_report(const std::string& manifest_path, const std::string& config_path) {
    std::optional<tz::ScenarioConfig> cfg;
    if (!config_path.empty()) cfg = tz::load_config(config_path);
    const auto table = tz::compare_report(manifest_path, cfg ? &*cfg : nullptr);
    std::cout << table.render();
    return table.ok() ? 0 : 1;
}

int cmd_kernels(std::size_t n, bool dump, const std::string& measure_text) {
    const auto measure = tz::parse_measure_text(measure_text);
    const auto rho = tz::correlation_of(measure, n);
    const auto kc = tz::KernelCoefficients::make(n);
    std::cout << "n: " << n << "\nalpha_n: " << tz::format_double(kc.alpha)
              << "\nfejer(0): " << tz::format_double(tz::fejer_eval(n, 0.0)) << '\n';
    if (dump) {
        const auto m = tz::default_grid_size(n);
        const auto p = tz::convolution_profile(rho, n, m);
        std::cout << "x,s0,s1,s2\n";
        for (std::size_t i = 0; i < m; ++i) {
            std::cout << tz::format_double(p.x(i)) << ',' << tz::format_double(p.s0[i]) << ','
                      << tz::format_double(p.s1[i]) << ',' << tz::format_double(p.s2[i]) << '\n';
        }
    }
    return 0;
}

int cmd_kacrice(const std::string& measure_text, std::size_t n) {
    const auto measure = tz::parse_measure_text(measure_text);
    const auto rho = tz::correlation_of(measure, n);
    const auto kr = tz::expected_zero_ratio(rho, n);
    const auto pred = tz::predicted_limit(measure);
    std::cout << "measure: " << measure.describe() << "\nn: " << n << "\nratio: " << tz::format_double(kr.ratio)
              << "\nerror_estimate: " << tz::format_double(kr.quadrature_error_estimate)
              << "\nconverged: " << (kr.converged ? "true" : "false") << "\nregime: " << tz::to_string(pred.regime)
              << "\npredicted_limit: " << tz::format_double(pred.limit) << '\n';
    return 0;
}

int cmd_zeros(const std::string& measure_text, std::size_t n, std::size_t reps, std::uint64_t seed) {
    const auto measure = tz::parse_measure_text(measure_text);
    const auto st = tz::zero_statistics(measure, n, reps, seed);
    std::cout << "replicate,seed,count,ratio,suspicious\n";
    for (const auto& r : st.rows) {
        std::cout << r.replicate << ',' << r.seed << ',' << r.count << ',' << tz::format_double(r.ratio) << ','
                  << r.suspicious << '\n';
    }
    std::cout << "mean_ratio: " << tz::format_double(st.mean_ratio) << "\nse: " << tz::format_double(st.se) << '\n';
    return 0;
}

int cmd_szclt(const std::string& measure_text, std::size_t n, std::uint64_t seed) {
    const auto measure = tz::parse_measure_text(measure_text);
    const auto rho = tz::correlation_of(measure, n);
    const auto t = tz::default_t_grid();
    const auto emp = tz::empirical_cf(tz::sample_coefficients(measure, n, seed, 0), t);
    const auto cond = tz::conditional_cf(rho, n, t);
    std::cout << "emp_cond: " << tz::format_double(tz::cf_distance(emp, cond)) << '\n';
    if (measure.density()) {
        const auto lim = tz::limit_cf(*measure.density(), t);
        std::cout << "emp_limit: " << tz::format_double(tz::cf_distance(emp, lim))
                  << "\ncond_limit: " << tz::format_double(tz::cf_distance(cond, lim)) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero counts of random trigonometric polynomials with dependent coefficients"};
    app.require_subcommand(1);

    std::string config_path, output_dir, manifest_path, report_config;
    auto* run = app.add_subcommand("run", "Run a scenario config");
    run->add_option("config", config_path, "Scenario JSON file")->required();
    run->add_option("--output-dir", output_dir, "Override output_dir");

    auto* report = app.add_subcommand("report", "Verdict table for a finished run");
    report->add_option("manifest", manifest_path, "manifest.json")->required();
    report->add_option("--config", report_config, "Scenario config, for completeness checks and overrides");

    std::size_t n = 64;
    bool dump = false;
    std::string measure = "uniform";
    std::size_t reps = 100;
    std::uint64_t seed = 1;

    auto* kernels = app.add_subcommand("kernels", "Kernel coefficients and s0/s1/s2 profile");
    kernels->add_option("--n", n)->required()->check(CLI::PositiveNumber);
    kernels->add_flag("--dump", dump, "Print x,s0,s1,s2 on the default grid");
    kernels->add_option("--measure", measure, "e.g. box:a=pi/2, poisson:r=0.5, atomic:alpha=sqrt(2)");

    auto* kacrice = app.add_subcommand("kacrice", "Kac-Rice expected zero ratio");
    kacrice->add_option("--measure", measure)->required();
    kacrice->add_option("--n", n)->required()->check(CLI::PositiveNumber);

    auto* zeros = app.add_subcommand("zeros", "Monte Carlo zero counts");
    zeros->add_option("--measure", measure)->required();
    zeros->add_option("--n", n)->required()->check(CLI::PositiveNumber);
    zeros->add_option("--reps", reps)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
    zeros->add_option("--seed", seed);

    auto* szclt = app.add_subcommand("szclt", "Characteristic function distances");
    szclt->add_option("--measure", measure)->required();
    szclt->add_option("--n", n)->required()->check(CLI::PositiveNumber);
    szclt->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, output_dir);
        if (*report) return cmd_report(manifest_path, report_config);
        if (*kernels) return cmd_kernels(n, dump, measure);
        if (*kacrice) return cmd_kacrice(measure, n);
        if (*zeros) return cmd_zeros(measure, n, reps, seed);
        if (*szclt) return cmd_szclt(measure, n, seed);
    } catch (const tz::InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
