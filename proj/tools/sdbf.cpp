// sdbf: generalized Savage-Dickey Bayes factors from the command line.

#include <sdbf/app_multinomial.hpp>
#include <sdbf/app_mvt.hpp>
#include <sdbf/cli/csv.hpp>
#include <sdbf/cli/report_json.hpp>
#include <sdbf/cli/validate.hpp>
#include <sdbf/error.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

void emit_report(const sdbf::BayesFactorReport& report, const std::string& out) {
    const std::string text = sdbf::cli::dump_report(report);
    if (out == "-") {
        std::cout << text;
    } else {
        sdbf::cli::write_text_file(out, text);
        std::cout << report.analysis << ": bf_cu = " << report.bf_cu << " (se " << report.bf_std_error << "), report written to "
                  << out << "\n";
    }
}

std::string default_grid_path(const std::string& out) {
    if (out == "-") return "density_grid.csv";
    std::filesystem::path p(out);
    if (p.extension() == ".json") p.replace_extension();
    return p.string() + ".grid.csv";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized Savage-Dickey density ratio Bayes factors"};
    app.require_subcommand(1);

    // mvt
    auto* mvt = app.add_subcommand("mvt", "Constrained multivariate t test (two effects equal and positive)");
    std::string data_path;
    bool use_fixture = false;
    std::uint64_t mvt_seed = 123;
    std::size_t mvt_draws = 100'000;
    std::optional<std::size_t> mvt_burnin;
    bool emit_grid = false;
    std::string grid_out;
    std::string mvt_out;
    std::string cond_mode = "exact";
    std::string mvt_kde = "exact";
    double mvt_odds = 1.0;
    auto* data_opt = mvt->add_option("--data", data_path, "Headerless CSV with two numeric columns");
    mvt->add_flag("--fixture", use_fixture, "Use the bundled 36-row data set with its tuned sampler settings")->excludes(data_opt);
    mvt->add_option("--seed", mvt_seed, "Random seed")->capture_default_str();
    mvt->add_option("--draws", mvt_draws, "Post burn-in draws per chain")->capture_default_str();
    mvt->add_option("--burnin", mvt_burnin, "Burn-in iterations (default max(2000, draws/10))");
    mvt->add_option("--conditional-prior", cond_mode, "exact (Student t, 2 df) or cauchy")
        ->check(CLI::IsMember({"exact", "cauchy"}))
        ->capture_default_str();
    mvt->add_option("--kde", mvt_kde, "exact or grid")->check(CLI::IsMember({"exact", "grid"}))->capture_default_str();
    mvt->add_option("--prior-odds", mvt_odds, "Prior odds of H_c against H_u")->capture_default_str();
    mvt->add_flag("--emit-density-grid", emit_grid, "Also write the density curves as CSV");
    mvt->add_option("--grid-out", grid_out, "Density grid path (default: <out>.grid.csv)");
    mvt->add_option("--out", mvt_out, "Report path, or - for stdout")->required();

    // multinomial
    auto* mult = app.add_subcommand("multinomial", "Mendelian order/equality test on four cell counts");
    std::vector<std::int64_t> counts;
    std::uint64_t mult_seed = 123;
    std::optional<std::size_t> mult_draws;
    bool mult_fast = false;
    std::string mult_kde = "exact";
    std::string mult_out;
    double mult_odds = 1.0;
    mult->add_option("--counts", counts, "Four counts a,b,c,d")->delimiter(',')->expected(4)->required();
    mult->add_option("--seed", mult_seed, "Random seed")->capture_default_str();
    auto* draws_opt = mult->add_option("--draws", mult_draws, "Monte Carlo draws per ingredient (default 1e7)");
    mult->add_flag("--fast", mult_fast, "Use 1e5 draws per ingredient")->excludes(draws_opt);
    mult->add_option("--kde", mult_kde, "exact or grid")->check(CLI::IsMember({"exact", "grid"}))->capture_default_str();
    mult->add_option("--prior-odds", mult_odds, "Prior odds of H_c against H_u")->capture_default_str();
    mult->add_option("--out", mult_out, "Report path, or - for stdout")->required();

    // validate
    auto* val = app.add_subcommand("validate", "Run the oracle and property checks");
    bool val_fast = false;
    std::uint64_t val_seed = sdbf::cli::ValidateOptions{}.seed;
    std::string fault = "none";
    val->add_flag("--fast", val_fast, "Smaller Monte Carlo sizes");
    val->add_option("--seed", val_seed, "Random seed")->capture_default_str();
    val->add_option("--inject-fault", fault, "Test hook: none or kde-bandwidth-zero")
        ->check(CLI::IsMember({"none", "kde-bandwidth-zero"}))
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*mvt) {
            if (data_path.empty() && !use_fixture) {
                std::cerr << "mvt: one of --data or --fixture is required\n";
                return kExitUsage;
            }
            sdbf::MvtTestConfig config = use_fixture ? sdbf::mvt_fixture_config() : sdbf::MvtTestConfig{};
            const sdbf::Matrix rows = use_fixture ? sdbf::mvt_fixture_data() : sdbf::cli::read_csv_file(data_path);
            config.n_draws = mvt_draws;
            config.n_burnin = mvt_burnin;
            config.seed = mvt_seed;
            config.conditional_prior =
                cond_mode == "exact" ? sdbf::ConditionalPriorMode::Exact : sdbf::ConditionalPriorMode::CauchyCompat;
            config.kde_mode = mvt_kde == "exact" ? sdbf::KdeMode::Exact : sdbf::KdeMode::GridCompat;
            config.prior_odds = mvt_odds;
            config.emit_density_grid = emit_grid;
            const sdbf::MvtResult result = sdbf::analyze_mvt(rows, config);
            emit_report(result.report, mvt_out);
            if (result.grid) {
                const std::string path = grid_out.empty() ? default_grid_path(mvt_out) : grid_out;
                sdbf::cli::write_text_file(path, sdbf::cli::density_grid_csv(*result.grid));
                if (mvt_out != "-") std::cout << "density grid written to " << path << "\n";
            }
            return kExitOk;
        }
        if (*mult) {
            sdbf::MultinomialTestConfig config;
            for (std::size_t k = 0; k < 4; ++k) config.counts[k] = counts[k];
            config.seed = mult_seed;
            config.n_mc = mult_fast ? 100'000 : mult_draws.value_or(10'000'000);
            config.kde_mode = mult_kde == "exact" ? sdbf::KdeMode::Exact : sdbf::KdeMode::GridCompat;
            config.prior_odds = mult_odds;
            try {
                config.validate();
            } catch (const sdbf::InvalidParameter& e) {
                std::cerr << "multinomial: " << e.what() << "\n";
                return kExitUsage;
            }
            emit_report(sdbf::run_multinomial_test(config), mult_out);
            return kExitOk;
        }
        if (*val) {
            sdbf::cli::ValidateOptions options;
            options.fast = val_fast;
            options.seed = val_seed;
            options.fault = fault == "kde-bandwidth-zero" ? sdbf::cli::Fault::KdeZeroBandwidth : sdbf::cli::Fault::None;
            const bool ok = sdbf::cli::print_checks(sdbf::cli::run_validation(options), std::cout);
            return ok ? kExitOk : kExitCheckFailed;
        }
    } catch (const sdbf::IngestionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const sdbf::InvalidParameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const sdbf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitUsage;
}
