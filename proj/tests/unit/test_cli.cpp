#include <sdbf/app_multinomial.hpp>
#include <sdbf/cli/csv.hpp>
#include <sdbf/cli/report_json.hpp>
#include <sdbf/cli/validate.hpp>
#include <sdbf/error.hpp>

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

using namespace sdbf;

namespace {

BayesFactorReport sample_report() {
    SdIngredients in{exact_density(2.0), exact_density(0.1), exact_estimate(0.5), exact_estimate(1.0 / 3.0)};
    BayesFactorReport r = make_report("unit", in, 1.0, 42);
    r.settings = {{"flag", true}, {"n", std::int64_t{5}}, {"x", 0.1}, {"name", std::string("a")},
                  {"v", std::vector<double>{1.0, 2.5}}, {"c", std::vector<std::int64_t>{3, 4}}};
    r.diagnostics = {{"d", 1.0 / 3.0}, {"bad", std::numeric_limits<double>::infinity()}};
    r.flags = {"note"};
    return r;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("csv parsing") {
        std::istringstream in("1.5,2\n\n-3e2, 4.25\n5,6\n");
        const Matrix m = cli::read_csv(in);
        REQUIRE(m.rows() == 3);
        REQUIRE(m.cols() == 2);
        CHECK(m(0, 0) == 1.5);
        CHECK(m(1, 0) == -300.0);
        CHECK(m(1, 1) == 4.25);
        CHECK(m(2, 1) == 6.0);
    }

    TEST_CASE("csv errors carry line numbers") {
        const auto line_of = [](const std::string& text) -> std::size_t {
            std::istringstream in(text);
            try {
                cli::read_csv(in);
            } catch (const IngestionError& e) {
                return e.line();
            }
            return 0;
        };
        CHECK(line_of("1,2\n3,x\n") == 2);
        CHECK(line_of("1,2\n3,4\n5\n") == 3);
        CHECK(line_of("1,2,\n") == 1);
        CHECK(line_of("1,2\n3,4\n") == 0);
        std::istringstream empty("");
        CHECK_THROWS_AS(cli::read_csv(empty), IngestionError);
        try {
            cli::read_csv_file("/nonexistent/data.csv");
            FAIL("expected ingestion error");
        } catch (const IngestionError& e) {
            CHECK(std::string(e.what()).find("/nonexistent/data.csv") != std::string::npos);
        }
    }

    TEST_CASE("json layout") {
        const BayesFactorReport r = sample_report();
        const auto j = cli::report_to_json(r);
        std::vector<std::string> keys;
        for (const auto& [k, v] : j.items()) keys.push_back(k);
        const std::vector<std::string> expected = {"schema_version", "analysis", "seed", "bf_cu", "log_bf_cu", "ingredients",
                                                   "posterior_model_probabilities", "settings", "diagnostics", "flags"};
        CHECK(keys == expected);
        CHECK(j["schema_version"] == cli::kReportSchemaVersion);
        CHECK(j["seed"] == 42);
        CHECK(j["bf_cu"]["value"].get<double>() == doctest::Approx(2.0 / 0.1 / 0.5 / 3.0));
        CHECK(j["ingredients"]["prior_density_at_re"]["mode"] == "analytic");
        CHECK(j["settings"]["flag"] == true);
        CHECK(j["settings"]["c"][1] == 4);
        CHECK(j["flags"][0] == "note");
    }

    TEST_CASE("json numbers round trip at 17 digits") {
        const std::string text = cli::dump_report(sample_report());
        CHECK(text.back() == '\n');
        CHECK(text.find("0.33333333333333331") != std::string::npos);
        CHECK(text.find("\"bad\": null") != std::string::npos);
        const auto parsed = nlohmann::json::parse(text);
        CHECK(parsed["diagnostics"]["d"].get<double>() == 1.0 / 3.0);
        CHECK(parsed["settings"]["x"].get<double>() == 0.1);
        CHECK(parsed["diagnostics"]["bad"].is_null());
        CHECK(parsed["settings"]["n"].is_number_integer());
    }

    TEST_CASE("reports are byte-identical for a repeated seed") {
        MultinomialTestConfig c;
        c.n_mc = 20'000;
        c.seed = 99;
        CHECK(cli::dump_report(run_multinomial_test(c)) == cli::dump_report(run_multinomial_test(c)));
        c.seed = 100;
        const std::string other = cli::dump_report(run_multinomial_test(c));
        c.seed = 99;
        CHECK(cli::dump_report(run_multinomial_test(c)) != other);
    }

    TEST_CASE("density grid csv") {
        MvtDensityGrid g;
        g.theta_e = {-1.0, 0.0, 1.0};
        g.theta_e_posterior = {0.1, 0.5, 0.1};
        g.theta_e_prior = {0.2, 0.4, 0.2};
        g.theta_o = {0.0, 0.5};
        g.theta_o_conditional_posterior = {0.3, 0.7};
        const std::string csv = cli::density_grid_csv(g);
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line);
        CHECK(line == "curve,x,density");
        int rows = 0;
        while (std::getline(in, line)) ++rows;
        CHECK(rows == 8);
        CHECK(csv.find("theta_o_conditional_posterior,0.5,0.69999999999999996\n") != std::string::npos);
    }

    TEST_CASE("write errors") {
        CHECK_THROWS_AS(cli::write_text_file("/nonexistent/dir/out.json", "x"), IngestionError);
        const auto p = std::filesystem::temp_directory_path() / "sdbf_unit_write.txt";
        cli::write_text_file(p, "abc");
        CHECK(std::filesystem::file_size(p) == 3);
        std::filesystem::remove(p);
    }

    TEST_CASE("validate with an injected fault fails that check") {
        cli::ValidateOptions o;
        o.fast = true;
        o.fault = cli::Fault::KdeZeroBandwidth;
        const auto checks = cli::run_validation(o);
        REQUIRE(!checks.empty());
        CHECK_FALSE(checks.front().passed);
        std::ostringstream out;
        CHECK_FALSE(cli::print_checks(checks, out));
        CHECK(out.str().find("FAIL") != std::string::npos);
    }
}
