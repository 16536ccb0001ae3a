#include <sdbf/cli/report_json.hpp>

#include <sdbf/error.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <type_traits>

namespace sdbf::cli {

namespace {

using json = nlohmann::ordered_json;

const char* kde_mode_name(KdeMode m) { return m == KdeMode::Exact ? "exact" : "grid_compat"; }

const char* se_method_name(StdErrorMethod m) {
    switch (m) {
        case StdErrorMethod::Bootstrap: return "bootstrap";
        case StdErrorMethod::PlugIn: return "plug_in";
        case StdErrorMethod::BatchMeans: return "batch_means";
    }
    return "unknown";
}

// Non-finite doubles have no JSON spelling and become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json density_json(const DensityEstimate& d) {
    json j;
    j["value"] = number(d.value);
    j["std_error"] = number(d.std_error);
    j["bandwidth"] = number(d.bandwidth);
    j["n_samples"] = d.n_samples;
    j["mode"] = d.n_samples > 0 ? kde_mode_name(d.mode) : "analytic";
    j["std_error_method"] = d.n_samples > 0 ? se_method_name(d.std_error_method) : "none";
    return j;
}

json estimate_json(const McEstimate& e) {
    json j;
    j["value"] = number(e.value);
    j["std_error"] = number(e.std_error);
    j["n_samples"] = e.n_samples;
    j["n_nonfinite"] = e.n_nonfinite;
    return j;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void dump_value(const json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + json(it.key()).dump() + ": ";
                dump_value(it.value(), out, indent + 2);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                dump_value(v, out, indent + 2);
            }
            out += "\n" + close_pad + "]";
            return;
        }
        case json::value_t::number_float: out += format_double(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

}  // namespace

json report_to_json(const BayesFactorReport& r) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["analysis"] = r.analysis;
    j["seed"] = r.seed;
    j["bf_cu"] = {{"value", number(r.bf_cu)}, {"std_error", number(r.bf_std_error)}};
    j["log_bf_cu"] = number(r.log_bf_cu);
    j["ingredients"] = {
        {"posterior_density_at_re", density_json(r.ingredients.posterior_density_at_re)},
        {"prior_density_at_re", density_json(r.ingredients.prior_density_at_re)},
        {"completed_prior_prob", estimate_json(r.ingredients.completed_prior_prob)},
        {"prior_ratio_expectation", estimate_json(r.ingredients.prior_ratio_expectation)},
    };
    j["posterior_model_probabilities"] = {
        {"prior_odds", number(r.prior_odds)},
        {"prob_c", number(r.posterior_prob_c)},
        {"prob_u", number(r.posterior_prob_u)},
    };
    json settings = json::object();
    for (const auto& [key, value] : r.settings) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, double>) {
                    settings[key] = number(v);
                } else {
                    settings[key] = v;
                }
            },
            value);
    }
    j["settings"] = std::move(settings);
    json diagnostics = json::object();
    for (const auto& [key, value] : r.diagnostics) diagnostics[key] = number(value);
    j["diagnostics"] = std::move(diagnostics);
    j["flags"] = r.flags;
    return j;
}

std::string dump_report(const BayesFactorReport& report) {
    std::string out;
    dump_value(report_to_json(report), out, 0);
    out += "\n";
    return out;
}

std::string density_grid_csv(const MvtDensityGrid& grid) {
    std::string out = "curve,x,density\n";
    const auto emit = [&](const char* name, const std::vector<double>& x, const std::vector<double>& y) {
        for (std::size_t i = 0; i < x.size(); ++i) out += std::string(name) + "," + format_double(x[i]) + "," + format_double(y[i]) + "\n";
    };
    emit("theta_e_posterior", grid.theta_e, grid.theta_e_posterior);
    emit("theta_e_prior", grid.theta_e, grid.theta_e_prior);
    emit("theta_o_conditional_posterior", grid.theta_o, grid.theta_o_conditional_posterior);
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestionError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IngestionError("failed writing '" + path.string() + "'");
}

}  // namespace sdbf::cli
