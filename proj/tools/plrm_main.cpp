// Command-line front end: fit, test, select-lambda, influence, simulate.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "plrm/dist.hpp"
#include "plrm/io.hpp"
#include "plrm/robustness.hpp"
#include "plrm/simulation.hpp"
#include "plrm/tuning.hpp"

namespace {

using nlohmann::ordered_json;

constexpr const char* version_string = "0.1.0";

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> out;
    const auto c1 = spec.find(':');
    if (c1 == std::string::npos) {
        out.push_back(std::stod(spec));
        return out;
    }
    const auto c2 = spec.find(':', c1 + 1);
    if (c2 == std::string::npos)
        throw plrm::data_error("grid spec must be 'value' or 'start:step:stop'");
    const double start = std::stod(spec.substr(0, c1));
    const double step = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    const double stop = std::stod(spec.substr(c2 + 1));
    if (step <= 0.0) throw plrm::data_error("grid step must be positive");
    for (int i = 0;; ++i) {
        double v = start + i * step;
        if (v > stop + 1e-12) break;
        if (v > stop) v = stop;
        out.push_back(std::round(v * 1e12) / 1e12);
    }
    return out;
}

std::vector<double> parse_list(const std::string& spec) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        auto comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        out.push_back(std::stod(spec.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-")
        std::cout << text;
    else
        plrm::write_text_file(out_path, text);
}

ordered_json provenance(const std::string& data_path, const std::string& schema_path,
                        std::uint64_t seed = 0) {
    ordered_json p;
    p["version"] = version_string;
    if (!data_path.empty()) {
        p["data"] = data_path;
        p["data_hash"] = plrm::file_hash(data_path);
    }
    if (!schema_path.empty()) {
        p["schema"] = schema_path;
        p["schema_hash"] = plrm::file_hash(schema_path);
    }
    p["seed"] = seed;
    return p;
}

ordered_json coefficient_table(const plrm::Dataset& data, const plrm::FitResult& fit) {
    ordered_json coeffs = ordered_json::array();
    for (int i = 0; i < data.dims.nu(); ++i) {
        ordered_json c;
        c["name"] = plrm::coefficient_name(data, i);
        c["estimate"] = fit.beta_hat[i];
        if (fit.sandwich_ok) {
            const double se = fit.se[i];
            const double z = se > 0.0 ? fit.beta_hat[i] / se : 0.0;
            c["se"] = se;
            c["z"] = z;
            c["p_value"] = 1.0 - plrm::chisq_cdf(z * z, 1);
        } else {
            c["se"] = nullptr;
            c["z"] = nullptr;
            c["p_value"] = nullptr;
        }
        coeffs.push_back(std::move(c));
    }
    return coeffs;
}

int resolve_coefficient(const plrm::Dataset& data, const std::string& name) {
    for (int i = 0; i < data.dims.nu(); ++i)
        if (plrm::coefficient_name(data, i) == name) return i;
    try {
        const int idx = std::stoi(name);
        if (idx >= 0 && idx < data.dims.nu()) return idx;
    } catch (const std::exception&) {
    }
    throw plrm::data_error("unknown coefficient '" + name + "'");
}

struct CommonArgs {
    std::string data_path;
    std::string schema_path;
    std::string lambda_spec = "0";
    std::string out_path;
    std::string format = "json";
    bool group = false;
    bool no_grouped_scaling = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_lambda = true) {
    cmd->add_option("--data", args.data_path, "input CSV")->required();
    cmd->add_option("--schema", args.schema_path, "schema JSON")->required();
    if (with_lambda)
        cmd->add_option("--lambda", args.lambda_spec,
                        "tuning parameter: value or start:step:stop");
    cmd->add_option("--out", args.out_path, "output path ('-' = stdout)");
    cmd->add_option("--format", args.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_flag("--group", args.group, "collapse identical covariate patterns");
    cmd->add_flag("--no-grouped-scaling", args.no_grouped_scaling,
                  "use the exploded-equivalent objective for grouped rows");
}

int run_fit(const CommonArgs& args) {
    const auto schema = plrm::SchemaSpec::from_file(args.schema_path);
    const auto data = plrm::load_dataset(args.data_path, schema, args.group);
    const auto lambdas = parse_grid(args.lambda_spec);

    ordered_json report;
    report["tool"] = "plrm fit";
    report["provenance"] = provenance(args.data_path, args.schema_path);
    report["fits"] = ordered_json::array();
    std::string csv = "lambda,name,estimate,se,z,p_value\n";
    bool all_converged = true;
    for (double lam : lambdas) {
        plrm::FitOptions opts;
        opts.grouped_scaling = !args.no_grouped_scaling;
        const auto fit = plrm::fit_mdpde(data, lam, opts);
        all_converged = all_converged && fit.converged;
        ordered_json f;
        f["lambda"] = lam;
        f["converged"] = fit.converged;
        f["iterations"] = fit.iterations;
        f["objective"] = fit.objective;
        f["divergence"] = fit.divergence;
        f["psi_rcond"] = fit.psi_rcond;
        f["coefficients"] = coefficient_table(data, fit);
        report["fits"].push_back(std::move(f));
        for (int i = 0; i < data.dims.nu(); ++i) {
            csv += format_double(lam) + "," + plrm::coefficient_name(data, i) + "," +
                   format_double(fit.beta_hat[i]) + ",";
            if (fit.sandwich_ok) {
                const double se = fit.se[i];
                const double z = se > 0.0 ? fit.beta_hat[i] / se : 0.0;
                csv += format_double(se) + "," + format_double(z) + "," +
                       format_double(1.0 - plrm::chisq_cdf(z * z, 1));
            } else {
                csv += ",,";
            }
            csv += "\n";
        }
    }
    emit(args.format == "json" ? plrm::Report{report}.serialize() : csv,
         args.out_path);
    return all_converged ? 0 : 3;
}

int run_test(const CommonArgs& args, const std::string& coef_spec,
             const std::string& contrast_path, const std::string& h_spec) {
    const auto schema = plrm::SchemaSpec::from_file(args.schema_path);
    const auto data = plrm::load_dataset(args.data_path, schema, args.group);
    const auto lambdas = parse_grid(args.lambda_spec);

    std::unique_ptr<plrm::LinearHypothesis> hyp;
    if (!coef_spec.empty()) {
        const auto eq = coef_spec.find('=');
        if (eq == std::string::npos)
            throw plrm::data_error("--coef expects NAME=VALUE");
        const int idx = resolve_coefficient(data, coef_spec.substr(0, eq));
        const double value = std::stod(coef_spec.substr(eq + 1));
        hyp = std::make_unique<plrm::LinearHypothesis>(
            plrm::LinearHypothesis::single_coefficient(data.dims.nu(), idx, value));
    } else if (!contrast_path.empty()) {
        const auto rows = plrm::read_csv(contrast_path);
        const int r = static_cast<int>(rows.size());
        plrm::Matrix lt(r, data.dims.nu());
        for (int i = 0; i < r; ++i) {
            if (static_cast<int>(rows[i].size()) != data.dims.nu())
                throw plrm::data_error("contrast row " + std::to_string(i) + " has " +
                                       std::to_string(rows[i].size()) +
                                       " entries, expected " +
                                       std::to_string(data.dims.nu()));
            for (int j = 0; j < data.dims.nu(); ++j) lt(i, j) = std::stod(rows[i][j]);
        }
        plrm::Vector h = plrm::Vector::Zero(r);
        if (!h_spec.empty()) {
            const auto vals = parse_list(h_spec);
            if (static_cast<int>(vals.size()) != r)
                throw plrm::data_error("--h needs " + std::to_string(r) + " values");
            for (int i = 0; i < r; ++i) h[i] = vals[i];
        }
        hyp = std::make_unique<plrm::LinearHypothesis>(lt.transpose(), h);
    } else {
        throw plrm::data_error("test: provide --coef or --contrast");
    }

    ordered_json report;
    report["tool"] = "plrm test";
    report["provenance"] = provenance(args.data_path, args.schema_path);
    report["tests"] = ordered_json::array();
    std::string csv = "lambda,statistic,df,p_value\n";
    bool all_converged = true;
    for (double lam : lambdas) {
        plrm::FitOptions opts;
        opts.grouped_scaling = !args.no_grouped_scaling;
        const auto fit = plrm::fit_mdpde(data, lam, opts);
        all_converged = all_converged && fit.converged;
        const auto w = plrm::wald_statistic(fit, *hyp);
        ordered_json t;
        t["lambda"] = lam;
        t["statistic"] = w.statistic;
        t["df"] = w.df;
        t["p_value"] = w.p_value;
        t["converged"] = fit.converged;
        report["tests"].push_back(std::move(t));
        csv += format_double(lam) + "," + format_double(w.statistic) + "," +
               std::to_string(w.df) + "," + format_double(w.p_value) + "\n";
    }
    emit(args.format == "json" ? plrm::Report{report}.serialize() : csv,
         args.out_path);
    return all_converged ? 0 : 3;
}

int run_select_lambda(const CommonArgs& args, const std::string& grid_spec,
                      double pilot) {
    const auto schema = plrm::SchemaSpec::from_file(args.schema_path);
    const auto data = plrm::load_dataset(args.data_path, schema, args.group);
    plrm::TuningConfig cfg;
    cfg.pilot_lambda = pilot;
    cfg.grid = parse_grid(grid_spec);
    cfg.grouped_scaling = !args.no_grouped_scaling;
    const auto trace = plrm::select_lambda(data, cfg);

    ordered_json report;
    report["tool"] = "plrm select-lambda";
    report["provenance"] = provenance(args.data_path, args.schema_path);
    report["pilot_lambda"] = trace.pilot_lambda;
    report["lambda_opt"] = trace.lambda_opt;
    report["trace"] = ordered_json::array();
    std::string csv = "lambda,bias_sq,variance,mse,skipped,converged\n";
    for (const auto& rec : trace.records) {
        ordered_json r;
        r["lambda"] = rec.lambda;
        r["bias_sq"] = rec.bias_sq;
        r["variance"] = rec.variance;
        r["mse"] = rec.mse;
        r["skipped"] = rec.skipped;
        r["converged"] = rec.converged;
        report["trace"].push_back(std::move(r));
        csv += format_double(rec.lambda) + "," + format_double(rec.bias_sq) + "," +
               format_double(rec.variance) + "," + format_double(rec.mse) + "," +
               (rec.skipped ? "1" : "0") + "," + (rec.converged ? "1" : "0") + "\n";
    }
    ordered_json best = ordered_json::array();
    for (int i = 0; i < data.dims.nu(); ++i) {
        ordered_json c;
        c["name"] = plrm::coefficient_name(data, i);
        c["estimate"] = trace.beta_opt[i];
        best.push_back(std::move(c));
    }
    report["coefficients_at_opt"] = std::move(best);
    emit(args.format == "json" ? plrm::Report{report}.serialize() : csv,
         args.out_path);
    return 0;
}

int run_influence(const CommonArgs& args, int row, int category,
                  const std::string& scale_spec) {
    const auto schema = plrm::SchemaSpec::from_file(args.schema_path);
    const auto data = plrm::load_dataset(args.data_path, schema, args.group);
    const auto lambdas = parse_grid(args.lambda_spec);
    const auto scales = parse_list(scale_spec);
    if (row < 0 || row >= data.rows())
        throw plrm::data_error("influence: --row out of range");
    if (category < 1 || category > data.dims.n_categories())
        throw plrm::data_error("influence: --category out of range (1-based)");

    ordered_json report;
    report["tool"] = "plrm influence";
    report["provenance"] = provenance(args.data_path, args.schema_path);
    report["rows"] = ordered_json::array();
    std::string csv = "lambda,scale,if_norm\n";
    for (double lam : lambdas) {
        plrm::FitOptions opts;
        opts.grouped_scaling = !args.no_grouped_scaling;
        opts.compute_matrices = false;
        const auto fit = plrm::fit_mdpde(data, lam, opts);
        for (double s : scales) {
            plrm::ContaminationPoint cp;
            cp.row = row;
            cp.t = plrm::Vector::Zero(data.dims.n_categories());
            cp.t[category - 1] = 1.0;
            plrm::Vector x = data.X.row(row);
            x.tail(data.dims.k) *= s;
            cp.x_override = x;
            const double norm =
                plrm::if_single_index(fit.beta_hat, data, lam, cp).norm();
            ordered_json rec;
            rec["lambda"] = lam;
            rec["scale"] = s;
            rec["if_norm"] = norm;
            report["rows"].push_back(std::move(rec));
            csv += format_double(lam) + "," + format_double(s) + "," +
                   format_double(norm) + "\n";
        }
    }
    emit(args.format == "json" ? plrm::Report{report}.serialize() : csv,
         args.out_path);
    return 0;
}

int run_simulate(const std::string& design_path, const std::string& study,
                 int reps_override, long long seed_override, int threads,
                 const std::string& out_prefix) {
    const auto j = nlohmann::json::parse(plrm::read_text_file(design_path));
    plrm::SimDesign design;
    const auto bt = j.at("beta_true").get<std::vector<double>>();
    design.beta_true =
        Eigen::Map<const plrm::Vector>(bt.data(), static_cast<Eigen::Index>(bt.size()));
    design.k = j.value("k", 2);
    design.d = j.value("d", 2);
    design.N = j.value("N", 100);
    design.contamination_pct = j.value("contamination_pct", 0.0);
    design.seed = j.value("seed", 0ULL);
    design.code_compat = j.value("code_compat", false);
    const auto lambdas = j.value("lambdas", std::vector<double>{0.0});
    auto n_grid = j.value("n_grid", std::vector<int>{});
    if (n_grid.empty()) n_grid = {design.N};
    int reps = j.value("reps", 100);
    const double alpha = j.value("alpha", 0.05);
    if (reps_override > 0) reps = reps_override;
    if (seed_override >= 0) design.seed = static_cast<std::uint64_t>(seed_override);

    plrm::StudyResult result;
    if (study == "mse") {
        result = plrm::mse_study(design, lambdas, n_grid, reps, threads);
    } else {
        const auto& hj = j.at("hypothesis");
        const auto hyp = plrm::LinearHypothesis::single_coefficient(
            design.dims().nu(), hj.at("coefficient").get<int>(),
            hj.at("value").get<double>());
        result = study == "level"
                     ? plrm::level_study(design, lambdas, n_grid, reps, hyp, alpha,
                                         threads)
                     : plrm::power_study(design, lambdas, n_grid, reps, hyp, alpha,
                                         threads);
    }
    if (out_prefix.empty() || out_prefix == "-") {
        std::cout << result.to_csv();
    } else {
        plrm::write_text_file(out_prefix + ".csv", result.to_csv());
        plrm::write_text_file(out_prefix + ".json", result.to_json());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust polytomous logistic regression via density power divergence"};
    app.require_subcommand(1);

    CommonArgs fit_args, test_args, sel_args, inf_args;
    std::string coef_spec, contrast_path, h_spec;
    std::string grid_spec = "0:0.05:1";
    double pilot = 0.3;
    int row = 0, category = 1;
    std::string scale_spec = "1";
    std::string design_path, study = "mse", out_prefix;
    int reps_override = 0, threads = 0;
    long long seed_override = -1;

    auto* fit_cmd = app.add_subcommand("fit", "fit the model over a lambda grid");
    add_common(fit_cmd, fit_args);

    auto* test_cmd = app.add_subcommand("test", "Wald-type tests for linear hypotheses");
    test_cmd->set_help_flag("--help", "print help");  // frees -h for the target vector
    add_common(test_cmd, test_args);
    test_cmd->add_option("--coef", coef_spec, "NAME=VALUE single-coefficient null");
    test_cmd->add_option("--contrast", contrast_path, "CSV matrix holding L^T");
    test_cmd->add_option("--h", h_spec, "comma-separated target vector");

    auto* sel_cmd = app.add_subcommand("select-lambda", "data-driven tuning selection");
    add_common(sel_cmd, sel_args, false);
    sel_cmd->add_option("--grid", grid_spec, "lambda grid start:step:stop");
    sel_cmd->add_option("--pilot", pilot, "pilot lambda (default 0.3)");

    auto* inf_cmd = app.add_subcommand("influence", "influence-function diagnostics");
    add_common(inf_cmd, inf_args);
    inf_cmd->add_option("--row", row, "probe row (0-based)");
    inf_cmd->add_option("--category", category, "contaminating category (1-based)");
    inf_cmd->add_option("--x-scale", scale_spec, "comma-separated leverage scales");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo studies from a design file");
    sim_cmd->add_option("--design", design_path, "design JSON")->required();
    sim_cmd->add_option("--study", study, "mse, level or power")
        ->check(CLI::IsMember({"mse", "level", "power"}));
    sim_cmd->add_option("--reps", reps_override, "override replication count");
    sim_cmd->add_option("--seed", seed_override, "override master seed");
    sim_cmd->add_option("--threads", threads, "worker threads (0 = auto)");
    sim_cmd->add_option("--out", out_prefix, "output prefix ('-' = CSV to stdout)");

    try {
        app.parse(argc, argv);
        if (fit_cmd->parsed()) return run_fit(fit_args);
        if (test_cmd->parsed())
            return run_test(test_args, coef_spec, contrast_path, h_spec);
        if (sel_cmd->parsed()) return run_select_lambda(sel_args, grid_spec, pilot);
        if (inf_cmd->parsed()) return run_influence(inf_args, row, category, scale_spec);
        if (sim_cmd->parsed())
            return run_simulate(design_path, study, reps_override, seed_override,
                                threads, out_prefix);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const plrm::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
