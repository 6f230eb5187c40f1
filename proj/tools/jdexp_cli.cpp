// SPDX-License-Identifier: MIT
//
// jdexp: price, smile, validate, calibrate, diagnostics.
//
// Exit codes: 0 success, 1 domain error (JSON on stderr), 2 usage or schema error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "jdexp/csv.hpp"
#include "jdexp/jdexp.hpp"
#include "jdexp/model_json.hpp"

namespace {

using jdexp::io::json;

/// Usage-level failure (bad flags, unreadable or malformed input files).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(path + ": malformed JSON: " + e.what());
    }
}

jdexp::ModelSpec load_model(const std::string& path)
{
    return jdexp::io::model_from_json(read_json_file(path));
}

jdexp::PayoffKind parse_kind(const std::string& s)
{
    if (s == "call")
        return jdexp::PayoffKind::Call;
    if (s == "put")
        return jdexp::PayoffKind::Put;
    if (s == "digital")
        return jdexp::PayoffKind::DigitalCall;
    throw UsageError("payoff must be call, put or digital");
}

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot write " + path);
    out << text;
}

/// Strike on the out-of-the-money side of the forward.
jdexp::PayoffKind otm_kind(double strike, double forward)
{
    return strike >= forward ? jdexp::PayoffKind::Call : jdexp::PayoffKind::Put;
}

double model_implied_vol(const jdexp::ModelSpec& model, double T, double strike, double* price_out = nullptr)
{
    const double F = model.env().forward(T);
    const jdexp::Payoff payoff{otm_kind(strike, F), strike, T};
    const double price = jdexp::approx_price(model, payoff).total;
    if (price_out)
        *price_out = price;
    return jdexp::implied_vol(price, jdexp::make_deal(model, payoff), F);
}

double vega_of(const jdexp::ModelSpec& model, double T, double strike, double vol)
{
    const double F = model.env().forward(T);
    const double D = model.env().discount(T);
    return model.variant() == jdexp::ModelVariant::LogAssetAA ? jdexp::black_vega(F, strike, T, vol, D)
                                                               : jdexp::bachelier_vega(F, strike, T, vol, D);
}

std::vector<double> parse_list(const std::string& s, const std::string& what)
{
    std::vector<double> out;
    for (const auto& cell : jdexp::io::split_csv_line(s))
        out.push_back(jdexp::io::parse_number(cell, what));
    if (out.empty())
        throw UsageError(what + " is empty");
    return out;
}

// ---------------------------------------------------------------------------

struct PriceArgs {
    std::string model;
    std::string payoff = "call";
    double strike = 0.0;
    double maturity = 0.0;
    bool breakdown = false;
};

int run_price(const PriceArgs& a)
{
    const auto model = load_model(a.model);
    const jdexp::Payoff payoff{parse_kind(a.payoff), a.strike, a.maturity};
    const auto p = jdexp::approx_price(model, payoff);
    json out;
    if (a.breakdown) {
        out["merton_term"] = p.merton_term;
        out["diffusion_correction"] = p.diffusion_correction;
        out["jump_correction"] = p.jump_correction;
    }
    out["total"] = p.total;
    std::cout << out.dump() << "\n";
    return 0;
}

struct SmileArgs {
    std::string model;
    std::string maturities;
    std::string strikes;
    std::string out;
};

int run_smile(const SmileArgs& a)
{
    const auto model = load_model(a.model);
    const auto maturities = parse_list(a.maturities, "--maturities");
    const auto rel = parse_list(a.strikes, "--strikes");
    std::ostringstream csv;
    csv << "maturity_years";
    for (double k : rel)
        csv << ',' << jdexp::io::format_number(k);
    csv << '\n';
    for (double T : maturities) {
        csv << jdexp::io::format_number(T);
        for (double k : rel) {
            csv << ',';
            try {
                csv << jdexp::io::format_number(model_implied_vol(model, T, k * model.env().spot));
            } catch (const jdexp::NoSolution& e) {
                std::cerr << "warning: no implied vol at maturity " << T << ", relative strike " << k << ": "
                          << e.what() << "\n";
                csv << "NA";
            }
        }
        csv << '\n';
    }
    write_output(a.out, csv.str());
    return 0;
}

struct ValidateArgs {
    std::string model;
    std::string grid;
    std::string out;
    std::uint64_t paths = 2'000'000;
    int steps = 250;
    std::uint64_t seed = 20080917;
    bool no_antithetic = false;
    bool control_variate = false;
    double budget = 1e10;
};

int run_validate(const ValidateArgs& a)
{
    const auto model = load_model(a.model);
    const auto grid = jdexp::io::read_csv(a.grid);
    const auto ct = grid.column("maturity_years");
    const auto ck = grid.column("relative_strike");
    std::vector<jdexp::Payoff> payoffs;
    std::vector<double> rel;
    for (std::size_t i = 0; i < grid.rows.size(); ++i) {
        const std::string where = a.grid + ": row " + std::to_string(i + 1);
        const double T = jdexp::io::parse_number(grid.rows[i][ct], where);
        const double k = jdexp::io::parse_number(grid.rows[i][ck], where);
        const double K = k * model.env().spot;
        payoffs.push_back({otm_kind(K, model.env().forward(T)), K, T});
        rel.push_back(k);
    }
    if (payoffs.empty())
        throw UsageError("validation grid has no rows");

    jdexp::McConfig cfg;
    cfg.n_paths = a.paths;
    cfg.n_steps_per_year = a.steps;
    cfg.seed = a.seed;
    cfg.antithetic = !a.no_antithetic;
    cfg.control_variate = a.control_variate;
    cfg.budget = a.budget;
    std::vector<double> horizons;
    for (const auto& p : payoffs)
        horizons.push_back(p.maturity);
    const double work = static_cast<double>(a.paths) * static_cast<double>(jdexp::mc_step_count(model, horizons, cfg));
    if (work > a.budget)
        throw jdexp::BudgetExceeded("paths x steps = " + jdexp::io::format_number(work) + " exceeds budget " +
                                    jdexp::io::format_number(a.budget));

    const auto mc = jdexp::mc_price_many(model, payoffs, cfg);
    std::ostringstream csv;
    csv << "maturity_years,relative_strike,iv_expansion,iv_mc,error_bp,mc_stderr_bp\n";
    for (std::size_t i = 0; i < payoffs.size(); ++i) {
        const auto& p = payoffs[i];
        const double F = model.env().forward(p.maturity);
        const auto deal = jdexp::make_deal(model, p);
        std::string iv_exp = "NA", iv_mc = "NA", err = "NA", se = "NA";
        try {
            const double ve = jdexp::implied_vol(jdexp::approx_price(model, p).total, deal, F);
            iv_exp = jdexp::io::format_number(ve);
            const double vm = jdexp::implied_vol(mc[i].price, deal, F);
            iv_mc = jdexp::io::format_number(vm);
            err = jdexp::io::format_number((ve - vm) * 1e4);
            se = jdexp::io::format_number(mc[i].std_error / vega_of(model, p.maturity, p.strike, vm) * 1e4);
        } catch (const jdexp::NoSolution& e) {
            std::cerr << "warning: no implied vol at maturity " << p.maturity << ", relative strike " << rel[i]
                      << ": " << e.what() << "\n";
        }
        csv << jdexp::io::format_number(p.maturity) << ',' << jdexp::io::format_number(rel[i]) << ',' << iv_exp
            << ',' << iv_mc << ',' << err << ',' << se << '\n';
    }
    write_output(a.out, csv.str());
    return 0;
}

struct CalibrateArgs {
    std::string quotes;
    double spot = 0.0;
    std::string rate;
    std::string config;
    std::string out;
    std::string residuals;
};

int run_calibrate(const CalibrateArgs& a)
{
    const auto table = jdexp::io::read_csv(a.quotes);
    const auto ct = table.column("maturity_years");
    const auto ck = table.column("strike");
    const auto cv = table.column("implied_vol");
    jdexp::VolSurface surface;
    surface.spot = a.spot;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::string where = a.quotes + ": row " + std::to_string(i + 1);
        surface.quotes.push_back({jdexp::io::parse_number(table.rows[i][ct], where),
                                  jdexp::io::parse_number(table.rows[i][ck], where),
                                  jdexp::io::parse_number(table.rows[i][cv], where)});
    }
    std::stable_sort(surface.quotes.begin(), surface.quotes.end(),
                     [](const jdexp::VolQuote& x, const jdexp::VolQuote& y) { return x.maturity < y.maturity; });
    if (!a.rate.empty()) {
        const auto j = read_json_file(a.rate);
        if (j.contains("rate"))
            surface.rate = jdexp::io::curve_from_json(j["rate"], "$.rate");
        if (j.contains("dividend"))
            surface.dividend = jdexp::io::curve_from_json(j["dividend"], "$.dividend");
    }
    const jdexp::CalibConfig config =
        a.config.empty() ? jdexp::CalibConfig{} : jdexp::io::calib_config_from_json(read_json_file(a.config));

    const auto result = jdexp::bootstrap_calibrate(surface, config);
    for (std::size_t i = 0; i < result.objective_trace.size(); ++i)
        std::cerr << "objective[" << i << "] = " << jdexp::io::format_number(result.objective_trace[i]) << "\n";
    std::cerr << "wall time: " << result.wall_time_seconds << " s\n";

    std::ostringstream csv;
    csv << "maturity_years,strike,market_vol,model_vol,residual_bp\n";
    for (std::size_t i = 0; i < result.maturities.size(); ++i)
        for (std::size_t q = 0; q < result.strikes[i].size(); ++q)
            csv << jdexp::io::format_number(result.maturities[i]) << ','
                << jdexp::io::format_number(result.strikes[i][q]) << ','
                << jdexp::io::format_number(result.market_vols[i][q]) << ','
                << jdexp::io::format_number(result.model_vols[i][q]) << ','
                << jdexp::io::format_number(result.residuals_bp[i][q]) << '\n';

    std::string residual_path = a.residuals;
    if (residual_path.empty()) {
        const auto dot = a.out.rfind(".json");
        residual_path = (dot == std::string::npos ? a.out : a.out.substr(0, dot)) + "_residuals.csv";
    }
    write_output(a.out, jdexp::io::calibration_to_json(result).dump(2) + "\n");
    write_output(residual_path, csv.str());
    return 0;
}

struct DiagnosticsArgs {
    std::string model;
    double maturity = 0.0;
};

int run_diagnostics(const DiagnosticsArgs& a)
{
    const auto model = load_model(a.model);
    const auto d = jdexp::diagnostics(model, a.maturity);
    const json out{{"M0", d.M0},
                   {"M1", d.M1},
                   {"MJ", d.MJ},
                   {"sigma_inf", d.sigma_inf},
                   {"diffusion_scale", d.diffusion_scale},
                   {"jump_scale", d.jump_scale},
                   {"smooth_envelope", d.smooth_envelope},
                   {"vanilla_envelope", d.vanilla_envelope},
                   {"binary_envelope", d.binary_envelope}};
    std::cout << out.dump() << "\n";
    return 0;
}

int report_domain_error(const char* kind, const std::string& message)
{
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Jump-diffusion expansion pricer and calibrator"};
    app.require_subcommand(1);

    PriceArgs price;
    auto* p = app.add_subcommand("price", "Expansion price of one option");
    p->add_option("--model", price.model, "Model JSON file")->required();
    p->add_option("--payoff", price.payoff, "call | put | digital");
    p->add_option("--strike", price.strike, "Absolute strike")->required();
    p->add_option("--maturity", price.maturity, "Maturity in years")->required();
    p->add_flag("--breakdown", price.breakdown, "Print Merton term and both corrections");

    SmileArgs smile;
    auto* s = app.add_subcommand("smile", "Implied volatility grid from the expansion");
    s->add_option("--model", smile.model, "Model JSON file")->required();
    s->add_option("--maturities", smile.maturities, "Comma-separated maturities in years")->required();
    s->add_option("--strikes", smile.strikes, "Comma-separated strikes relative to spot (1.0 = ATM spot)")
        ->required();
    s->add_option("--out", smile.out, "Output CSV (stdout if omitted)");

    ValidateArgs val;
    auto* v = app.add_subcommand("validate", "Expansion vs Monte Carlo implied-vol errors in bp");
    v->add_option("--model", val.model, "Model JSON file")->required();
    v->add_option("--grid", val.grid, "CSV with maturity_years,relative_strike")->required();
    v->add_option("--paths", val.paths, "Monte Carlo paths");
    v->add_option("--steps", val.steps, "Euler steps per year");
    v->add_option("--seed", val.seed, "RNG seed");
    v->add_option("--budget", val.budget, "Maximum paths x steps");
    v->add_flag("--no-antithetic", val.no_antithetic, "Disable antithetic variates");
    v->add_flag("--control-variate", val.control_variate, "Use the Merton proxy as a control variate");
    v->add_option("--out", val.out, "Output CSV (stdout if omitted)");

    CalibrateArgs cal;
    auto* c = app.add_subcommand("calibrate", "Bootstrap calibration to an implied-vol surface");
    c->add_option("--quotes", cal.quotes, "CSV with maturity_years,strike,implied_vol")->required();
    c->add_option("--spot", cal.spot, "Spot level")->required();
    c->add_option("--rate", cal.rate, "JSON with optional rate and dividend curves");
    c->add_option("--config", cal.config, "Calibration config JSON");
    c->add_option("--out", cal.out, "Result JSON (a reusable model file)")->required();
    c->add_option("--residuals", cal.residuals, "Residual CSV (default: <out>_residuals.csv)");

    DiagnosticsArgs diag;
    auto* d = app.add_subcommand("diagnostics", "Level constants and error-envelope shapes");
    d->add_option("--model", diag.model, "Model JSON file")->required();
    d->add_option("--maturity", diag.maturity, "Maturity in years")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*p)
            return run_price(price);
        if (*s)
            return run_smile(smile);
        if (*v)
            return run_validate(val);
        if (*c)
            return run_calibrate(cal);
        if (*d)
            return run_diagnostics(diag);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const jdexp::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const jdexp::Error& e) {
        return report_domain_error(e.kind(), e.what());
    }
    return 2;
}
