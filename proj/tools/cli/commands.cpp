#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli.hpp"
#include "covar/copula.hpp"
#include "covar/empirical.hpp"
#include "covar/errors.hpp"
#include "covar/marginal.hpp"
#include "covar/mde.hpp"
#include "covar/pipeline.hpp"
#include "covar/random.hpp"
#include "covar/tail_models.hpp"
#include "io.hpp"

namespace covar::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using pipeline::Regime;
using tail::CatalogRow;
using tail::ModelFamily;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class T>
std::string join(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += format_number(xs[i]);
        else
            out += std::to_string(xs[i]);
    }
    return out;
}

std::string opt_str(const std::optional<double>& x) { return x ? format_number(*x) : ""; }

json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return nullptr;
    return x > 0 ? "inf" : "-inf";
}

json provenance_json(const Provenance& prov) {
    json j = json::object();
    for (const auto& [k, v] : prov) j[k] = v;
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

double catalog_param(CatalogRow row, const std::optional<double>& theta, const std::optional<double>& delta) {
    const bool gumbel = row == CatalogRow::GumbelSurvival || row == CatalogRow::GumbelReflect2;
    if (gumbel && delta) return *delta;
    if (theta) return *theta;
    if (delta) return *delta;
    throw UsageError(std::string("family '") + std::string(tail::to_string(row)) + "' needs --" +
                     (gumbel ? "delta" : "theta"));
}

// Copula for synth and simulate; non-catalog names map to the plain families.
struct CopulaChoice {
    copula::CopulaSpec spec = copula::CopulaSpec::independence();
    std::optional<CatalogRow> row;
    double param = 0.0;
    std::optional<tail::TailModel> truth;
};

CopulaChoice choose_copula(const std::string& family, const std::optional<double>& theta,
                           const std::optional<double>& delta, double rho, double nu) {
    CopulaChoice c;
    if (family == "independence") return c;
    if (family == "comonotone") {
        c.spec = copula::CopulaSpec::comonotone();
        return c;
    }
    if (family == "student_t" || family == "t") {
        c.spec = copula::CopulaSpec::student_t(rho, nu);
        c.truth = tail::TailModel(Regime::Mixed, ModelFamily::StudentTTDF, {rho, nu});
        return c;
    }
    if (family == "gaussian") {
        c.spec = copula::CopulaSpec::gaussian(rho);
        return c;
    }
    c.row = tail::parse_catalog_row(family);
    c.param = catalog_param(*c.row, theta, delta);
    c.spec = tail::catalog_copula(*c.row, c.param);
    c.truth = pipeline::catalog_truth(*c.row, c.param);
    return c;
}

pipeline::KRule parse_k_rule(const std::string& text) {
    pipeline::KRule rule;
    const auto colon = text.find(':');
    const std::string kind = colon == std::string::npos ? "fixed" : text.substr(0, colon);
    const std::string value = colon == std::string::npos ? text : text.substr(colon + 1);
    try {
        std::size_t used = 0;
        rule.value = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw UsageError("invalid --k-rule '" + text + "' (use fixed:K, sqrt:C or fraction:F)");
    }
    if (kind == "fixed")
        rule.kind = pipeline::KRule::Kind::Fixed;
    else if (kind == "sqrt")
        rule.kind = pipeline::KRule::Kind::SqrtMultiple;
    else if (kind == "fraction")
        rule.kind = pipeline::KRule::Kind::Fraction;
    else
        throw UsageError("invalid --k-rule '" + text + "' (use fixed:K, sqrt:C or fraction:F)");
    if (!(rule.value > 0.0)) throw UsageError("--k-rule value must be positive");
    return rule;
}

double parse_gamma(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "Inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double g = std::stod(text, &used);
        if (used == text.size()) return g;
    } catch (const std::exception&) {
    }
    throw UsageError("invalid --gamma '" + text + "'");
}

void check_level(double x, const char* name) {
    if (!(x > 0.0 && x < 1.0)) throw UsageError(std::string("--") + name + " must lie in (0,1)");
}

// ---------------------------------------------------------------------------
// limits
// ---------------------------------------------------------------------------

struct LimitsArgs {
    std::string family;
    std::optional<double> theta;
    std::optional<double> delta;
    double q = 0.5;
    double p = 0.05;
    std::optional<double> kappa;
    double rho_exp = 1.0;
    double xi = 0.0;
    std::string gamma = "1";
    std::optional<double> a0;
    std::string format = "table";
};

void add_limits(CLI::App& app, LimitsArgs& a) {
    auto* sub = app.add_subcommand("limits", "Asymptotic levels, rates and Delta-CoVaR limits");
    sub->add_option("--family", a.family, "Catalog row: clayton, gumbel*, ips*, frank, gumbel2*, clayton2*");
    sub->add_option("--theta", a.theta, "Family parameter");
    sub->add_option("--delta", a.delta, "Gumbel parameter");
    sub->add_option("--q", a.q, "Conditional level q")->capture_default_str();
    sub->add_option("--p", a.p, "Conditioning level p")->capture_default_str();
    sub->add_option("--kappa", a.kappa, "Tail order");
    sub->add_option("--rho-exp", a.rho_exp, "Growth exponent of the second-order condition")->capture_default_str();
    sub->add_option("--xi", a.xi, "Marginal lower-tail index")->capture_default_str();
    sub->add_option("--gamma", a.gamma, "Extended regular variation index (number or inf)")->capture_default_str();
    sub->add_option("--a0", a.a0, "Second-order constant a0");
    sub->add_option("--format", a.format, "Output format")->check(CLI::IsMember({"table", "json"}))->capture_default_str();
}

json limits_catalog(const LimitsArgs& a) {
    const CatalogRow row = tail::parse_catalog_row(a.family);
    const double param = catalog_param(row, a.theta, a.delta);
    check_level(a.q, "q");
    check_level(a.p, "p");
    const copula::CopulaSpec c = tail::catalog_copula(row, param);
    json j;
    j["family"] = std::string(tail::to_string(row));
    j["param"] = param;
    j["copula"] = c.describe();
    j["q"] = a.q;
    j["p"] = a.p;
    auto guarded = [&](const char* key, auto&& f) {
        try {
            j[key] = number(f());
        } catch (const BranchBoundary& e) {
            j[key] = std::string("undefined: ") + e.what();
        }
    };
    guarded("v_qp_asymptotic", [&] { return tail::table1_v_qp(row, param, a.q, a.p); });
    const double v_qp = copula::v_exact(c, a.q, a.p);
    j["v_qp_exact"] = number(v_qp);
    if (j["v_qp_asymptotic"].is_number())
        j["ratio_qp"] = number(v_qp / j["v_qp_asymptotic"].get<double>());
    guarded("v_p_asymptotic", [&] { return tail::table1_vp(row, param, a.p); });
    const double v_p = copula::v_exact(c, a.p, a.p);
    j["v_p_exact"] = number(v_p);
    if (j["v_p_asymptotic"].is_number()) j["ratio_p"] = number(v_p / j["v_p_asymptotic"].get<double>());
    j["r_exact"] = number(v_p / a.p);
    j["kappa"] = number(tail::catalog_kappa(row, param));
    const tail::RegimeInfo ri = tail::theoretical_regime(c);
    j["regime"] = std::string(tail::to_string(ri.regime));
    j["kappa_lower"] = number(ri.kappa);
    j["kappa_2star"] = number(ri.kappa_2star);
    j["expansion_not_uniform"] = ri.expansion_not_uniform;
    return j;
}

json limits_rates(const LimitsArgs& a) {
    tail::LimitInputs in;
    in.kappa = *a.kappa;
    in.rho_exp = a.rho_exp;
    in.xi = a.xi;
    in.gamma = parse_gamma(a.gamma);
    in.a0 = a.a0;
    json j;
    j["kappa"] = in.kappa;
    j["rho_exp"] = in.rho_exp;
    j["xi"] = in.xi;
    j["gamma"] = number(in.gamma);
    j["a0"] = a.a0 ? json(*a.a0) : json(nullptr);
    const tail::RateResult rate = tail::vp_rate(in);
    j["vp_tends_to_one"] = rate.tends_to_one;
    j["vp_rate_exponent"] = number(rate.exponent);
    const tail::DeltaCovarLimit lim = tail::delta_covar_limit(in);
    j["delta_covar_limit"] = number(lim.value);
    j["delta_covar_rate_exponent"] = number(lim.rate_exponent);
    j["divergent"] = lim.divergent;
    j["gamma_infinite"] = lim.gamma_infinite;
    j["branch"] = lim.label;
    return j;
}

void print_table(std::ostream& out, const json& section) {
    for (const auto& [key, value] : section.items()) {
        std::string text;
        if (value.is_number())
            text = format_number(value.get<double>());
        else if (value.is_string())
            text = value.get<std::string>();
        else if (value.is_null())
            text = "-";
        else
            text = value.dump();
        out << std::left << std::setw(28) << key << text << '\n';
    }
}

int cmd_limits(const LimitsArgs& a, std::ostream& out) {
    if (a.family.empty() && !a.kappa)
        throw UsageError("limits needs --family (with --theta/--delta) or --kappa");
    json j;
    if (!a.family.empty()) j["catalog"] = limits_catalog(a);
    if (a.kappa) j["limits"] = limits_rates(a);
    if (a.format == "json") {
        out << dump(j);
        return kExitOk;
    }
    bool first = true;
    for (const auto& [name, section] : j.items()) {
        if (!first) out << '\n';
        first = false;
        out << "[" << name << "]\n";
        print_table(out, section);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string family;
    std::optional<double> theta;
    std::optional<double> delta;
    double rho = 0.5;
    double nu = 4.0;
    std::vector<std::size_t> n_grid{2000, 8000};
    std::size_t reps = 20;
    std::string k_rule = "sqrt:2";
    std::vector<double> p_levels{1e-2, 1e-3, 1e-4};
    std::vector<double> q_levels{0.5};
    std::uint64_t seed = 1;
    bool deterministic_only = false;
    bool no_fit = false;
    unsigned threads = 1;
    std::string out = "simulate_out";
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
    auto* sub = app.add_subcommand("simulate", "Monte Carlo study of the estimators on a known copula");
    sub->add_option("--family", a.family, "Catalog row, or student_t")->required();
    sub->add_option("--theta", a.theta, "Family parameter");
    sub->add_option("--delta", a.delta, "Gumbel parameter");
    sub->add_option("--rho", a.rho, "Student-t correlation")->capture_default_str();
    sub->add_option("--nu", a.nu, "Student-t degrees of freedom")->capture_default_str();
    sub->add_option("--n", a.n_grid, "Sample sizes")->delimiter(',');
    sub->add_option("--reps", a.reps, "Replications per sample size")->capture_default_str();
    sub->add_option("--k-rule", a.k_rule, "fixed:K, sqrt:C (k=ceil(C sqrt n)) or fraction:F")->capture_default_str();
    sub->add_option("--p-levels", a.p_levels, "Levels for the deterministic ratio table")->delimiter(',');
    sub->add_option("--q-levels", a.q_levels, "Levels q for the plug-in ratio")->delimiter(',');
    sub->add_option("--seed", a.seed, "Root seed")->capture_default_str();
    sub->add_flag("--deterministic-only", a.deterministic_only, "Only compute the v_exact/asymptotic ratio table");
    sub->add_flag("--no-fit", a.no_fit, "Skip the minimum-distance fits");
    sub->add_option("--threads", a.threads, "Worker threads (0 = hardware)")->capture_default_str();
    sub->add_option("--out", a.out, "Output directory")->capture_default_str();
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    CopulaChoice choice = choose_copula(a.family, a.theta, a.delta, a.rho, a.nu);
    if (a.n_grid.empty()) throw UsageError("--n needs at least one sample size");
    for (std::size_t n : a.n_grid)
        if (n < 10) throw UsageError("--n values must be at least 10");
    for (double p : a.p_levels) check_level(p, "p-levels");
    for (double q : a.q_levels) check_level(q, "q-levels");
    if (!a.deterministic_only && a.reps == 0) throw UsageError("--reps must be positive");

    pipeline::SimStudyConfig cfg;
    cfg.copula = choice.spec;
    cfg.truth = choice.truth;
    cfg.catalog_row = choice.row;
    cfg.catalog_param = choice.param;
    cfg.n_grid = a.n_grid;
    cfg.reps = a.reps;
    cfg.k_rule = parse_k_rule(a.k_rule);
    cfg.p_levels = a.p_levels;
    cfg.q_levels = a.q_levels;
    cfg.seed = a.seed;
    cfg.fit = !a.no_fit;
    cfg.deterministic_only = a.deterministic_only;
    cfg.threads = a.threads;

    const Provenance prov{{"command", "simulate"},
                          {"family", a.family},
                          {"copula", choice.spec.describe()},
                          {"theta", opt_str(a.theta)},
                          {"delta", opt_str(a.delta)},
                          {"rho", format_number(a.rho)},
                          {"nu", format_number(a.nu)},
                          {"n", join(a.n_grid)},
                          {"reps", std::to_string(a.reps)},
                          {"k_rule", cfg.k_rule.describe()},
                          {"p_levels", join(a.p_levels)},
                          {"q_levels", join(a.q_levels)},
                          {"seed", std::to_string(a.seed)},
                          {"deterministic_only", a.deterministic_only ? "true" : "false"},
                          {"fit", cfg.fit ? "true" : "false"}};

    ensure_directory(a.out);
    const pipeline::SimStudyResult res = pipeline::simulate_study(cfg);

    CsvWriter csv(fs::path(a.out) / "report.csv", prov, {"kind", "n", "rep", "k", "seed", "p", "metric", "value"});
    for (const auto& t : res.theory) {
        for (const auto& [metric, value] :
             {std::pair{"v_exact", t.v_exact}, std::pair{"asymptotic_vp", t.table1_vp}, std::pair{"ratio", t.ratio}})
            csv.row({"theory", "", "", "", "", format_number(t.p), metric, format_number(value)});
    }
    for (const auto& r : res.records)
        csv.row({"mc", std::to_string(r.n), std::to_string(r.rep), std::to_string(r.k), std::to_string(r.seed), "",
                 r.metric, format_number(r.value)});
    csv.close();

    json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = provenance_json(prov);
    j["copula"] = res.copula;
    json theory = json::array();
    for (const auto& t : res.theory)
        theory.push_back({{"p", t.p}, {"v_exact", number(t.v_exact)}, {"asymptotic_vp", number(t.table1_vp)},
                          {"ratio", number(t.ratio)}});
    j["theory"] = theory;
    json summary = json::array();
    for (const auto& s : res.summary)
        summary.push_back({{"n", s.n}, {"metric", s.metric}, {"q10", number(s.q10)}, {"median", number(s.median)},
                           {"q90", number(s.q90)}});
    j["summary"] = summary;
    write_text_file(fs::path(a.out) / "summary.json", dump(j));

    if (!res.theory.empty()) {
        out << std::left << std::setw(12) << "p" << std::setw(18) << "v_exact" << std::setw(18) << "asymptotic"
            << "ratio\n";
        for (const auto& t : res.theory)
            out << std::setw(12) << format_number(t.p) << std::setw(18) << format_number(t.v_exact) << std::setw(18)
                << format_number(t.table1_vp) << format_number(t.ratio) << '\n';
    } else if (a.deterministic_only) {
        out << "no asymptotic formula for " << res.copula << '\n';
    }
    out << "wrote " << (fs::path(a.out) / "report.csv").string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateArgs {
    std::string input;
    std::vector<std::string> columns;
    std::size_t k = empirical::kDefaultK;
    double tau = mde::kDefaultTau;
    double p = 0.05;
    std::vector<double> q_levels{0.5};
    std::string regime;
    std::string family;
    bool force = false;
    std::string out;
};

void add_estimate(CLI::App& app, EstimateArgs& a) {
    auto* sub = app.add_subcommand("estimate", "Tail regime, tail model and adjustment factor for a sample of pairs");
    sub->add_option("--input", a.input, "CSV with columns u,v or z_i,z_s (optional date column)")->required();
    sub->add_option("--columns", a.columns, "Names of the two value columns")->delimiter(',')->expected(2);
    sub->add_option("--k", a.k, "Tail sample size k")->capture_default_str();
    sub->add_option("--tau", a.tau, "Classification threshold")->capture_default_str();
    sub->add_option("--p", a.p, "Level for the adjustment factor")->capture_default_str();
    sub->add_option("--q", a.q_levels, "Levels q for v_hat(q|p)")->delimiter(',');
    sub->add_option("--regime", a.regime, "Override the classified regime");
    sub->add_option("--family", a.family, "Force a tail model family");
    sub->add_flag("--force", a.force, "Fit attraction models even when lambda_hat <= tau");
    sub->add_option("--out", a.out, "Directory for summary.json (stdout only when omitted)");
}

std::pair<std::size_t, std::size_t> value_columns(const CsvTable& t, const std::vector<std::string>& requested) {
    auto need = [&](const std::string& name) {
        const auto c = t.column(name);
        if (!c) throw DataError(t.source + ": no column named '" + name + "'");
        return *c;
    };
    if (!requested.empty()) return {need(requested.at(0)), need(requested.at(1))};
    for (const auto& [a, b] : {std::pair{"u", "v"}, std::pair{"z_i", "z_s"}, std::pair{"value_i", "value_s"}})
        if (t.column(a) && t.column(b)) return {*t.column(a), *t.column(b)};
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] != "date") rest.push_back(i);
    if (rest.size() == 2) return {rest[0], rest[1]};
    throw DataError(t.source + ": expected columns u,v or z_i,z_s (or exactly two value columns)");
}

void check_dates(const CsvTable& t) {
    const auto dc = t.column("date");
    if (!dc) return;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        validate_date(t.rows[r][*dc], t.source + ": line " + std::to_string(t.lines[r]));
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
    check_level(a.p, "p");
    for (double q : a.q_levels) check_level(q, "q");
    if (a.k == 0) throw UsageError("--k must be positive");
    if (!a.regime.empty()) tail::parse_regime(a.regime);
    std::optional<ModelFamily> family_override;
    if (!a.family.empty()) family_override = tail::parse_model_family(a.family);

    const CsvTable t = read_csv(a.input);
    const auto [ci, cs] = value_columns(t, a.columns);
    check_dates(t);
    const std::vector<double> x = numeric_column(t, ci);
    const std::vector<double> y = numeric_column(t, cs);
    if (x.size() <= a.k)
        throw DataError(t.source + ": " + std::to_string(x.size()) + " rows is not enough for k=" + std::to_string(a.k));

    const Provenance prov{{"command", "estimate"},
                          {"input", a.input},
                          {"columns", t.header[ci] + "," + t.header[cs]},
                          {"k", std::to_string(a.k)},
                          {"tau", format_number(a.tau)},
                          {"p", format_number(a.p)},
                          {"q", join(a.q_levels)},
                          {"regime", a.regime},
                          {"family", a.family},
                          {"force", a.force ? "true" : "false"}};

    const empirical::PseudoSample ps = empirical::pseudo_observations(x, y);
    const empirical::TailCoefficients tc = empirical::tail_coefficients(ps, a.k);
    const Regime regime = a.regime.empty() ? mde::classify_regime(tc, a.tau) : tail::parse_regime(a.regime);
    const mde::MDEFit fit = pipeline::dispatch_fit(ps, a.k, regime, family_override, a.tau, a.force);

    json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = provenance_json(prov);
    j["n"] = ps.n;
    j["k"] = a.k;
    j["lambda_hat"] = number(tc.lambda_hat);
    j["lambda_hat_2star"] = number(tc.lambda_hat_2star);
    j["regime"] = std::string(tail::to_string(regime));
    j["regime_source"] = a.regime.empty() ? "classified" : "override";
    j["family"] = std::string(tail::to_string(fit.family));
    json theta = json::array();
    for (double th : fit.theta_hat) theta.push_back(number(th));
    j["theta_hat"] = theta;
    j["criterion"] = number(fit.criterion_value);
    j["flags"] = {{"boundary", fit.boundary}, {"non_identified", fit.non_identified}};
    json adj;
    adj["p"] = a.p;
    try {
        const mde::AdjustmentFactor af = mde::adjustment_factor(fit, a.p);
        adj["r_hat"] = number(af.r_hat);
        adj["v_hat"] = number(af.v_hat);
        adj["floor"] = number(af.floor);
        adj["independence"] = number(af.independence);
        adj["clamped"] = af.clamped;
    } catch (const std::exception& e) {
        adj["error"] = e.what();
    }
    j["adjustment"] = adj;
    json levels = json::array();
    for (double q : a.q_levels) {
        json l;
        l["q"] = q;
        try {
            const mde::LevelEstimate le = mde::v_hat(fit, q, a.p);
            l["v_hat"] = number(le.value);
            l["clamped"] = le.clamped;
        } catch (const std::exception& e) {
            l["error"] = e.what();
        }
        levels.push_back(l);
    }
    j["levels"] = levels;

    const std::string text = dump(j);
    if (!a.out.empty()) {
        ensure_directory(a.out);
        write_text_file(fs::path(a.out) / "summary.json", text);
    }
    out << text;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    std::string input;
    std::size_t window = 1250;
    std::size_t step = 250;
    double p = 0.05;
    std::size_t k = empirical::kDefaultK;
    double tau = mde::kDefaultTau;
    std::string marginal = "argarch";
    bool exact_delta = false;
    std::string regime;
    std::string family;
    unsigned threads = 1;
    std::string out = "analyze_out";
};

void add_analyze(CLI::App& app, AnalyzeArgs& a) {
    auto* sub = app.add_subcommand("analyze", "Rolling-window CoVaR analysis of a return pair");
    sub->add_option("--input", a.input, "CSV with columns date,value_i,value_s (or date,series,value)")->required();
    sub->add_option("--window", a.window, "Window length in observations")->capture_default_str();
    sub->add_option("--step", a.step, "Step between window starts")->capture_default_str();
    sub->add_option("--p", a.p, "VaR level")->capture_default_str();
    sub->add_option("--k", a.k, "Tail sample size k")->capture_default_str();
    sub->add_option("--tau", a.tau, "Classification threshold")->capture_default_str();
    sub->add_option("--marginal", a.marginal, "Marginal model")
        ->check(CLI::IsMember({"argarch", "passthrough"}))
        ->capture_default_str();
    sub->add_flag("--exact-delta", a.exact_delta, "Also report the per-day Delta-CoVaR without the zero-mean approximation");
    sub->add_option("--regime", a.regime, "Override the classified regime");
    sub->add_option("--family", a.family, "Force a tail model family");
    sub->add_option("--threads", a.threads, "Worker threads (0 = hardware)")->capture_default_str();
    sub->add_option("--out", a.out, "Output directory")->capture_default_str();
}

struct PairData {
    std::vector<std::string> dates;
    std::vector<double> x_i;
    std::vector<double> x_s;
};

PairData load_pairs(const std::string& path) {
    const CsvTable t = read_csv(path);
    PairData d;
    const auto dc = t.column("date");
    if (!dc) throw DataError(t.source + ": no 'date' column");
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        validate_date(t.rows[r][*dc], t.source + ": line " + std::to_string(t.lines[r]));

    if (t.column("value_i") && t.column("value_s")) {
        d.x_i = numeric_column(t, *t.column("value_i"));
        d.x_s = numeric_column(t, *t.column("value_s"));
        for (const auto& row : t.rows) d.dates.push_back(row[*dc]);
    } else if (t.column("series") && t.column("value")) {
        const std::size_t sc = *t.column("series");
        const std::vector<double> values = numeric_column(t, *t.column("value"));
        std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> by_date;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const std::string& s = t.rows[r][sc];
            auto& slot = by_date[t.rows[r][*dc]];
            auto& target = (s == "i" || s == "institution") ? slot.first
                           : (s == "s" || s == "system")     ? slot.second
                                                               : throw DataError(t.source + ": line " +
                                                                                 std::to_string(t.lines[r]) +
                                                                                 ": unknown series '" + s + "'");
            if (target)
                throw DataError(t.source + ": line " + std::to_string(t.lines[r]) + ": duplicate " + s + " value for " +
                                t.rows[r][*dc]);
            target = values[r];
        }
        for (const auto& [date, pair] : by_date) {
            if (!pair.first || !pair.second) throw DataError(t.source + ": date " + date + " lacks one of the two series");
            d.dates.push_back(date);
            d.x_i.push_back(*pair.first);
            d.x_s.push_back(*pair.second);
        }
    } else {
        throw DataError(t.source + ": expected columns date,value_i,value_s or date,series,value");
    }
    for (std::size_t r = 1; r < d.dates.size(); ++r)
        if (!(d.dates[r - 1] < d.dates[r]))
            throw DataError(t.source + ": dates are not strictly increasing at " + d.dates[r]);
    return d;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
    check_level(a.p, "p");
    if (a.window == 0 || a.step == 0) throw UsageError("--window and --step must be positive");
    if (a.k == 0) throw UsageError("--k must be positive");
    pipeline::AnalysisConfig cfg;
    cfg.window = a.window;
    cfg.step = a.step;
    cfg.p = a.p;
    cfg.k = a.k;
    cfg.tau = a.tau;
    cfg.marginal_mode = a.marginal == "passthrough" ? pipeline::MarginalMode::PassThrough : pipeline::MarginalMode::ArGarch;
    cfg.exact_delta = a.exact_delta;
    if (!a.regime.empty()) cfg.regime_override = tail::parse_regime(a.regime);
    if (!a.family.empty()) cfg.family_override = tail::parse_model_family(a.family);
    cfg.threads = a.threads;

    const PairData data = load_pairs(a.input);
    if (a.window > data.dates.size())
        throw DataError("--window " + std::to_string(a.window) + " exceeds the " + std::to_string(data.dates.size()) +
                        " rows of " + a.input);

    const Provenance prov{{"command", "analyze"},
                          {"input", a.input},
                          {"rows", std::to_string(data.dates.size())},
                          {"window", std::to_string(a.window)},
                          {"step", std::to_string(a.step)},
                          {"p", format_number(a.p)},
                          {"k", std::to_string(a.k)},
                          {"tau", format_number(a.tau)},
                          {"marginal", a.marginal},
                          {"exact_delta", a.exact_delta ? "true" : "false"},
                          {"regime", a.regime},
                          {"family", a.family}};

    ensure_directory(a.out);
    const pipeline::AnalysisResult res = pipeline::rolling_analysis(data.x_i, data.x_s, data.dates, cfg);

    // Merge fitted and skipped windows back into window order.
    std::vector<std::pair<std::size_t, const pipeline::CoVaRReport*>> fitted;
    for (const auto& r : res.reports) fitted.emplace_back(r.window_id, &r);
    std::vector<std::pair<std::size_t, const pipeline::SkippedWindow*>> skipped;
    for (const auto& s : res.skipped) skipped.emplace_back(s.window_id, &s);

    CsvWriter report(fs::path(a.out) / "report.csv", prov,
                     {"window_id", "status", "window_start", "window_end", "start_index", "end_index", "n", "regime",
                      "family", "theta_1", "theta_2", "criterion", "lambda_hat", "lambda_hat_2star", "r_hat", "v_hat",
                      "delta_covar", "eta_i", "lambda_skew_i", "beta_sum_i", "eta_s", "lambda_skew_s", "beta_sum_s",
                      "flags", "message"});
    const bool garch = cfg.marginal_mode == pipeline::MarginalMode::ArGarch;
    auto marg = [&](double x) { return garch ? format_number(x) : std::string(); };
    std::size_t fi = 0;
    std::size_t si = 0;
    std::size_t usable = 0;
    json windows = json::array();
    json skipped_json = json::array();
    while (fi < fitted.size() || si < skipped.size()) {
        const bool take_fitted = si >= skipped.size() || (fi < fitted.size() && fitted[fi].first < skipped[si].first);
        if (take_fitted) {
            const pipeline::CoVaRReport& r = *fitted[fi++].second;
            const bool ok = !r.flags.fit_failed && std::isfinite(r.r_hat);
            usable += ok ? 1 : 0;
            const std::string fam = r.family ? std::string(tail::to_string(*r.family)) : "";
            const std::string th1 = r.theta_hat.size() > 0 ? format_number(r.theta_hat[0]) : "";
            const std::string th2 = r.theta_hat.size() > 1 ? format_number(r.theta_hat[1]) : "";
            report.row({std::to_string(r.window_id), ok ? "ok" : "failed", r.start_date, r.end_date,
                        std::to_string(r.start_index), std::to_string(r.end_index),
                        std::to_string(r.end_index - r.start_index), std::string(tail::to_string(r.regime)), fam, th1,
                        th2, r.family ? format_number(r.criterion) : "", format_number(r.lambda_hat),
                        format_number(r.lambda_hat_2star), format_number(r.r_hat), format_number(r.v_hat),
                        format_number(r.delta_covar), marg(r.marginal_i.eta), marg(r.marginal_i.lambda_skew),
                        marg(r.marginal_i.beta_sum), marg(r.marginal_s.eta), marg(r.marginal_s.lambda_skew),
                        marg(r.marginal_s.beta_sum), r.flags.to_string(), r.message});
            json theta = json::array();
            for (double x : r.theta_hat) theta.push_back(number(x));
            windows.push_back({{"window_id", r.window_id},
                               {"window_start", r.start_date},
                               {"window_end", r.end_date},
                               {"regime", std::string(tail::to_string(r.regime))},
                               {"family", fam},
                               {"theta_hat", theta},
                               {"r_hat", number(r.r_hat)},
                               {"delta_covar", number(r.delta_covar)},
                               {"flags", r.flags.to_string()}});
        } else {
            const pipeline::SkippedWindow& s = *skipped[si++].second;
            report.row({std::to_string(s.window_id), "skipped", data.dates[s.start_index], data.dates[s.end_index - 1],
                        std::to_string(s.start_index), std::to_string(s.end_index),
                        std::to_string(s.end_index - s.start_index), "", "", "", "", "", "", "", "", "", "", "", "", "",
                        "", "", "", "", s.reason});
            skipped_json.push_back({{"window_id", s.window_id},
                                    {"window_start", data.dates[s.start_index]},
                                    {"reason", s.reason}});
        }
    }
    report.close();

    CsvWriter series(fs::path(a.out) / "series.csv", prov,
                     {"window_id", "date", "t", "var", "covar", "delta_covar_exact"});
    for (const auto& r : res.reports) {
        for (std::size_t t = 0; t < r.var_t.size(); ++t) {
            const std::size_t idx = r.start_index + t;
            series.row({std::to_string(r.window_id), data.dates[idx], std::to_string(idx), format_number(r.var_t[t]),
                        t < r.covar_t.size() ? format_number(r.covar_t[t]) : "",
                        t < r.delta_covar_t.size() ? format_number(r.delta_covar_t[t]) : ""});
        }
    }
    series.close();

    json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = provenance_json(prov);
    j["counts"] = {{"windows", fitted.size() + skipped.size()},
                   {"usable", usable},
                   {"failed", fitted.size() - usable},
                   {"skipped", skipped.size()}};
    j["windows"] = windows;
    j["skipped"] = skipped_json;
    write_text_file(fs::path(a.out) / "summary.json", dump(j));

    out << "windows: " << fitted.size() + skipped.size() << ", usable: " << usable << ", skipped: " << skipped.size()
        << '\n';
    out << "wrote " << (fs::path(a.out) / "report.csv").string() << '\n';
    if (usable == 0) throw ComputationError("every window failed");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string family = "clayton";
    std::optional<double> theta;
    std::optional<double> delta;
    double rho = 0.5;
    double nu = 4.0;
    std::size_t n = 2000;
    std::uint64_t seed = 1;
    std::string start_date = "2010-01-04";
    std::string output;
};

void add_synth(CLI::App& app, SynthArgs& a) {
    auto* sub = app.add_subcommand("synth", "Generate a synthetic return pair with AR-GARCH marginals");
    sub->add_option("--family", a.family, "Copula of the innovations")->capture_default_str();
    sub->add_option("--theta", a.theta, "Family parameter");
    sub->add_option("--delta", a.delta, "Gumbel parameter");
    sub->add_option("--rho", a.rho, "Student-t or Gaussian correlation")->capture_default_str();
    sub->add_option("--nu", a.nu, "Student-t degrees of freedom")->capture_default_str();
    sub->add_option("--n", a.n, "Number of business days")->capture_default_str();
    sub->add_option("--seed", a.seed, "Seed")->capture_default_str();
    sub->add_option("--start-date", a.start_date, "First date (YYYY-MM-DD)")->capture_default_str();
    sub->add_option("--output", a.output, "Output CSV path")->required();
}

// Marginal parameters of the synthetic pair.
marginal::ArGarchParams synth_params(bool system) {
    marginal::ArGarchParams p;
    p.mu = 3e-4;
    p.phi = system ? 0.03 : 0.05;
    p.beta0 = 2e-6;
    p.beta1 = 0.08;
    p.beta2 = 0.9;
    p.eta = system ? 7.0 : 6.0;
    p.lambda_skew = system ? -0.05 : -0.1;
    return p;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    validate_date(a.start_date, "--start-date");
    if (a.n < 2) throw UsageError("--n must be at least 2");
    const CopulaChoice choice = choose_copula(a.family, a.theta, a.delta, a.rho, a.nu);
    constexpr std::size_t burn = 500;
    const copula::UniformPairSample s = copula::sample(choice.spec, a.n + burn, a.seed);
    const marginal::ArGarchParams pi = synth_params(false);
    const marginal::ArGarchParams psys = synth_params(true);
    std::vector<double> zi(s.size());
    std::vector<double> zs(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) {
        zi[t] = marginal::skewt_quantile(s.u[t], pi.eta, pi.lambda_skew);
        zs[t] = marginal::skewt_quantile(s.v[t], psys.eta, psys.lambda_skew);
    }
    const std::vector<double> ri = marginal::ar_garch_from_innovations(pi, zi, burn);
    const std::vector<double> rs = marginal::ar_garch_from_innovations(psys, zs, burn);

    using namespace std::chrono;
    const int y = std::stoi(a.start_date.substr(0, 4));
    const unsigned m = static_cast<unsigned>(std::stoi(a.start_date.substr(5, 2)));
    const unsigned d = static_cast<unsigned>(std::stoi(a.start_date.substr(8, 2)));
    sys_days day{year_month_day{year{y}, month{m}, std::chrono::day{d}}};
    auto business = [](sys_days sd) {
        const weekday wd{sd};
        return wd != Saturday && wd != Sunday;
    };
    while (!business(day)) day += days{1};

    const Provenance prov{{"command", "synth"},
                          {"family", a.family},
                          {"copula", choice.spec.describe()},
                          {"n", std::to_string(a.n)},
                          {"seed", std::to_string(a.seed)},
                          {"start_date", a.start_date},
                          {"burn_in", std::to_string(burn)}};
    const fs::path path(a.output);
    if (path.has_parent_path()) ensure_directory(path.parent_path());
    CsvWriter csv(path, prov, {"date", "value_i", "value_s"});
    for (std::size_t t = 0; t < a.n; ++t) {
        const year_month_day ymd{day};
        std::ostringstream ds;
        ds << std::setfill('0') << std::setw(4) << static_cast<int>(ymd.year()) << '-' << std::setw(2)
           << static_cast<unsigned>(ymd.month()) << '-' << std::setw(2) << static_cast<unsigned>(ymd.day());
        csv.row({ds.str(), format_number(ri[t]), format_number(rs[t])});
        do day += days{1};
        while (!business(day));
    }
    csv.close();
    out << "wrote " << path.string() << '\n';
    return kExitOk;
}

// Removes --config FILE from the arguments and appends the file's entries as
// flags, skipping keys already given on the command line.
std::vector<std::string> apply_config(CLI::App& app, const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::optional<std::string> file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
            file = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (!file) return out;
    if (out.empty()) throw UsageError("--config must follow a subcommand");
    CLI::App* sub = app.get_subcommand_no_throw(out.front());
    if (sub == nullptr) throw UsageError("--config must follow a subcommand");

    std::ifstream in(*file);
    if (!in) throw IoError("cannot open config file '" + *file + "'");
    auto given = [&](const std::string& flag) {
        return std::any_of(out.begin() + 1, out.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    auto strip = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
        return s;
    };
    std::vector<std::string> extra;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = strip(line);
        if (t.empty() || t.front() == '#' || t.front() == ';' || t.front() == '[') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError(*file + ": line " + std::to_string(line_no) + ": expected key=value");
        std::string key = strip(t.substr(0, eq));
        const std::string value = strip(t.substr(eq + 1));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (opt == nullptr || key == "config")
            throw UsageError(*file + ": line " + std::to_string(line_no) + ": unknown key '" + key + "' for " +
                             sub->get_name());
        if (given(flag)) continue;
        if (opt->get_type_size() == 0) {
            if (value == "true" || value == "1") extra.push_back(flag);
            else if (value != "false" && value != "0")
                throw UsageError(*file + ": line " + std::to_string(line_no) + ": '" + key + "' takes true or false");
        } else {
            extra.push_back(flag);
            extra.push_back(value);
        }
    }
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Copula-based extreme-value CoVaR toolkit", "covar"};
    app.require_subcommand(1);
    LimitsArgs limits;
    SimulateArgs simulate;
    EstimateArgs estimate;
    AnalyzeArgs analyze;
    SynthArgs synth;
    add_limits(app, limits);
    add_simulate(app, simulate);
    add_estimate(app, estimate);
    add_analyze(app, analyze);
    add_synth(app, synth);
    for (CLI::App* sub : app.get_subcommands({}))
        sub->add_option("--config", "Flat key=value file mirroring the flags; flags override it");

    std::vector<std::string> expanded;
    try {
        expanded = apply_config(app, args);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitIo;
    }

    try {
        std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "limits") return cmd_limits(limits, out);
        if (name == "simulate") return cmd_simulate(simulate, out);
        if (name == "estimate") return cmd_estimate(estimate, out);
        if (name == "analyze") return cmd_analyze(analyze, out);
        if (name == "synth") return cmd_synth(synth, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const BranchBoundary& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "computation error: " << e.what() << '\n';
        return kExitComputation;
    }
    return kExitUsage;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace covar::cli
