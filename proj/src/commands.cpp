#include "thermalize/commands.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <vector>

#include "thermalize/output.hpp"
#include "thermalize/rng.hpp"
#include "thermalize/thermo.hpp"
#include "thermalize/typicality.hpp"

namespace thermalize {

using nlohmann::json;

namespace {

int map_exception(std::ostream& log, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const CapExceeded& e) {
        log << "cap exceeded: " << e.what() << "\n";
        return kExitCapExceeded;
    } catch (const EmptyShell& e) {
        log << "empty shell: " << e.what() << "\n";
        return kExitDegeneratePhysics;
    } catch (const DegenerateFit& e) {
        log << "degenerate fit: " << e.what() << "\n";
        return kExitDegeneratePhysics;
    } catch (const DegenerateGap& e) {
        log << "degenerate gap: " << e.what() << "\n";
        return kExitDegeneratePhysics;
    } catch (const NonPositiveEnergy& e) {
        log << "degenerate physics: " << e.what() << "\n";
        return kExitDegeneratePhysics;
    } catch (const NonPositiveDenominator& e) {
        log << "degenerate physics: " << e.what() << "\n";
        return kExitDegeneratePhysics;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

json metadata_json(const ExperimentConfig& config, const char* command) {
    json m;
    m["command"] = command;
    m["config_hash"] = config_hash(config);
    m["seed"] = config.run.seed;
    m["version"] = kVersion;
    return m;
}

void emit(const ExperimentConfig& config, const std::string& csv, const json& full,
          std::ostream& log) {
    std::string text;
    if (config.output.format == "json")
        text = full.dump(2) + "\n";
    else
        text = csv;
    if (config.output.path.empty())
        log << text;
    else
        write_file(config.output.path, text);
}

const SystemConfig& need_system(const ExperimentConfig& c) {
    if (!c.system) throw ConfigError("this command requires a \"system\" section");
    return *c.system;
}

const BathConfig& need_bath(const ExperimentConfig& c) {
    if (!c.bath) throw ConfigError("this command requires a \"bath\" section");
    return *c.bath;
}

const ShellConfig& need_shell(const ExperimentConfig& c) {
    if (!c.shell) throw ConfigError("this command requires a \"shell\" section");
    return *c.shell;
}

PnOptions pn_options(const RunConfig& run) {
    PnOptions opt;
    opt.cut = run.level_cut;
    opt.max_level = run.max_level;
    return opt;
}

// table1 sweeps kappa directly; an uncoupled baseline gets a uniform profile
// before the rescale.
BathSpec bath_for_kappa(const BathSpec& base, double kappa) {
    if (kappa == 0.0 || base.kappa() > 0.0) return base.with_kappa(kappa);
    BathSpec uniform = base;
    for (double& g : uniform.strengths) g = 1.0;
    return uniform.with_kappa(kappa);
}

std::string count_table_csv(const CountTable& table) {
    std::ostringstream csv;
    csv << "n,epsilon_n,epsilon_n_kappa,omega_exact,omega_analytic_log,"
           "p_exact,p_analytic,ln_p_exact,ln_p_analytic\n";
    for (const CountRecord& rec : table.rows) {
        csv << rec.level << ',' << format_double(rec.epsilon) << ','
            << format_double(rec.epsilon_deformed) << ',';
        if (rec.exact) csv << rec.exact->get_str();
        csv << ',';
        if (!std::isnan(rec.log_omega_analytic)) csv << format_double(rec.log_omega_analytic);
        csv << ',';
        if (rec.p_exact) csv << format_double(*rec.p_exact);
        csv << ',';
        if (!std::isnan(rec.p_analytic)) csv << format_double(rec.p_analytic);
        csv << ',';
        if (rec.p_exact && *rec.p_exact > 0.0) csv << format_double(std::log(*rec.p_exact));
        csv << ',';
        if (!std::isnan(rec.p_analytic) && rec.p_analytic > 0.0)
            csv << format_double(std::log(rec.p_analytic));
        csv << '\n';
    }
    return csv.str();
}

json count_table_json(const CountTable& table) {
    json rows = json::array();
    for (const CountRecord& rec : table.rows) {
        json r;
        r["n"] = rec.level;
        r["epsilon_n"] = rec.epsilon;
        r["epsilon_n_kappa"] = rec.epsilon_deformed;
        if (rec.exact) r["omega_exact"] = rec.exact->get_str();
        if (!std::isnan(rec.log_omega_analytic)) r["omega_analytic_log"] = rec.log_omega_analytic;
        if (rec.p_exact) r["p_exact"] = *rec.p_exact;
        if (!std::isnan(rec.p_analytic)) r["p_analytic"] = rec.p_analytic;
        rows.push_back(std::move(r));
    }
    json t;
    t["rows"] = std::move(rows);
    t["E"] = table.energy;
    t["delta"] = table.thickness;
    t["kappa"] = table.kappa;
    t["N"] = table.bath_modes;
    t["M_effective"] = table.levels_included;
    t["mode"] = table.mode == CountMode::exact ? "exact" : "analytic";
    if (table.total_exact) t["omega_total_exact"] = table.total_exact->get_str();
    if (!std::isnan(table.log_total_analytic))
        t["omega_total_analytic_log"] = table.log_total_analytic;
    return t;
}

}  // namespace

ExperimentConfig apply_overrides(ExperimentConfig config, const CliOverrides& overrides) {
    if (overrides.fit_window) config.run.fit_window = *overrides.fit_window;
    if (overrides.seed) config.run.seed = *overrides.seed;
    if (overrides.out_path) config.output.path = *overrides.out_path;
    return config;
}

int cmd_count(const ExperimentConfig& config, std::ostream& log) {
    return map_exception(log, [&] {
        const SystemSpec system = build_system(need_system(config));
        const BathSpec bath = build_bath(need_bath(config));
        const ShellWindow shell = build_shell(need_shell(config));
        const CountTable table = pn_counting(system, bath, shell, bath.kappa(),
                                             config.run.mode, pn_options(config.run));

        json full;
        full["metadata"] = metadata_json(config, "count");
        full["table"] = count_table_json(table);
        emit(config, count_table_csv(table), full, log);
        return kExitOk;
    });
}

int cmd_table1(const ExperimentConfig& config, std::ostream& log) {
    return map_exception(log, [&] {
        if (config.run.kappa_list.empty())
            throw ConfigError("table1 requires run.kappa_list");
        const SystemSpec system = build_system(need_system(config));
        const BathSpec base_bath = build_bath(need_bath(config));
        const ShellWindow shell = build_shell(need_shell(config));
        const auto [lo, hi] = config.run.fit_window;
        const double beta_theory =
            (static_cast<double>(base_bath.modes()) - 1.0) / shell.energy;

        std::ostringstream csv;
        csv << "kappa,beta_fit,intercept,r_squared,beta_theory\n";
        json rows = json::array();
        std::vector<double> betas;
        for (double kappa : config.run.kappa_list) {
            const BathSpec bath = bath_for_kappa(base_bath, kappa);
            const CountTable table = pn_counting(system, bath, shell, kappa,
                                                 config.run.mode, pn_options(config.run));
            const GibbsFit fit = fit_beta(table, lo, hi, FitAbscissa::deformed);
            betas.push_back(fit.beta);
            csv << format_double(kappa) << ',' << format_double(fit.beta) << ','
                << format_double(fit.intercept) << ',' << format_double(fit.r_squared)
                << ',' << format_double(beta_theory) << '\n';
            json r;
            r["kappa"] = kappa;
            r["beta_fit"] = fit.beta;
            r["intercept"] = fit.intercept;
            r["r_squared"] = fit.r_squared;
            r["beta_theory"] = beta_theory;
            rows.push_back(std::move(r));
        }
        for (std::size_t i = 1; i < betas.size(); ++i)
            if (!(betas[i] < betas[i - 1]))
                throw DegenerateFit("fitted beta is not strictly decreasing in kappa");

        json full;
        full["metadata"] = metadata_json(config, "table1");
        full["metadata"]["fit_window"] = json::array({lo, hi});
        full["metadata"]["fit_abscissa"] = "deformed";
        full["rows"] = std::move(rows);
        emit(config, csv.str(), full, log);
        return kExitOk;
    });
}

int cmd_deform_map(const ExperimentConfig& config, std::ostream& log) {
    return map_exception(log, [&] {
        const SystemSpec system = build_system(need_system(config));
        const BathSpec bath = build_bath(need_bath(config));
        const ShellWindow shell = build_shell(need_shell(config));
        const double kappa = bath.kappa();

        std::ostringstream csv;
        csv << "kappa,n,bath_lo,bath_hi\n";
        json rows = json::array();
        for (double k : {0.0, kappa}) {
            for (const DeformationBand& band : deformation_map(system, shell, k)) {
                csv << format_double(k) << ',' << band.level << ','
                    << format_double(band.bath_lo) << ',' << format_double(band.bath_hi)
                    << '\n';
                json r;
                r["kappa"] = k;
                r["n"] = band.level;
                r["bath_lo"] = band.bath_lo;
                r["bath_hi"] = band.bath_hi;
                rows.push_back(std::move(r));
            }
        }
        json full;
        full["metadata"] = metadata_json(config, "deform-map");
        full["rows"] = std::move(rows);
        emit(config, csv.str(), full, log);
        return kExitOk;
    });
}

int cmd_sample(const ExperimentConfig& config, std::ostream& log) {
    return map_exception(log, [&] {
        const SystemSpec system = build_system(need_system(config));
        const BathSpec bath = build_bath(need_bath(config));
        const ShellWindow shell = build_shell(need_shell(config));
        const double kappa = bath.kappa();
        const PnOptions options = pn_options(config.run);

        std::vector<std::uint64_t> seeds(static_cast<std::size_t>(config.run.samples));
        for (std::size_t i = 0; i < seeds.size(); ++i)
            seeds[i] = stream_seed(config.run.seed, i);

        const TypicalityReport report = pn_typicality_check(
            system, bath, shell, kappa, seeds, config.run.cap, options);

        const bool dump_rho = system.size() <= 8;
        std::ostringstream csv;
        csv << "seed_index,seed,p_deviation_max,f_abs_max\n";
        json rows = json::array();
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const UniverseState state = sample_universe_state(
                system, bath, shell, kappa, seeds[i], config.run.cap, options);
            const ReducedDensityMatrix rho =
                reduce_density_matrix(state, system, bath, kappa);
            double f_abs_max = 0.0;
            for (int n = 0; n < rho.dim(); ++n)
                for (int m = n + 1; m < rho.dim(); ++m)
                    f_abs_max = std::max(f_abs_max, std::abs(rho.f(n, m)));
            csv << i << ',' << seeds[i] << ','
                << format_double(report.deviations[i]) << ','
                << format_double(f_abs_max) << '\n';
            json r;
            r["seed_index"] = i;
            r["seed"] = seeds[i];
            r["p_deviation_max"] = report.deviations[i];
            r["f_abs_max"] = f_abs_max;
            if (dump_rho) {
                json mat = json::array();
                for (int n = 0; n < rho.dim(); ++n)
                    for (int m = 0; m < rho.dim(); ++m)
                        mat.push_back(json::array(
                            {rho.f(n, m).real(), rho.f(n, m).imag()}));
                r["rho"] = std::move(mat);
            }
            rows.push_back(std::move(r));
        }

        json full;
        full["metadata"] = metadata_json(config, "sample");
        full["metadata"]["shell_dimension"] = report.shell_dimension;
        full["median_deviation"] = report.median_deviation;
        full["levels"] = report.levels;
        full["reference_p"] = report.reference_p;
        full["rows"] = std::move(rows);
        emit(config, csv.str(), full, log);
        return kExitOk;
    });
}

int cmd_two_level(const ExperimentConfig& config, std::ostream& log) {
    return map_exception(log, [&] {
        if (!config.two_level)
            throw ConfigError("this command requires a \"two_level\" section");
        const TwoLevelConfig& tl = *config.two_level;
        if (!(tl.gap > 0.0)) throw ConfigError("two_level.delta must be positive");

        // Validate the whole grid up front so a bad row cannot leave a
        // partial output file.
        const double pp = 1.0 / (1.0 + std::exp(tl.beta * tl.gap));
        const double pm = 1.0 - pp;
        for (double f : tl.f_grid)
            if (f * f > pp * pm)
                throw ConfigError("two_level.f_grid entry " + format_double(f) +
                                  " violates |F|^2 <= p_+ p_-");

        std::ostringstream csv;
        csv << "f,p_plus_exact,p_minus_exact,s_vn_exact,beta_eff_exact,"
               "p_plus_approx,p_minus_approx,s_vn_approx,beta_eff_approx,s_gibbs\n";
        json rows = json::array();
        for (double f : tl.f_grid) {
            const TwoLevelState state(tl.beta, tl.gap, f);
            const TwoLevelSolution ex = two_level_exact(state);
            const TwoLevelApprox ap = two_level_approx(state);
            csv << format_double(f) << ',' << format_double(ex.p_plus) << ','
                << format_double(ex.p_minus) << ',' << format_double(ex.entropy) << ','
                << format_double(ex.beta_eff) << ',' << format_double(ap.p_plus) << ','
                << format_double(ap.p_minus) << ',' << format_double(ap.entropy) << ','
                << format_double(ap.beta_eff) << ',' << format_double(ap.gibbs_entropy)
                << '\n';
            json r;
            r["f"] = f;
            r["exact"] = {{"p_plus", ex.p_plus},
                          {"p_minus", ex.p_minus},
                          {"s_vn", ex.entropy},
                          {"beta_eff", ex.beta_eff}};
            r["approx"] = {{"p_plus", ap.p_plus},
                           {"p_minus", ap.p_minus},
                           {"s_vn", ap.entropy},
                           {"beta_eff", ap.beta_eff},
                           {"s_gibbs", ap.gibbs_entropy}};
            rows.push_back(std::move(r));
        }
        json full;
        full["metadata"] = metadata_json(config, "two-level");
        full["metadata"]["beta"] = tl.beta;
        full["metadata"]["delta"] = tl.gap;
        full["rows"] = std::move(rows);
        emit(config, csv.str(), full, log);
        return kExitOk;
    });
}

namespace {

std::pair<int, int> parse_fit_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("--fit-window expects the form lo:hi");
    try {
        const int lo = std::stoi(text.substr(0, colon));
        const int hi = std::stoi(text.substr(colon + 1));
        if (hi < lo) throw ConfigError("--fit-window needs lo <= hi");
        return {lo, hi};
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("--fit-window expects integers lo:hi");
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"kinematic quantum thermalization toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string fit_window_text;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_given = false;

    struct Sub {
        CLI::App* app;
        int (*fn)(const ExperimentConfig&, std::ostream&);
    };
    std::vector<Sub> subs;
    const auto add = [&](const char* name, const char* help,
                         int (*fn)(const ExperimentConfig&, std::ostream&)) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--fit-window", fit_window_text, "override run.fit_window as lo:hi");
        sub->add_option("--out", out_path, "override output.path");
        sub->add_option("--seed", seed, "override run.seed")
            ->each([&](const std::string&) { seed_given = true; });
        subs.push_back({sub, fn});
    };
    add("count", "per-level microstate counts and P_n", cmd_count);
    add("table1", "Gibbs fits of P_n over a list of couplings", cmd_table1);
    add("deform-map", "bath-energy bands of the deformed shell", cmd_deform_map);
    add("sample", "random-state typicality report", cmd_sample);
    add("two-level", "exact vs small-F quasi-thermal sweep", cmd_two_level);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitConfigError;
    }

    return map_exception(err, [&]() -> int {
        CliOverrides overrides;
        if (!fit_window_text.empty()) overrides.fit_window = parse_fit_window(fit_window_text);
        if (!out_path.empty()) overrides.out_path = out_path;
        if (seed_given) overrides.seed = seed;
        const ExperimentConfig config =
            apply_overrides(parse_config_file(config_path), overrides);
        for (const Sub& sub : subs)
            if (sub.app->parsed()) return sub.fn(config, out);
        err << "no command selected\n";
        return kExitConfigError;
    });
}

}  // namespace thermalize
