#pragma once
/// \file cli.hpp
/// The `noonlab` command-line front end. Requires CLI11 and nlohmann/json.
///
/// Exit status: 0 success, 2 invalid arguments, 3 numerical failure,
/// 4 I/O failure. Diagnostics go to stderr; data goes to stdout or --out.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noonlab/analysis.hpp"
#include "noonlab/config.hpp"
#include "noonlab/detection.hpp"
#include "noonlab/errors.hpp"
#include "noonlab/fock.hpp"
#include "noonlab/noon.hpp"
#include "noonlab/optics.hpp"

namespace noonlab::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kSchemaVersion = 1;

class IoError : public Error
{
public:
    using Error::Error;
};

enum class Command
{
    fidelity,
    optimize_gamma,
    fringes,
    visibility,
    povm,
    bs_matrix,
};

inline std::string to_string(Command c)
{
    switch (c)
    {
    case Command::fidelity: return "fidelity";
    case Command::optimize_gamma: return "optimize-gamma";
    case Command::fringes: return "fringes";
    case Command::visibility: return "visibility";
    case Command::povm: return "povm";
    case Command::bs_matrix: return "bs-matrix";
    }
    return "?";
}

/// Built-in defaults; config files and flags override them in that order.
inline RunConfig defaults()
{
    return RunConfig({
        {"convention", "weak-pump"},
        {"cutoff", "0"},
        {"eta", "1"},
        {"format", "csv"},
        {"gamma", "opt"},
        {"modules", "4"},
        {"n-max", "5"},
        {"n-min", "2"},
        {"phi-cs", "3.141592653589793"},
        {"points", "120"},
        {"pulses", "0"},
        {"r", "0.1"},
        {"seed", "0"},
        {"t", "0.5"},
    });
}

/// Every key a config file may set.
inline const std::vector<std::string>& known_keys()
{
    static const std::vector<std::string> keys = {
        "convention", "cutoff", "eta", "format", "gamma", "input", "modules", "n", "n-max", "n-min",
        "n1", "n2", "out", "phi-cs", "points", "pulses", "r", "seed", "t", "weights",
    };
    return keys;
}

/// %.12g with negative zero folded to 0.
inline std::string fmt(double v)
{
    if (v == 0.0)
        v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace detail
{

struct CsvWriter
{
    std::ostringstream& os;

    void begin(const std::vector<std::string>& header)
    {
        os << "# schema=" << kSchemaVersion << "\n";
        row_strings(header);
    }
    void row_strings(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i)
            os << (i ? "," : "") << cells[i];
        os << "\n";
    }
    void row(const std::vector<double>& cells)
    {
        std::vector<std::string> s;
        s.reserve(cells.size());
        for (double c : cells)
            s.push_back(fmt(c));
        row_strings(s);
    }
};

inline nlohmann::ordered_json json_header(Command c)
{
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = to_string(c);
    return j;
}

inline bool want_json(const RunConfig& cfg)
{
    const auto f = cfg.get_string("format");
    if (f != "csv" && f != "json")
        throw InvalidArgument("format must be csv or json, got '" + f + "'");
    return f == "json";
}

inline fock::SourceSpec source_from(const RunConfig& cfg, int n_for_opt)
{
    fock::SourceSpec s;
    s.r = cfg.get_double("r");
    s.phi_cs = cfg.get_double("phi-cs");
    s.convention = fock::gamma_convention_from_string(cfg.get_string("convention"));
    s.cutoff = static_cast<int>(cfg.get_int("cutoff"));
    const auto g = cfg.get_string("gamma");
    if (g == "opt")
    {
        if (n_for_opt < 2)
            throw InvalidArgument("gamma=opt needs a total photon number of at least 2");
        s.gamma = noon::optimal_gamma(n_for_opt, s.r, s.phi_cs, s.convention).gamma_star;
    }
    else
        s.gamma = cfg.get_double("gamma");
    s.validate();
    return s;
}

inline int checked_int(const RunConfig& cfg, const std::string& key, long long lo, long long hi)
{
    const long long v = cfg.get_int(key);
    if (v < lo || v > hi)
        throw InvalidArgument("parameter '" + key + "' must lie in [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    return static_cast<int>(v);
}

inline void run_fidelity(const RunConfig& cfg, std::ostringstream& os)
{
    const int n_min = checked_int(cfg, "n-min", 0, 10000);
    const int n_max = checked_int(cfg, "n-max", n_min, 10000);
    noon::SweepOptions opts;
    opts.r = cfg.get_double("r");
    opts.phi_cs = cfg.get_double("phi-cs");
    opts.convention = fock::gamma_convention_from_string(cfg.get_string("convention"));
    const auto g = cfg.get_string("gamma");
    if (g == "opt")
        opts.mode = noon::GammaMode::per_n_optimal;
    else
    {
        opts.mode = noon::GammaMode::fixed;
        opts.fixed_gamma = cfg.get_double("gamma");
        if (!(opts.fixed_gamma > 0.0))
            throw InvalidArgument("gamma must be > 0");
    }
    const auto rows = noon::fidelity_sweep(n_min, n_max, opts);
    if (want_json(cfg))
    {
        auto j = json_header(Command::fidelity);
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& r : rows)
            j["rows"].push_back({{"N", r.n},
                                 {"gamma", r.gamma},
                                 {"weight", r.weight},
                                 {"fidelity_fixed", r.fidelity_fixed},
                                 {"fidelity_phase_opt", r.fidelity_phase_opt}});
        os << j.dump(2) << "\n";
        return;
    }
    CsvWriter w{os};
    w.begin({"N", "gamma", "weight", "fidelity_fixed", "fidelity_phase_opt"});
    for (const auto& r : rows)
        w.row({static_cast<double>(r.n), r.gamma, r.weight, r.fidelity_fixed, r.fidelity_phase_opt});
}

inline void run_optimize_gamma(const RunConfig& cfg, std::ostringstream& os)
{
    const int n = checked_int(cfg, "n", 2, 10000);
    const auto opt = noon::optimal_gamma(n, cfg.get_double("r"), cfg.get_double("phi-cs"),
                                         fock::gamma_convention_from_string(cfg.get_string("convention")));
    auto j = json_header(Command::optimize_gamma);
    j["n"] = n;
    j["gamma_star"] = opt.gamma_star;
    j["fidelity_star"] = opt.fidelity_star;
    j["iterations"] = opt.iterations;
    os << j.dump(2) << "\n";
}

inline void run_fringes(const RunConfig& cfg, std::ostringstream& os)
{
    detection::ClickPattern pat{checked_int(cfg, "n1", 0, 1000), checked_int(cfg, "n2", 0, 1000)};
    detection::DetectorSpec det{checked_int(cfg, "modules", 1, 4096), cfg.get_double("eta")};
    det.validate();
    const int points = checked_int(cfg, "points", 1, 1000000);
    const long long pulses = cfg.get_int("pulses");
    if (pulses < 0)
        throw InvalidArgument("pulses must be >= 0");
    const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    const auto source = source_from(cfg, pat.total());
    optics::BeamsplitterSpec bs{cfg.get_double("t")};
    bs.validate();
    detection::validate_pattern(pat, det, det);

    const auto phases = detection::uniform_phases(points);
    const auto dists = detection::click_scan(source, bs, det, det, phases, pat.total(),
                                             fock::TruncationPolicy::strict());
    const auto curve = detection::pattern_curve(dists, phases, pat);
    std::vector<double> counts;
    if (pulses > 0)
        counts = detection::sample_clicks(dists, pulses, seed).pattern_counts(pat);

    if (want_json(cfg))
    {
        auto j = json_header(Command::fringes);
        j["n1"] = pat.n1;
        j["n2"] = pat.n2;
        j["gamma"] = source.gamma;
        j["r"] = source.r;
        j["phi_cs"] = source.phi_cs;
        j["eta"] = det.eta;
        j["modules"] = det.modules;
        j["phase_rad"] = curve.phases;
        j["rate"] = curve.rates;
        if (pulses > 0)
        {
            std::vector<double> sigma;
            for (double c : counts)
                sigma.push_back(std::sqrt(c));
            j["pulses"] = pulses;
            j["seed"] = seed;
            j["sampled_count"] = counts;
            j["sigma"] = sigma;
        }
        os << j.dump(2) << "\n";
        return;
    }
    CsvWriter w{os};
    if (pulses > 0)
        w.begin({"phase_rad", "rate", "sampled_count", "sigma"});
    else
        w.begin({"phase_rad", "rate"});
    for (std::size_t i = 0; i < phases.size(); ++i)
    {
        if (pulses > 0)
            w.row({curve.phases[i], curve.rates[i], counts[i], std::sqrt(counts[i])});
        else
            w.row({curve.phases[i], curve.rates[i]});
    }
}

struct CurveTable
{
    std::vector<double> phases, rates, counts;
};

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
    {
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r'))
            cell.pop_back();
        while (!cell.empty() && cell.front() == ' ')
            cell.erase(cell.begin());
        cells.push_back(cell);
    }
    return cells;
}

inline CurveTable read_curve(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open input file '" + path + "'");
    CurveTable t;
    std::string line;
    int col_phase = -1, col_rate = -1, col_count = -1;
    bool header = false;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        const auto cells = split_csv(line);
        if (!header)
        {
            for (int i = 0; i < static_cast<int>(cells.size()); ++i)
            {
                if (cells[i] == "phase_rad")
                    col_phase = i;
                else if (cells[i] == "rate")
                    col_rate = i;
                else if (cells[i] == "sampled_count")
                    col_count = i;
            }
            if (col_phase < 0 || (col_rate < 0 && col_count < 0))
                throw InvalidArgument(path + ": header must name phase_rad and rate or sampled_count");
            header = true;
            continue;
        }
        auto cell = [&](int c) {
            if (c >= static_cast<int>(cells.size()))
                throw InvalidArgument(path + ":" + std::to_string(lineno) + ": missing column");
            RunConfig tmp;
            tmp.set("value", cells[c]);
            return tmp.get_double("value");
        };
        t.phases.push_back(cell(col_phase));
        if (col_rate >= 0)
            t.rates.push_back(cell(col_rate));
        if (col_count >= 0)
            t.counts.push_back(cell(col_count));
    }
    if (in.bad())
        throw IoError("error while reading '" + path + "'");
    if (!header)
        throw InvalidArgument(path + ": no header row");
    return t;
}

inline void run_visibility(const RunConfig& cfg, std::ostringstream& os)
{
    const int n = checked_int(cfg, "n", 1, 10000);
    const auto table = read_curve(cfg.get_string("input"));
    std::string weights = cfg.has("weights") ? cfg.get_string("weights")
                                             : (table.counts.empty() ? "uniform" : "poisson");
    analysis::TrigFit fit;
    if (weights == "poisson")
    {
        if (table.counts.empty())
            throw InvalidArgument("poisson weights need a sampled_count column");
        fit = analysis::fit_trig(table.phases, table.counts, analysis::poisson_weights(table.counts), n,
                                 analysis::ErrorModel::inverse_variance);
    }
    else if (weights == "uniform")
    {
        const auto& y = table.rates.empty() ? table.counts : table.rates;
        fit = analysis::fit_trig(table.phases, y, analysis::uniform_weights(y.size()), n,
                                 analysis::ErrorModel::residual_scaled);
    }
    else
        throw InvalidArgument("weights must be poisson or uniform, got '" + weights + "'");

    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["n"] = n;
    j["V"] = fit.visibility;
    j["sigma_V"] = fit.sigma_visibility;
    j["c0"] = fit.c0;
    j["a"] = fit.a;
    j["b"] = fit.b;
    j["residual_rms"] = fit.residual_rms;
    j["weights"] = weights;
    os << j.dump(2) << "\n";
}

inline void run_povm(const RunConfig& cfg, std::ostringstream& os)
{
    detection::DetectorSpec det{checked_int(cfg, "modules", 1, 4096), cfg.get_double("eta")};
    const int n_max = checked_int(cfg, "n-max", 0, 100000);
    const auto p = detection::multiplex_povm(det, n_max);
    if (want_json(cfg))
    {
        auto j = json_header(Command::povm);
        j["modules"] = det.modules;
        j["eta"] = det.eta;
        j["p"] = nlohmann::ordered_json::array();
        for (int n = 0; n <= n_max; ++n)
        {
            std::vector<double> row(p.cols());
            for (Eigen::Index k = 0; k < p.cols(); ++k)
                row[k] = p(n, k);
            j["p"].push_back(row);
        }
        os << j.dump(2) << "\n";
        return;
    }
    CsvWriter w{os};
    std::vector<std::string> header{"n"};
    for (int k = 0; k <= det.modules; ++k)
        header.push_back("p_k" + std::to_string(k));
    w.begin(header);
    for (int n = 0; n <= n_max; ++n)
    {
        std::vector<double> row{static_cast<double>(n)};
        for (Eigen::Index k = 0; k < p.cols(); ++k)
            row.push_back(p(n, k));
        w.row(row);
    }
}

inline void run_bs_matrix(const RunConfig& cfg, std::ostringstream& os)
{
    const int n = checked_int(cfg, "n", 0, 100000);
    const auto block = optics::bs_block(n, optics::BeamsplitterSpec{cfg.get_double("t")});
    CsvWriter w{os};
    std::vector<std::string> header{"k"};
    for (int j = 0; j <= n; ++j)
    {
        header.push_back("re_" + std::to_string(j));
        header.push_back("im_" + std::to_string(j));
    }
    w.begin(header);
    for (int k = 0; k <= n; ++k)
    {
        std::vector<double> row{static_cast<double>(k)};
        for (int j = 0; j <= n; ++j)
        {
            row.push_back(block.matrix(k, j).real());
            row.push_back(block.matrix(k, j).imag());
        }
        w.row(row);
    }
}

} // namespace detail

/// Runs one command against a fully merged config and writes the artifact to
/// `out` (or to the `out` path when set). Never throws.
inline int run(Command command, const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    try
    {
        std::ostringstream os;
        switch (command)
        {
        case Command::fidelity: detail::run_fidelity(cfg, os); break;
        case Command::optimize_gamma: detail::run_optimize_gamma(cfg, os); break;
        case Command::fringes: detail::run_fringes(cfg, os); break;
        case Command::visibility: detail::run_visibility(cfg, os); break;
        case Command::povm: detail::run_povm(cfg, os); break;
        case Command::bs_matrix: detail::run_bs_matrix(cfg, os); break;
        }
        if (cfg.has("out") && !cfg.get_string("out").empty() && cfg.get_string("out") != "-")
        {
            const auto path = cfg.get_string("out");
            std::ofstream f(path, std::ios::binary);
            if (!f)
                throw IoError("cannot open output file '" + path + "'");
            f << os.str();
            f.flush();
            if (!f)
                throw IoError("failed writing '" + path + "'");
        }
        else
            out << os.str() << std::flush;
        return kExitOk;
    }
    catch (const InvalidArgument& e)
    {
        err << "noonlab " << to_string(command) << ": invalid argument: " << e.what() << "\n";
        return kExitInvalid;
    }
    catch (const NumericalError& e)
    {
        err << "noonlab " << to_string(command) << ": numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    catch (const IoError& e)
    {
        err << "noonlab " << to_string(command) << ": I/O failure: " << e.what() << "\n";
        return kExitIo;
    }
    catch (const std::exception& e)
    {
        err << "noonlab " << to_string(command) << ": error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

inline RunConfig load_config_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    auto cfg = RunConfig::parse(ss.str());
    const auto& keys = known_keys();
    for (const auto& [k, v] : cfg.values())
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw InvalidArgument("config file '" + path + "': unknown key '" + k + "'");
    return cfg;
}

/// Parses argv, merges defaults < config file < flags, and runs the command.
inline int main_entry(std::vector<std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"noonlab: path-entangled state generation from coherent light and squeezed vacuum"};
    app.require_subcommand(1);

    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> flags;
    std::string config_path;
    auto* config_opt = app.add_option("--config", config_path, "flat key = value config file");

    auto add = [&](CLI::App* sub, const std::string& key, const std::string& help) {
        auto* opt = sub->add_option("--" + key, raw[sub->get_name() + "/" + key], help);
        flags[sub->get_name() + "/" + key] = opt;
    };
    auto add_common = [&](CLI::App* sub) {
        add(sub, "out", "write output to this path instead of stdout");
        add(sub, "format", "csv or json");
    };
    auto add_source = [&](CLI::App* sub) {
        add(sub, "gamma", "pair-amplitude ratio, or 'opt' for the per-N optimum");
        add(sub, "r", "squeeze parameter");
        add(sub, "phi-cs", "coherent-state phase [rad]");
        add(sub, "convention", "gamma convention: weak-pump (|alpha|^2 = gamma tanh r) or linear (gamma r)");
    };

    std::map<std::string, Command> commands;
    auto* fid = app.add_subcommand("fidelity", "NOON fidelity of each N-photon component");
    add(fid, "n-min", "smallest N");
    add(fid, "n-max", "largest N");
    add_source(fid);
    add_common(fid);
    commands["fidelity"] = Command::fidelity;

    auto* opt = app.add_subcommand("optimize-gamma", "gamma maximizing the N-photon NOON fidelity");
    add(opt, "n", "total photon number N");
    add(opt, "r", "squeeze parameter");
    add(opt, "phi-cs", "coherent-state phase [rad]");
    add(opt, "convention", "gamma convention");
    add_common(opt);
    commands["optimize-gamma"] = Command::optimize_gamma;

    auto* fr = app.add_subcommand("fringes", "coincidence rate of a click pattern versus MZ phase");
    add(fr, "n1", "clicks in detector 1");
    add(fr, "n2", "clicks in detector 2");
    add_source(fr);
    add(fr, "eta", "overall transmission");
    add(fr, "modules", "click modules per detector");
    add(fr, "points", "phase grid points over [0, 2pi)");
    add(fr, "pulses", "Monte Carlo pulses per phase point (0 = none)");
    add(fr, "seed", "sampling seed");
    add(fr, "cutoff", "per-mode photon cutoff (0 = automatic)");
    add(fr, "t", "beamsplitter transmissivity");
    add_common(fr);
    commands["fringes"] = Command::fringes;

    auto* vis = app.add_subcommand("visibility", "weighted trigonometric fit of a fringe CSV");
    add(vis, "input", "fringe CSV (phase_rad, rate[, sampled_count])");
    add(vis, "n", "highest fitted frequency N");
    add(vis, "weights", "poisson or uniform");
    add_common(vis);
    commands["visibility"] = Command::visibility;

    auto* pv = app.add_subcommand("povm", "click probabilities P(k | n) of a multiplexed detector");
    add(pv, "modules", "click modules");
    add(pv, "eta", "overall transmission");
    add(pv, "n-max", "largest photon number");
    add_common(pv);
    commands["povm"] = Command::povm;

    auto* bsm = app.add_subcommand("bs-matrix", "Fock-basis beamsplitter block for N photons");
    add(bsm, "n", "total photon number N");
    add(bsm, "t", "transmissivity");
    add(bsm, "out", "write output to this path instead of stdout");
    commands["bs-matrix"] = Command::bs_matrix;

    for (auto* sub : app.get_subcommands({}))
        sub->fallthrough();

    try
    {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return kExitOk;
    }
    catch (const CLI::CallForAllHelp&)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    }
    catch (const CLI::ParseError& e)
    {
        err << "noonlab: " << e.what() << "\n";
        return kExitInvalid;
    }

    const auto* chosen = app.get_subcommands().front();
    const Command command = commands.at(chosen->get_name());
    RunConfig cfg = defaults();
    if (config_opt->count() > 0)
    {
        try
        {
            cfg.overlay(load_config_file(config_path));
        }
        catch (const IoError& e)
        {
            err << "noonlab: " << e.what() << "\n";
            return kExitIo;
        }
        catch (const Error& e)
        {
            err << "noonlab: " << e.what() << "\n";
            return kExitInvalid;
        }
    }
    const std::string prefix = chosen->get_name() + "/";
    for (const auto& [name, option] : flags)
        if (name.rfind(prefix, 0) == 0 && option->count() > 0)
            cfg.set(name.substr(prefix.size()), raw[name]);
    return run(command, cfg, out, err);
}

} // namespace noonlab::cli
