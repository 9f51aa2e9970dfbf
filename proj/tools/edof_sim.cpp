// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "edofsim/kernels.hpp"
#include "edofsim/scenarios.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace edofsim;

namespace
{
    struct Overrides
    {
        std::string out;
        int cells = 0;
        std::string solver;
        std::string krylov;
        double tol = 0.0;
        std::string metal;
        unsigned threads = 0;
        std::vector<std::string> sets;
    };

    void add_overrides(CLI::App *cmd, Overrides &o)
    {
        cmd->add_option("--cells-per-wavelength", o.cells, "Lattice resolution (cells per wavelength)")->check(CLI::Range(4, 1000));
        cmd->add_option("--solver", o.solver, "Solver: auto | dense | cgfft")
            ->check(CLI::IsMember({"auto", "dense", "cgfft"}));
        cmd->add_option("--krylov", o.krylov, "Iterative method: cgnr | bicgstab")
            ->check(CLI::IsMember({"cgnr", "bicgstab"}));
        cmd->add_option("--tol", o.tol, "Relative residual tolerance")->check(CLI::PositiveNumber);
        cmd->add_option("--metal", o.metal, "Metal permittivity: full | surrogate")
            ->check(CLI::IsMember({"full", "surrogate"}));
        cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--set", o.sets, "Override a scene/array parameter, e.g. --set S=0.5");
    }

    ScenarioConfig load(const std::string &arg)
    {
        const auto names = builtin_config_names();
        if (std::find(names.begin(), names.end(), arg) != names.end() && !std::filesystem::exists(arg))
            return builtin_config(arg);
        return load_config(arg);
    }

    void apply(ScenarioConfig &cfg, const Overrides &o)
    {
        if (!o.out.empty())
            cfg.output_dir = o.out;
        if (o.cells > 0)
            cfg.cells_per_lambda0 = o.cells;
        if (o.solver == "auto")
            cfg.solver.method = SolverMethod::Auto;
        else if (o.solver == "dense")
            cfg.solver.method = SolverMethod::DenseDirect;
        else if (o.solver == "cgfft")
            cfg.solver.method = SolverMethod::IterativeFft;
        if (o.krylov == "cgnr")
            cfg.solver.krylov = KrylovMethod::Cgnr;
        else if (o.krylov == "bicgstab")
            cfg.solver.krylov = KrylovMethod::BiCgStab;
        if (o.tol > 0.0)
            cfg.solver.tolerance = o.tol;
        if (o.metal == "full")
            cfg.metal = MetalContrast::Full;
        else if (o.metal == "surrogate")
            cfg.metal = MetalContrast::Surrogate;
        if (o.threads > 0)
            cfg.threads = o.threads;
        for (const auto &s : o.sets)
        {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--set expects key=value, got '" + s + "'");
            const std::string key = s.substr(0, eq);
            if (!cfg.params.contains(key))
                throw ConfigError("--set: '" + key + "' is not a parameter of preset '" + cfg.preset + "'");
            cfg.params[key] = std::stod(s.substr(eq + 1));
            std::erase_if(cfg.sweep, [&](const SweepAxis &a) { return a.parameter == key; });
        }
        validate(cfg);
    }

    std::vector<double> parse_window(const std::string &s)
    {
        std::vector<double> v;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ','))
            v.push_back(std::stod(item));
        if (v.size() != 4)
            throw ConfigError("--window expects x0,y0,x1,y1");
        return v;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"edof-sim: full-wave MIMO channel and EDOF simulator for 2-D scenes"};
    app.require_subcommand(1);

    Overrides run_o;
    std::string run_config;
    bool quiet = false;
    auto *run = app.add_subcommand("run", "Run a scenario sweep and write CSV outputs");
    run->add_option("config", run_config, "Config file or built-in name (fig3b, fig5b, fig7b)")->required();
    run->add_option("--out", run_o.out, "Output directory");
    run->add_flag("--quiet", quiet, "Suppress per-point progress");
    add_overrides(run, run_o);

    Overrides map_o;
    std::string map_config, window, map_out;
    std::size_t source = 0;
    double step = 0.05;
    bool normalize = false;
    auto *fieldmap = app.add_subcommand("fieldmap", "Sample |E_z| for one transmit element");
    fieldmap->add_option("config", map_config, "Config file or built-in name")->required();
    fieldmap->add_option("--source", source, "Transmit element index (0-based)")->required();
    fieldmap->add_option("--window", window, "Sampling window x0,y0,x1,y1; omitted = receiving line");
    fieldmap->add_option("--step", step, "Sample spacing in wavelengths")->check(CLI::PositiveNumber);
    fieldmap->add_flag("--normalize", normalize, "Scale to unit peak |E_z|");
    fieldmap->add_option("--out", map_out, "Output CSV file (default: stdout)");
    add_overrides(fieldmap, map_o);

    std::string show;
    auto *presets = app.add_subcommand("presets", "List built-in scenarios and scene presets");
    presets->add_option("--show", show, "Print the full config of a built-in scenario");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*presets)
        {
            if (!show.empty())
            {
                write_config(std::cout, builtin_config(show));
                return 0;
            }
            std::cout << "built-in scenarios:\n";
            for (const auto &n : builtin_config_names())
                std::cout << "  " << n << "  " << builtin_config_description(n) << "\n";
            std::cout << "scene presets:\n";
            for (const auto &n : preset_names())
            {
                std::cout << "  " << n << " :";
                for (const auto &[k, v] : preset_defaults(n))
                    std::cout << " " << k << "=" << v;
                std::cout << "\n";
            }
            std::cout << "kernels: " << kernels::isa_name(kernels::active_isa()) << "\n";
            return 0;
        }

        if (*run)
        {
            ScenarioConfig cfg = load(run_config);
            apply(cfg, run_o);
            RunOptions opt;
            opt.log = quiet ? nullptr : &std::cerr;
            const ScenarioResult res = run_scenario(cfg, opt);
            std::cerr << "wrote " << (cfg.output_dir / "sweep.csv").string() << "\n";
            return res.all_ok() ? 0 : 1;
        }

        if (*fieldmap)
        {
            ScenarioConfig cfg = load(map_config);
            apply(cfg, map_o);
            FieldMapRequest req;
            req.source = source;
            req.normalize = normalize;
            req.window.step = step;
            if (!window.empty())
            {
                const auto w = parse_window(window);
                req.kind = FieldMapKind::Window;
                req.window.lower = {w[0], w[1]};
                req.window.upper = {w[2], w[3]};
            }
            const FieldMap map = emit_fieldmap(cfg, cfg.params, req);
            if (map_out.empty())
                write_fieldmap_csv(std::cout, map);
            else
            {
                std::ofstream os(map_out);
                if (!os)
                    throw std::runtime_error("cannot write '" + map_out + "'");
                write_fieldmap_csv(os, map);
            }
            return 0;
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "edof-sim: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
