// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "edofsim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace edofsim
{
    ConfigError::ConfigError(const std::string &what, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    namespace
    {
        std::string trim(std::string_view s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string_view::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r");
            return std::string(s.substr(b, e - b + 1));
        }

        std::vector<std::string> split(const std::string &s, char sep)
        {
            std::vector<std::string> out;
            std::string item;
            std::istringstream is(s);
            while (std::getline(is, item, sep))
                out.push_back(trim(item));
            return out;
        }

        double to_double(const std::string &s, int line)
        {
            try
            {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size())
                    throw std::invalid_argument(s);
                return v;
            }
            catch (const std::exception &)
            {
                throw ConfigError("expected a number, got '" + s + "'", line);
            }
        }

        long to_integer(const std::string &s, int line)
        {
            const double v = to_double(s, line);
            if (v != std::floor(v))
                throw ConfigError("expected an integer, got '" + s + "'", line);
            return static_cast<long>(v);
        }

        std::string num(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.12g", v);
            return buf;
        }

        std::vector<double> parse_axis_values(const std::string &text, int line)
        {
            std::vector<double> values;
            if (text.find(':') != std::string::npos)
            {
                const auto parts = split(text, ':');
                if (parts.size() != 3)
                    throw ConfigError("range must be start:stop:step", line);
                const double start = to_double(parts[0], line), stop = to_double(parts[1], line),
                             step = to_double(parts[2], line);
                if (!(step > 0.0))
                    throw ConfigError("sweep step must be positive", line);
                if (start > stop)
                    throw ConfigError("sweep start must not exceed stop", line);
                const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
                for (long k = 0; k < count; ++k)
                    values.push_back(std::round((start + k * step) * 1e12) / 1e12);
            }
            else
            {
                for (const auto &item : split(text, ','))
                    if (!item.empty())
                        values.push_back(to_double(item, line));
            }
            if (values.empty())
                throw ConfigError("sweep axis has no values", line);
            return values;
        }

        std::pair<Shape, cplx> parse_region(const std::string &text, int line)
        {
            std::istringstream is(text);
            std::string kind;
            is >> kind;
            std::vector<double> v;
            std::string tok;
            while (is >> tok)
                v.push_back(to_double(tok, line));
            const auto need = [&](std::size_t n) {
                if (v.size() != n)
                    throw ConfigError("region '" + kind + "' expects " + std::to_string(n) + " numbers", line);
            };
            if (kind == "disk")
            {
                need(5);
                return {Disk{{v[0], v[1]}, v[2]}, {v[3], v[4]}};
            }
            if (kind == "rect")
            {
                need(6);
                return {Rect{{v[0], v[1]}, v[2], v[3]}, {v[4], v[5]}};
            }
            if (kind == "sheet")
            {
                need(6);
                return {SheetWithAperture{v[0], v[1], v[2], v[3]}, {v[4], v[5]}};
            }
            if (kind == "cavity")
            {
                need(4);
                return {CavityWalls{v[0], v[1]}, {v[2], v[3]}};
            }
            throw ConfigError("unknown region kind '" + kind + "'", line);
        }

        SolverMethod parse_method(const std::string &s, int line)
        {
            if (s == "auto")
                return SolverMethod::Auto;
            if (s == "dense")
                return SolverMethod::DenseDirect;
            if (s == "cgfft" || s == "fft" || s == "iterative")
                return SolverMethod::IterativeFft;
            throw ConfigError("solver method must be auto, dense or cgfft", line);
        }

        FieldNormalization parse_normalization(const std::string &s, int line)
        {
            if (s == "unit_peak")
                return FieldNormalization::UnitPeak;
            if (s == "unit_norm")
                return FieldNormalization::UnitNorm;
            if (s == "raw")
                return FieldNormalization::Raw;
            throw ConfigError("normalization must be unit_peak, unit_norm or raw", line);
        }

        std::vector<std::size_t> parse_indices(const std::string &s, int line)
        {
            std::vector<std::size_t> out;
            for (const auto &item : split(s, ','))
            {
                if (item.empty())
                    continue;
                const long v = to_integer(item, line);
                if (v < 0)
                    throw ConfigError("source index must be non-negative", line);
                out.push_back(static_cast<std::size_t>(v));
            }
            return out;
        }

        PresetParams accepted_params(const ScenarioConfig &cfg)
        {
            if (cfg.preset == "custom")
                return {{"L", 2.0}, {"D", 10.0}};
            return preset_defaults(cfg.preset);
        }
    } // namespace

    // ----- ScenarioConfig --------------------------------------------------

    std::size_t ScenarioConfig::point_count() const
    {
        std::size_t n = 1;
        for (const auto &axis : sweep)
            n *= axis.values.size();
        return n;
    }

    PresetParams ScenarioConfig::point_params(std::size_t k) const
    {
        PresetParams p = params;
        for (auto it = sweep.rbegin(); it != sweep.rend(); ++it)
        {
            const std::size_t n = it->values.size();
            p[it->parameter] = it->values[k % n];
            k /= n;
        }
        return p;
    }

    ScenarioConfig parse_config(std::istream &is)
    {
        ScenarioConfig cfg;
        cfg.params.clear();
        std::string section;
        std::string raw;
        int line = 0;
        bool saw_schema = false;
        std::vector<std::pair<std::string, int>> pending_params;
        std::vector<std::pair<std::pair<Shape, cplx>, int>> regions;

        while (std::getline(is, raw))
        {
            ++line;
            std::string text = raw;
            const auto hash = text.find_first_of("#;");
            if (hash != std::string::npos)
                text.erase(hash);
            text = trim(text);
            if (text.empty())
                continue;
            if (text.front() == '[')
            {
                if (text.back() != ']')
                    throw ConfigError("unterminated section header", line);
                section = trim(std::string_view(text).substr(1, text.size() - 2));
                static const std::vector<std::string> known{"scene", "arrays", "solver", "sweep", "output"};
                if (std::find(known.begin(), known.end(), section) == known.end())
                    throw ConfigError("unknown section [" + section + "]", line);
                continue;
            }
            const auto eq = text.find('=');
            if (eq == std::string::npos)
                throw ConfigError("expected key = value", line);
            const std::string key = trim(std::string_view(text).substr(0, eq));
            const std::string value = trim(std::string_view(text).substr(eq + 1));
            if (key.empty())
                throw ConfigError("empty key", line);

            if (section.empty())
            {
                if (key == "schema")
                {
                    cfg.schema = static_cast<int>(to_integer(value, line));
                    saw_schema = true;
                }
                else if (key == "name")
                    cfg.name = value;
                else
                    throw ConfigError("unknown top-level key '" + key + "'", line);
            }
            else if (section == "scene")
            {
                if (key == "preset")
                    cfg.preset = value;
                else if (key == "region")
                    regions.push_back({parse_region(value, line), line});
                else
                {
                    cfg.params[key] = to_double(value, line);
                    pending_params.push_back({key, line});
                }
            }
            else if (section == "arrays")
            {
                if (key != "L" && key != "D")
                    throw ConfigError("[arrays] accepts L and D only", line);
                cfg.params[key] = to_double(value, line);
            }
            else if (section == "solver")
            {
                if (key == "cells_per_wavelength")
                    cfg.cells_per_lambda0 = static_cast<int>(to_integer(value, line));
                else if (key == "method")
                    cfg.solver.method = parse_method(value, line);
                else if (key == "krylov")
                {
                    if (value == "cgnr")
                        cfg.solver.krylov = KrylovMethod::Cgnr;
                    else if (value == "bicgstab")
                        cfg.solver.krylov = KrylovMethod::BiCgStab;
                    else
                        throw ConfigError("krylov must be cgnr or bicgstab", line);
                }
                else if (key == "tol")
                    cfg.solver.tolerance = to_double(value, line);
                else if (key == "max_iter")
                    cfg.solver.max_iterations = static_cast<int>(to_integer(value, line));
                else if (key == "dense_limit")
                    cfg.solver.dense_limit = static_cast<std::size_t>(to_integer(value, line));
                else if (key == "metal")
                {
                    if (value == "full")
                        cfg.metal = MetalContrast::Full;
                    else if (value == "surrogate")
                        cfg.metal = MetalContrast::Surrogate;
                    else
                        throw ConfigError("metal must be full or surrogate", line);
                }
                else if (key == "threads")
                    cfg.threads = static_cast<unsigned>(std::max(1L, to_integer(value, line)));
                else
                    throw ConfigError("unknown [solver] key '" + key + "'", line);
            }
            else if (section == "sweep")
            {
                for (const auto &axis : cfg.sweep)
                    if (axis.parameter == key)
                        throw ConfigError("duplicate sweep axis '" + key + "'", line);
                cfg.sweep.push_back({key, parse_axis_values(value, line)});
                pending_params.push_back({key, line});
            }
            else if (section == "output")
            {
                if (key == "dir")
                    cfg.output_dir = value;
                else if (key == "correlation_sources")
                {
                    const auto idx = parse_indices(value, line);
                    if (idx.empty())
                        cfg.correlation_sources.reset();
                    else if (idx.size() == 2)
                        cfg.correlation_sources = std::pair{idx[0], idx[1]};
                    else
                        throw ConfigError("correlation_sources takes exactly two indices", line);
                }
                else if (key == "fieldmap_sources")
                    cfg.fieldmap_sources = parse_indices(value, line);
                else if (key == "profile_step")
                    cfg.profile_step = to_double(value, line);
                else if (key == "normalization")
                    cfg.normalization = parse_normalization(value, line);
                else
                    throw ConfigError("unknown [output] key '" + key + "'", line);
            }
        }

        if (!saw_schema)
            throw ConfigError("missing 'schema = 1'");
        if (cfg.preset.empty())
            throw ConfigError("missing [scene] preset");

        if (cfg.preset == "custom")
        {
            Scene scene;
            for (const auto &[region, at] : regions)
            {
                try
                {
                    scene.add(region.first, region.second);
                }
                catch (const std::invalid_argument &e)
                {
                    throw ConfigError(e.what(), at);
                }
            }
            cfg.custom_scene = std::move(scene);
        }
        else if (!regions.empty())
            throw ConfigError("region lines require preset = custom", regions.front().second);

        PresetParams accepted;
        try
        {
            accepted = accepted_params(cfg);
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(e.what());
        }
        for (const auto &[key, at] : pending_params)
            if (!accepted.contains(key))
                throw ConfigError("preset '" + cfg.preset + "' has no parameter '" + key + "'", at);
        for (const auto &[key, value] : accepted)
            cfg.params.try_emplace(key, value);

        validate(cfg);
        return cfg;
    }

    ScenarioConfig load_config(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config '" + path.string() + "'");
        return parse_config(in);
    }

    void validate(const ScenarioConfig &cfg)
    {
        if (cfg.schema != 1)
            throw ConfigError("unsupported schema " + std::to_string(cfg.schema));
        if (cfg.preset != "custom")
        {
            const auto names = preset_names();
            if (std::find(names.begin(), names.end(), cfg.preset) == names.end())
                throw ConfigError("unknown preset '" + cfg.preset + "'");
        }
        else if (!cfg.custom_scene)
            throw ConfigError("custom preset without a scene");
        if (cfg.cells_per_lambda0 < 4)
            throw ConfigError("cells_per_wavelength must be at least 4");
        if (!(cfg.solver.tolerance > 0.0))
            throw ConfigError("tol must be positive");
        if (!(cfg.profile_step > 0.0))
            throw ConfigError("profile_step must be positive");
        const PresetParams accepted = accepted_params(cfg);
        for (const auto &axis : cfg.sweep)
        {
            if (!accepted.contains(axis.parameter))
                throw ConfigError("sweep axis '" + axis.parameter + "' is not a parameter of '" + cfg.preset + "'");
            if (axis.values.empty())
                throw ConfigError("sweep axis '" + axis.parameter + "' has no values");
        }
    }

    void write_config(std::ostream &os, const ScenarioConfig &cfg)
    {
        os << "schema = " << cfg.schema << "\n";
        os << "name = " << cfg.name << "\n\n[scene]\npreset = " << cfg.preset << "\n";
        for (const auto &[key, value] : cfg.params)
            if (key != "L" && key != "D")
                os << key << " = " << num(value) << "\n";
        if (cfg.custom_scene)
        {
            std::istringstream regions(cfg.custom_scene->describe());
            std::string row;
            while (std::getline(regions, row))
            {
                // describe() uses full precision already
                os << "region = " << row << "\n";
            }
        }
        os << "\n[arrays]\nL = " << num(cfg.params.at("L")) << "\nD = " << num(cfg.params.at("D")) << "\n";
        os << "\n[solver]\ncells_per_wavelength = " << cfg.cells_per_lambda0 << "\n";
        os << "method = " << to_string(cfg.solver.method) << "\n";
        os << "krylov = " << to_string(cfg.solver.krylov) << "\n";
        os << "tol = " << num(cfg.solver.tolerance) << "\n";
        os << "max_iter = " << cfg.solver.max_iterations << "\n";
        os << "dense_limit = " << cfg.solver.dense_limit << "\n";
        os << "metal = " << (cfg.metal == MetalContrast::Full ? "full" : "surrogate") << "\n";
        os << "threads = " << cfg.threads << "\n";
        if (!cfg.sweep.empty())
        {
            os << "\n[sweep]\n";
            for (const auto &axis : cfg.sweep)
            {
                os << axis.parameter << " = ";
                for (std::size_t i = 0; i < axis.values.size(); ++i)
                    os << (i ? ", " : "") << num(axis.values[i]);
                os << "\n";
            }
        }
        os << "\n[output]\ndir = " << cfg.output_dir.string() << "\n";
        if (cfg.correlation_sources)
            os << "correlation_sources = " << cfg.correlation_sources->first << ", " << cfg.correlation_sources->second
               << "\n";
        if (!cfg.fieldmap_sources.empty())
        {
            os << "fieldmap_sources = ";
            for (std::size_t i = 0; i < cfg.fieldmap_sources.size(); ++i)
                os << (i ? ", " : "") << cfg.fieldmap_sources[i];
            os << "\n";
        }
        os << "profile_step = " << num(cfg.profile_step) << "\n";
        os << "normalization = " << to_string(cfg.normalization) << "\n";
    }

} // namespace edofsim
