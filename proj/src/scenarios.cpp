// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "edofsim/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace edofsim
{
    namespace
    {
        std::string fmt(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.10g", v);
            return buf;
        }

        // Round-trip exact; used where values are read back.
        std::string fmt_exact(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        std::string csv_safe(std::string s)
        {
            for (char &c : s)
                if (c == ',' || c == '\n' || c == '"')
                    c = ';';
            return s;
        }

        void ensure_dir(const std::filesystem::path &p) { std::filesystem::create_directories(p); }

        std::ofstream open_out(const std::filesystem::path &p)
        {
            std::ofstream os(p);
            if (!os)
                throw std::runtime_error("cannot write '" + p.string() + "'");
            return os;
        }
    } // namespace

    // ----- Built-in configurations -----------------------------------------

    std::vector<std::string> builtin_config_names() { return {"fig3b", "fig5b", "fig7b"}; }

    std::string builtin_config_description(const std::string &name)
    {
        if (name == "fig3b")
            return "key-hole sheet, L = D = 5, EDOF versus aperture S in [0.25, 3]";
        if (name == "fig5b")
            return "twin dielectric cylinders, L = 2, D = 10, EDOF versus R in [1.2, 2.4] and eps_r in [2, 6]";
        if (name == "fig7b")
            return "metallic cavity with square obstacle, L = 2, D = 10, EDOF versus Sc in [3, 8]";
        throw std::invalid_argument("unknown built-in config '" + name + "'");
    }

    ScenarioConfig builtin_config(const std::string &name)
    {
        ScenarioConfig cfg;
        cfg.name = name;
        if (name == "fig3b")
        {
            cfg.preset = "keyhole";
            cfg.params = preset_defaults("keyhole");
            cfg.metal = MetalContrast::Surrogate;
            // A one-cell metal sheet leaks at 10 cells per wavelength and the leak swamps the
            // narrow-aperture channel; the sweep is converged from 30 cells on.
            cfg.cells_per_lambda0 = 30;
            cfg.sweep.push_back({"S", {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0}});
            cfg.fieldmap_sources = {5};
        }
        else if (name == "fig5b")
        {
            cfg.preset = "twin_cylinders";
            cfg.params = preset_defaults("twin_cylinders");
            cfg.sweep.push_back({"R", {1.2, 1.6, 2.0, 2.4}});
            cfg.sweep.push_back({"eps_r", {2.0, 3.0, 4.0, 5.0, 6.0}});
            cfg.correlation_sources = std::pair<std::size_t, std::size_t>{2, 3};
            cfg.fieldmap_sources = {2, 3};
        }
        else if (name == "fig7b")
        {
            cfg.preset = "cavity";
            cfg.params = preset_defaults("cavity");
            cfg.metal = MetalContrast::Surrogate;
            cfg.sweep.push_back({"Sc", {3.0, 4.0, 5.0, 6.0, 7.0, 8.0}});
            cfg.correlation_sources = std::pair<std::size_t, std::size_t>{2, 3};
            cfg.fieldmap_sources = {2, 3};
        }
        else
            throw std::invalid_argument("unknown built-in config '" + name + "'");
        // Dense LU stays faster than the Krylov path up to the largest published grids
        // (about 7000 cells, 0.8 GB) on a desk machine.
        cfg.solver.dense_limit = 8000;
        cfg.output_dir = std::filesystem::path("out") / name;
        validate(cfg);
        return cfg;
    }

    // ----- Geometry helpers ------------------------------------------------

    ArrayGeometry tx_array(const PresetParams &p) { return vertical_array(-0.5 * p.at("D"), p.at("L")); }
    ArrayGeometry rx_array(const PresetParams &p) { return vertical_array(0.5 * p.at("D"), p.at("L")); }

    std::vector<Point> receiving_line(const PresetParams &p, double step)
    {
        const double L = p.at("L"), x = 0.5 * p.at("D");
        const auto count = static_cast<std::size_t>(std::floor(L / step + 1e-9)) + 1;
        std::vector<Point> pts;
        pts.reserve(count);
        for (std::size_t k = 0; k < count; ++k)
            pts.push_back({x, -0.5 * L + step * static_cast<double>(k)});
        return pts;
    }

    Scene build_scene(const ScenarioConfig &config, const PresetParams &params)
    {
        if (config.custom_scene)
            return *config.custom_scene;
        return preset_scene(config.preset, params, config.metal);
    }

    bool ScenarioResult::all_ok() const
    {
        for (const auto &p : points)
            if (!p.ok)
                return false;
        return true;
    }

    // ----- Field maps ------------------------------------------------------

    FieldMap emit_fieldmap(const FieldEngine &engine, const PresetParams &params, const FieldMapRequest &request)
    {
        const ArrayGeometry tx = tx_array(params);
        if (request.source >= tx.size())
            throw std::invalid_argument("field map source index " + std::to_string(request.source) +
                                        " outside the transmit array");
        const Point source = tx.elements[request.source];

        FieldMap map;
        std::vector<Point> pts;
        if (request.kind == FieldMapKind::ReceivingLine)
        {
            if (!(request.window.step > 0.0))
                throw std::invalid_argument("field map step must be positive");
            pts = receiving_line(params, request.window.step);
            map.origin = pts.front();
            map.delta = request.window.step;
            map.nx = 1;
            map.ny = static_cast<int>(pts.size());
        }
        else
        {
            const FieldWindow &w = request.window;
            if (!(w.step > 0.0) || !(w.upper.x >= w.lower.x) || !(w.upper.y >= w.lower.y))
                throw std::invalid_argument("field map window must satisfy x0 <= x1, y0 <= y1 and step > 0");
            map.origin = w.lower;
            map.delta = w.step;
            map.nx = static_cast<int>(std::floor((w.upper.x - w.lower.x) / w.step + 1e-9)) + 1;
            map.ny = static_cast<int>(std::floor((w.upper.y - w.lower.y) / w.step + 1e-9)) + 1;
            for (int j = 0; j < map.ny; ++j)
                for (int i = 0; i < map.nx; ++i)
                    pts.push_back({w.lower.x + i * w.step, w.lower.y + j * w.step});
        }

        // Interior points and the source singularity become NaN markers.
        const Grid &grid = engine.grid();
        std::vector<Point> valid;
        std::vector<std::size_t> where;
        for (std::size_t k = 0; k < pts.size(); ++k)
            if (!grid.cell_at(pts[k]) && distance(pts[k], source) > 1e-9)
            {
                valid.push_back(pts[k]);
                where.push_back(k);
            }

        const SourceExcitation src = LineSource{source};
        const CurrentSolution sol = engine.solve(src);
        const std::vector<cplx> e = engine.total_field(src, sol, valid);

        const double nan = std::numeric_limits<double>::quiet_NaN();
        map.values.assign(pts.size(), cplx{nan, nan});
        double peak = 0.0;
        for (std::size_t k = 0; k < valid.size(); ++k)
        {
            map.values[where[k]] = e[k];
            peak = std::max(peak, std::abs(e[k]));
        }
        if (request.normalize && peak > 0.0)
        {
            for (auto &v : map.values)
                v /= peak;
            map.normalized = true;
        }
        return map;
    }

    FieldMap emit_fieldmap(const ScenarioConfig &config, const PresetParams &params, const FieldMapRequest &request)
    {
        const Scene scene = build_scene(config, params);
        const Grid grid = rasterize(scene, config.cells_per_lambda0);
        const FieldEngine engine(grid, config.solver);
        return emit_fieldmap(engine, params, request);
    }

    void write_fieldmap_csv(std::ostream &os, const FieldMap &map)
    {
        os << "origin_x,origin_y,delta,nx,ny\n";
        os << fmt_exact(map.origin.x) << "," << fmt_exact(map.origin.y) << "," << fmt_exact(map.delta) << ","
           << map.nx << "," << map.ny
           << "\n";
        os << "i,j,re,im\n";
        for (int j = 0; j < map.ny; ++j)
            for (int i = 0; i < map.nx; ++i)
            {
                const cplx v = map.at(i, j);
                os << i << "," << j << "," << fmt_exact(v.real()) << "," << fmt_exact(v.imag()) << "\n";
            }
    }

    FieldMap read_fieldmap_csv(std::istream &is)
    {
        std::string line;
        const auto expect = [&](const char *header) {
            if (!std::getline(is, line) || line != header)
                throw std::runtime_error(std::string("field map: expected header '") + header + "'");
        };
        expect("origin_x,origin_y,delta,nx,ny");
        FieldMap map;
        if (!std::getline(is, line))
            throw std::runtime_error("field map: missing grid row");
        {
            std::istringstream row(line);
            char c1, c2, c3, c4;
            row >> map.origin.x >> c1 >> map.origin.y >> c2 >> map.delta >> c3 >> map.nx >> c4 >> map.ny;
            if (!row || map.nx < 0 || map.ny < 0)
                throw std::runtime_error("field map: malformed grid row");
        }
        expect("i,j,re,im");
        map.values.assign(static_cast<std::size_t>(map.nx) * static_cast<std::size_t>(map.ny), 0.0);
        std::size_t rows = 0;
        while (std::getline(is, line))
        {
            if (line.empty())
                continue;
            std::istringstream row(line);
            std::string f[4];
            for (auto &s : f)
                std::getline(row, s, ',');
            const int i = std::stoi(f[0]), j = std::stoi(f[1]);
            if (i < 0 || j < 0 || i >= map.nx || j >= map.ny)
                throw std::runtime_error("field map: index out of range");
            map.values[static_cast<std::size_t>(i + map.nx * j)] = {std::stod(f[2]), std::stod(f[3])};
            ++rows;
        }
        if (rows != map.values.size())
            throw std::runtime_error("field map: row count does not match nx * ny");
        return map;
    }

    // ----- Sweep -----------------------------------------------------------

    namespace
    {
        struct PointArtifacts
        {
            std::vector<std::pair<std::size_t, FieldMap>> profiles;
        };

        void run_point(const ScenarioConfig &config, SweepPoint &pt, PointArtifacts &art, unsigned column_threads,
                       bool keep_channel)
        {
            const auto t0 = std::chrono::steady_clock::now();
            const Scene scene = build_scene(config, pt.params);
            const Grid grid = rasterize(scene, config.cells_per_lambda0);
            pt.unknowns = grid.size();
            const ArrayGeometry tx = tx_array(pt.params);
            const ArrayGeometry rx = rx_array(pt.params);

            std::unique_ptr<FieldEngine> engine;
            try
            {
                engine = std::make_unique<FieldEngine>(grid, config.solver);
            }
            catch (const SolverError &e)
            {
                throw ChannelError(std::string("factorization: ") + e.what(), 0);
            }

            ChannelOptions opt;
            opt.solver = config.solver;
            opt.threads = column_threads;
            opt.scene_hash = scene.hash();
            opt.cells_per_lambda0 = config.cells_per_lambda0;
            ChannelMatrix ch = build_channel(*engine, tx, rx, opt);

            const Eigen::MatrixXcd r = correlation(ch.h);
            pt.edof = edof(r);
            const Eigen::VectorXd s = eigenvalues(r);
            pt.eigenvalues.assign(s.data(), s.data() + s.size());

            std::vector<std::size_t> wanted = config.fieldmap_sources;
            if (config.correlation_sources)
                for (std::size_t k : {config.correlation_sources->first, config.correlation_sources->second})
                    if (std::find(wanted.begin(), wanted.end(), k) == wanted.end())
                        wanted.push_back(k);
            for (std::size_t k : wanted)
            {
                FieldMapRequest req;
                req.source = k;
                req.kind = FieldMapKind::ReceivingLine;
                req.window.step = config.profile_step;
                art.profiles.emplace_back(k, emit_fieldmap(*engine, pt.params, req));
            }
            if (config.correlation_sources)
            {
                const auto find = [&](std::size_t k) -> const FieldMap & {
                    for (const auto &[idx, map] : art.profiles)
                        if (idx == k)
                            return map;
                    throw std::logic_error("missing profile");
                };
                const FieldMap &a = find(config.correlation_sources->first);
                const FieldMap &b = find(config.correlation_sources->second);
                pt.field_correlation = field_correlation(a.values, b.values, config.normalization);
            }
            if (keep_channel)
                pt.channel = std::move(ch);
            else
                pt.channel = ChannelMatrix{{}, ch.provenance, std::move(ch.diagnostics)};
            pt.ok = true;
            pt.status = "ok";
            pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    } // namespace

    void write_sweep_csv(std::ostream &os, const ScenarioResult &result, bool include_timing)
    {
        const ScenarioConfig &cfg = result.config;
        std::size_t k = 0;
        for (const auto &p : result.points)
            k = std::max(k, p.eigenvalues.size());
        if (k == 0)
            k = std::min(tx_array(cfg.params).size(), rx_array(cfg.params).size());

        os << "# edof-sim sweep schema=1 name=" << cfg.name << " preset=" << cfg.preset
           << " normalization=" << to_string(cfg.normalization) << " axes=";
        for (std::size_t a = 0; a < cfg.sweep.size(); ++a)
            os << (a ? ";" : "") << cfg.sweep[a].parameter;
        os << "\n";
        os << "point";
        for (const auto &axis : cfg.sweep)
            os << "," << axis.parameter;
        os << ",status,unknowns,edof";
        for (std::size_t i = 1; i <= k; ++i)
            os << ",sigma_" << i;
        os << ",field_correlation";
        if (include_timing)
            os << ",wall_time";
        os << "\n";
        for (const auto &p : result.points)
        {
            os << p.index;
            for (const auto &axis : cfg.sweep)
                os << "," << fmt(p.params.at(axis.parameter));
            os << "," << csv_safe(p.status) << "," << p.unknowns << "," << (p.ok ? fmt(p.edof) : "");
            for (std::size_t i = 0; i < k; ++i)
                os << "," << (i < p.eigenvalues.size() ? fmt(p.eigenvalues[i]) : "");
            os << "," << (p.field_correlation ? fmt(*p.field_correlation) : "");
            if (include_timing)
                os << "," << fmt(p.seconds);
            os << "\n";
        }
    }

    ScenarioResult run_scenario(const ScenarioConfig &config, const RunOptions &options)
    {
        validate(config);
        ScenarioResult result;
        result.config = config;
        const std::size_t count = config.point_count();
        result.points.resize(count);
        std::vector<PointArtifacts> artifacts(count);
        for (std::size_t k = 0; k < count; ++k)
        {
            result.points[k].index = k;
            result.points[k].params = config.point_params(k);
        }

        const unsigned threads = std::max(1u, config.threads);
        const unsigned point_threads = count > 1 ? std::min<unsigned>(threads, static_cast<unsigned>(count)) : 1;
        const unsigned column_threads = point_threads > 1 ? 1 : threads;

        std::mutex log_mutex;
        const auto work = [&](std::size_t k) {
            SweepPoint &pt = result.points[k];
            try
            {
                run_point(config, pt, artifacts[k], column_threads, options.keep_channels || options.write_files);
            }
            catch (const std::exception &e)
            {
                pt.ok = false;
                pt.status = std::string("failed: ") + e.what();
            }
            if (options.log)
            {
                std::lock_guard lock(log_mutex);
                *options.log << "[" << config.name << "] point " << k + 1 << "/" << count;
                for (const auto &axis : config.sweep)
                    *options.log << " " << axis.parameter << "=" << fmt(pt.params.at(axis.parameter));
                if (pt.ok)
                    *options.log << " cells=" << pt.unknowns << " edof=" << fmt(pt.edof);
                else
                    *options.log << " " << pt.status;
                *options.log << " (" << fmt(pt.seconds) << " s)\n";
                options.log->flush();
            }
        };

        if (point_threads <= 1)
            for (std::size_t k = 0; k < count; ++k)
                work(k);
        else
        {
            std::atomic<std::size_t> next{0};
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < point_threads; ++t)
                pool.emplace_back([&] {
                    for (std::size_t k = next++; k < count; k = next++)
                        work(k);
                });
        }

        if (options.write_files)
        {
            const auto &dir = config.output_dir;
            ensure_dir(dir);
            {
                auto os = open_out(dir / "sweep.csv");
                write_sweep_csv(os, result);
            }
            {
                auto os = open_out(dir / "config.txt");
                write_config(os, config);
            }
            ensure_dir(dir / "eigenvalues");
            ensure_dir(dir / "channels");
            auto diag = open_out(dir / "diagnostics.csv");
            diag << "point,source_id,method,iterations,residual,wall_time\n";
            for (std::size_t k = 0; k < count; ++k)
            {
                const SweepPoint &pt = result.points[k];
                const std::string stem = "point_" + std::to_string(k);
                if (!pt.ok)
                    continue;
                {
                    auto os = open_out(dir / "eigenvalues" / (stem + ".csv"));
                    os << "index,sigma\n";
                    for (std::size_t i = 0; i < pt.eigenvalues.size(); ++i)
                        os << i + 1 << "," << fmt(pt.eigenvalues[i]) << "\n";
                }
                if (pt.channel)
                {
                    if (pt.channel->h.size() > 0)
                    {
                        auto os = open_out(dir / "channels" / (stem + ".csv"));
                        write_channel_csv(os, *pt.channel);
                    }
                    for (std::size_t s = 0; s < pt.channel->diagnostics.size(); ++s)
                    {
                        const auto &d = pt.channel->diagnostics[s];
                        diag << k << "," << s << "," << d.method << "," << d.iterations << "," << fmt(d.residual) << ","
                             << fmt(d.seconds) << "\n";
                    }
                }
                if (!artifacts[k].profiles.empty())
                {
                    ensure_dir(dir / "fieldmaps");
                    for (const auto &[src, map] : artifacts[k].profiles)
                    {
                        auto os = open_out(dir / "fieldmaps" / (stem + "_source_" + std::to_string(src) + ".csv"));
                        write_fieldmap_csv(os, map);
                    }
                }
            }
            if (!options.keep_channels)
                for (auto &pt : result.points)
                    if (pt.channel)
                        pt.channel->h.resize(0, 0);
        }
        return result;
    }

} // namespace edofsim
