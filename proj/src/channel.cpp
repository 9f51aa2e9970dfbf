// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "edofsim/channel.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace edofsim
{
    ArrayGeometry build_array(Point center, double length, double orientation)
    {
        if (!(length > 0.0) || !std::isfinite(length))
            throw std::invalid_argument("array length must be positive");
        const double twice = 2.0 * length / PhysicalConstants::lambda0;
        if (std::abs(twice - std::round(twice)) > 1e-9)
            throw std::invalid_argument("array length must be a multiple of lambda0 / 2");
        const auto count = static_cast<std::size_t>(std::llround(twice)) + 1;

        double ux = std::cos(orientation), uy = std::sin(orientation);
        if (std::abs(ux) < 1e-15)
            ux = 0.0;
        if (std::abs(uy) < 1e-15)
            uy = 0.0;

        ArrayGeometry a{center, length, orientation, {}};
        a.elements.reserve(count);
        const double spacing = length / static_cast<double>(count - 1);
        for (std::size_t k = 0; k < count; ++k)
        {
            const double s = -0.5 * length + spacing * static_cast<double>(k);
            a.elements.push_back({center.x + s * ux, center.y + s * uy});
        }
        return a;
    }

    ArrayGeometry vertical_array(double x_position, double length)
    {
        return build_array({x_position, 0.0}, length, 0.5 * std::numbers::pi);
    }

    // ----- FieldEngine -----------------------------------------------------

    FieldEngine::FieldEngine(const Grid &grid, const SolverSettings &settings)
        : grid_(&grid), krylov_(settings.krylov)
    {
        if (!grid.empty())
        {
            op_ = std::make_unique<ImpedanceOperator>(assemble(grid));
            solver_ = std::make_unique<Solver>(*op_, settings);
        }
    }

    FieldEngine::~FieldEngine() = default;

    std::string FieldEngine::method_name() const
    {
        if (free_space())
            return "none";
        return solver_->method() == SolverMethod::DenseDirect ? "dense-lu" : to_string(krylov_) + "-fft";
    }

    CurrentSolution FieldEngine::solve(const SourceExcitation &src) const
    {
        if (free_space())
            return {{}, {"none", 0, 0.0, 0.0}};
        return solver_->solve(excitation(src, *grid_));
    }

    std::vector<cplx> FieldEngine::total_field(const SourceExcitation &src, const CurrentSolution &sol,
                                               std::span<const Point> points) const
    {
        return edofsim::total_field(src, sol, *grid_, points);
    }

    // ----- Channel ---------------------------------------------------------

    namespace
    {
        template <class Fn>
        void parallel_for(std::size_t count, unsigned threads, Fn &&fn)
        {
            threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
            if (threads <= 1)
            {
                for (std::size_t i = 0; i < count; ++i)
                    fn(i);
                return;
            }
            std::atomic<std::size_t> next{0};
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t)
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < count; i = next++)
                        fn(i);
                });
        }

        void check_outside(const Grid &grid, const ArrayGeometry &a, const char *which)
        {
            for (std::size_t k = 0; k < a.size(); ++k)
                if (grid.cell_at(a.elements[k]))
                    throw ChannelError(std::string(which) + " element " + std::to_string(k) +
                                           " lies inside an occupied cell",
                                       k);
        }
    } // namespace

    ChannelMatrix build_channel(const FieldEngine &engine, const ArrayGeometry &tx, const ArrayGeometry &rx,
                                const ChannelOptions &options)
    {
        if (tx.size() == 0 || rx.size() == 0)
            throw std::invalid_argument("build_channel: empty array");
        const Grid &grid = engine.grid();
        check_outside(grid, tx, "transmit");
        check_outside(grid, rx, "receive");

        const auto nr = static_cast<Eigen::Index>(rx.size());
        const auto ns = static_cast<Eigen::Index>(tx.size());

        ChannelMatrix ch;
        ch.h.resize(nr, ns);
        ch.diagnostics.resize(tx.size());
        ch.provenance.scene_hash = options.scene_hash;
        ch.provenance.cells_per_lambda0 = options.cells_per_lambda0;
        ch.provenance.unknowns = grid.size();
        ch.provenance.tolerance = options.solver.tolerance;
        ch.provenance.solver = engine.method_name();

        std::vector<std::exception_ptr> errors(tx.size());
        parallel_for(tx.size(), options.threads, [&](std::size_t n) {
            try
            {
                const SourceExcitation src = LineSource{tx.elements[n]};
                const CurrentSolution sol = engine.solve(src);
                const std::vector<cplx> col = engine.total_field(src, sol, rx.elements);
                for (Eigen::Index m = 0; m < nr; ++m)
                    ch.h(m, static_cast<Eigen::Index>(n)) = col[static_cast<std::size_t>(m)];
                ch.diagnostics[n] = sol.diagnostics;
            }
            catch (...)
            {
                errors[n] = std::current_exception();
            }
        });
        for (std::size_t n = 0; n < errors.size(); ++n)
        {
            if (!errors[n])
                continue;
            try
            {
                std::rethrow_exception(errors[n]);
            }
            catch (const std::exception &e)
            {
                throw ChannelError("source " + std::to_string(n) + ": " + e.what(), n);
            }
        }
        return ch;
    }

    ChannelMatrix build_channel(const Grid &grid, const ArrayGeometry &tx, const ArrayGeometry &rx,
                                const ChannelOptions &options)
    {
        std::unique_ptr<FieldEngine> engine;
        try
        {
            engine = std::make_unique<FieldEngine>(grid, options.solver);
        }
        catch (const SolverError &e)
        {
            throw ChannelError(std::string("factorization: ") + e.what(), 0);
        }
        return build_channel(*engine, tx, rx, options);
    }

    ChannelMatrix build_channel(const Scene &scene, int cells_per_lambda0, const ArrayGeometry &tx,
                                const ArrayGeometry &rx, const SolverSettings &settings, unsigned threads)
    {
        const Grid grid = rasterize(scene, cells_per_lambda0);
        ChannelOptions opt;
        opt.solver = settings;
        opt.threads = threads;
        opt.scene_hash = scene.hash();
        opt.cells_per_lambda0 = cells_per_lambda0;
        return build_channel(grid, tx, rx, opt);
    }

    void write_channel_csv(std::ostream &os, const ChannelMatrix &ch)
    {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(ch.provenance.scene_hash));
        os << "# edof-sim channel\n";
        os << "# scene_hash=" << buf << "\n";
        os << "# cells_per_wavelength=" << ch.provenance.cells_per_lambda0 << "\n";
        os << "# unknowns=" << ch.provenance.unknowns << "\n";
        os << "# solver=" << ch.provenance.solver << "\n";
        os << "# tolerance=" << ch.provenance.tolerance << "\n";
        os << "# rows=" << ch.h.rows() << " cols=" << ch.h.cols() << "\n";
        os << "m,n,re,im\n";
        for (Eigen::Index n = 0; n < ch.h.cols(); ++n)
            for (Eigen::Index m = 0; m < ch.h.rows(); ++m)
            {
                std::snprintf(buf, sizeof buf, "%ld,%ld,%.17g,%.17g\n", static_cast<long>(m), static_cast<long>(n),
                              ch.h(m, n).real(), ch.h(m, n).imag());
                os << buf;
            }
    }

} // namespace edofsim
