// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "edofsim/vie.hpp"

#include "edofsim/kernels.hpp"
#include "edofsim/special.hpp"

#include <fftw3.h>

#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace edofsim
{
    namespace
    {
        constexpr double k0 = PhysicalConstants::k0;
        constexpr double eta = PhysicalConstants::eta0;
        constexpr double kInteraction = k0 * eta / 4.0;

        template <class... Ts>
        struct overloaded : Ts...
        {
            using Ts::operator()...;
        };

        // The FFTW planner is not re-entrant; execution on distinct arrays is.
        std::mutex &planner_mutex()
        {
            static std::mutex m;
            return m;
        }

        double seconds_since(std::chrono::steady_clock::time_point t0)
        {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }

        double relative_residual(const ImpedanceOperator &op, std::span<const cplx> x, std::span<const cplx> b)
        {
            std::vector<cplx> r = op.apply(x);
            kernels::axpy(-1.0, b, r);
            const double nb = kernels::norm2(b);
            return nb > 0.0 ? std::sqrt(kernels::norm2(r) / nb) : std::sqrt(kernels::norm2(r));
        }
    } // namespace

    cplx green2d(double rho)
    {
        if (!(rho > 0.0))
            throw SingularityError("free-space Green's function evaluated at zero distance");
        return special::hankel2(0, k0 * rho) / (4.0 * kJ);
    }

    cplx incident_field(const SourceExcitation &src, Point p)
    {
        return std::visit(overloaded{
                              [&](const LineSource &s) { return green2d(distance(s.position, p)); },
                              [&](const PlaneWave &w) {
                                  const double phase = k0 * (p.x * std::cos(w.angle) + p.y * std::sin(w.angle));
                                  return std::exp(-kJ * phase);
                              },
                          },
                          src);
    }

    std::vector<cplx> incident_field(const SourceExcitation &src, std::span<const Point> points)
    {
        std::vector<cplx> out;
        out.reserve(points.size());
        for (const Point &p : points)
            out.push_back(incident_field(src, p));
        return out;
    }

    namespace cell_integrals
    {
        cplx off_cell(double delta, double dist)
        {
            const double a = delta / std::sqrt(std::numbers::pi);
            return (2.0 * std::numbers::pi * a / k0) * special::bessel_j(1, k0 * a) * special::hankel2(0, k0 * dist);
        }

        cplx self_cell(double delta)
        {
            const double a = delta / std::sqrt(std::numbers::pi);
            return (2.0 * std::numbers::pi * a / k0) * special::hankel2(1, k0 * a) - 4.0 * kJ / (k0 * k0);
        }
    } // namespace cell_integrals

    // ----- ImpedanceOperator -----------------------------------------------

    struct ImpedanceOperator::FftState
    {
        int px = 0;
        int py = 0;
        std::vector<cplx> spectrum; // FFT of the circulant embedding, scaled by 1/(px*py)
        fftw_plan forward = nullptr;
        fftw_plan backward = nullptr;

        ~FftState()
        {
            std::lock_guard lock(planner_mutex());
            if (forward)
                fftw_destroy_plan(forward);
            if (backward)
                fftw_destroy_plan(backward);
        }
    };

    ImpedanceOperator::ImpedanceOperator(const Grid &grid) : nx_(grid.nx()), ny_(grid.ny())
    {
        const auto &cells = grid.cells();
        if (cells.empty())
            return;

        ci_.reserve(cells.size());
        cj_.reserve(cells.size());
        diag_.reserve(cells.size());
        for (const Cell &c : cells)
        {
            if (c.eps_r == cplx{1.0, 0.0})
                throw std::invalid_argument("cell with eps_r = 1 has an unbounded contrast term");
            ci_.push_back(c.i);
            cj_.push_back(c.j);
            diag_.push_back(eta / (kJ * k0 * (c.eps_r - 1.0)));
        }

        const double delta = grid.delta();
        generator_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
        for (int b = 0; b < ny_; ++b)
            for (int a = 0; a < nx_; ++a)
            {
                const cplx integral = (a == 0 && b == 0) ? cell_integrals::self_cell(delta)
                                                         : cell_integrals::off_cell(delta, delta * std::hypot(a, b));
                generator_[static_cast<std::size_t>(a) + static_cast<std::size_t>(nx_) * static_cast<std::size_t>(b)] =
                    kInteraction * integral;
            }

        auto fft = std::make_unique<FftState>();
        fft->px = 2 * nx_;
        fft->py = 2 * ny_;
        const std::size_t total = static_cast<std::size_t>(fft->px) * static_cast<std::size_t>(fft->py);
        fft->spectrum.assign(total, 0.0);
        for (int q = 0; q < fft->py; ++q)
        {
            if (q == ny_)
                continue;
            const int dj = q < ny_ ? q : fft->py - q;
            for (int p = 0; p < fft->px; ++p)
            {
                if (p == nx_)
                    continue;
                const int di = p < nx_ ? p : fft->px - p;
                fft->spectrum[static_cast<std::size_t>(p) + static_cast<std::size_t>(fft->px) * static_cast<std::size_t>(q)] =
                    kernel(di, dj);
            }
        }
        {
            std::lock_guard lock(planner_mutex());
            std::vector<cplx> scratch(total);
            auto *buf = reinterpret_cast<fftw_complex *>(scratch.data());
            // Row-major: the fastest index is the lattice column p.
            fft->forward = fftw_plan_dft_2d(fft->py, fft->px, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
            fft->backward = fftw_plan_dft_2d(fft->py, fft->px, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        }
        if (!fft->forward || !fft->backward)
            throw std::runtime_error("FFTW planning failed");
        auto *buf = reinterpret_cast<fftw_complex *>(fft->spectrum.data());
        fftw_execute_dft(fft->forward, buf, buf);
        const double scale = 1.0 / static_cast<double>(total);
        for (auto &v : fft->spectrum)
            v *= scale;
        fft_ = std::move(fft);
    }

    ImpedanceOperator::~ImpedanceOperator() = default;
    ImpedanceOperator::ImpedanceOperator(ImpedanceOperator &&) noexcept = default;
    ImpedanceOperator &ImpedanceOperator::operator=(ImpedanceOperator &&) noexcept = default;

    cplx ImpedanceOperator::kernel(int di, int dj) const
    {
        const auto a = static_cast<std::size_t>(std::abs(di));
        const auto b = static_cast<std::size_t>(std::abs(dj));
        return generator_[a + static_cast<std::size_t>(nx_) * b];
    }

    cplx ImpedanceOperator::entry(std::size_t m, std::size_t n) const
    {
        const cplx z = kernel(ci_[m] - ci_[n], cj_[m] - cj_[n]);
        return m == n ? z + diag_[m] : z;
    }

    Eigen::MatrixXcd ImpedanceOperator::dense() const
    {
        const auto n = static_cast<Eigen::Index>(size());
        Eigen::MatrixXcd z(n, n);
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index r = 0; r < n; ++r)
                z(r, c) = entry(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        return z;
    }

    std::vector<cplx> ImpedanceOperator::apply_dense(std::span<const cplx> x) const
    {
        if (x.size() != size())
            throw std::invalid_argument("apply: vector length does not match the number of cells");
        std::vector<cplx> y(size(), 0.0);
        for (std::size_t m = 0; m < size(); ++m)
        {
            cplx s = 0.0;
            for (std::size_t n = 0; n < size(); ++n)
                s += entry(m, n) * x[n];
            y[m] = s;
        }
        return y;
    }

    std::vector<cplx> ImpedanceOperator::apply(std::span<const cplx> x) const
    {
        if (x.size() != size())
            throw std::invalid_argument("apply: vector length does not match the number of cells");
        if (size() == 0)
            return {};

        const FftState &f = *fft_;
        std::vector<cplx> buf(f.spectrum.size(), 0.0);
        const auto index = [&](std::size_t n) {
            return static_cast<std::size_t>(ci_[n]) + static_cast<std::size_t>(f.px) * static_cast<std::size_t>(cj_[n]);
        };
        for (std::size_t n = 0; n < size(); ++n)
            buf[index(n)] = x[n];

        auto *raw = reinterpret_cast<fftw_complex *>(buf.data());
        fftw_execute_dft(f.forward, raw, raw);
        kernels::cmul_inplace(buf, f.spectrum);
        fftw_execute_dft(f.backward, raw, raw);

        std::vector<cplx> y(size());
        for (std::size_t n = 0; n < size(); ++n)
            y[n] = buf[index(n)];
        kernels::diag_fma(diag_, x, y);
        return y;
    }

    std::vector<cplx> ImpedanceOperator::apply_adjoint(std::span<const cplx> x) const
    {
        std::vector<cplx> xc(x.begin(), x.end());
        for (auto &v : xc)
            v = std::conj(v);
        std::vector<cplx> y = apply(xc);
        for (auto &v : y)
            v = std::conj(v);
        return y;
    }

    ImpedanceOperator assemble(const Grid &grid)
    {
        if (grid.empty())
            throw std::invalid_argument("assemble: grid has no occupied cells");
        return ImpedanceOperator(grid);
    }

    // ----- Solver ----------------------------------------------------------

    std::string to_string(SolverMethod m)
    {
        switch (m)
        {
        case SolverMethod::Auto:
            return "auto";
        case SolverMethod::DenseDirect:
            return "dense";
        case SolverMethod::IterativeFft:
            return "cgfft";
        }
        return "?";
    }

    std::string to_string(KrylovMethod m) { return m == KrylovMethod::Cgnr ? "cgnr" : "bicgstab"; }

    struct Solver::DenseState
    {
        Eigen::MatrixXcd matrix;
        Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXcd>> lu;

        explicit DenseState(Eigen::MatrixXcd &&m) : matrix(std::move(m)), lu(matrix) {}
    };

    Solver::Solver(const ImpedanceOperator &op, SolverSettings settings)
        : op_(&op), settings_(settings), method_(settings.method)
    {
        if (!(settings_.tolerance > 0.0))
            throw std::invalid_argument("solver tolerance must be positive");
        if (method_ == SolverMethod::Auto)
            method_ = op.size() <= settings_.dense_limit ? SolverMethod::DenseDirect : SolverMethod::IterativeFft;
        if (settings_.max_iterations <= 0)
            settings_.max_iterations = static_cast<int>(10 * std::max<std::size_t>(op.size(), 1));
        if (method_ == SolverMethod::DenseDirect && op.size() > 0)
        {
            dense_ = std::make_unique<DenseState>(op.dense());
            const double rc = dense_->lu.rcond();
            if (!(rc > 1e-16) || !std::isfinite(rc))
                throw SolverError("dense factorization is singular to working precision", 1.0);
        }
    }

    Solver::~Solver() = default;
    Solver::Solver(Solver &&) noexcept = default;

    CurrentSolution Solver::solve(std::span<const cplx> rhs) const
    {
        if (rhs.size() != op_->size())
            throw std::invalid_argument("solve: right-hand side length does not match the number of cells");
        if (op_->size() == 0)
            return {{}, {"none", 0, 0.0, 0.0}};
        if (method_ == SolverMethod::DenseDirect)
            return solve_dense(rhs);
        return settings_.krylov == KrylovMethod::Cgnr ? solve_cgnr(rhs) : solve_bicgstab(rhs);
    }

    CurrentSolution Solver::solve_dense(std::span<const cplx> rhs) const
    {
        const auto t0 = std::chrono::steady_clock::now();
        const auto n = static_cast<Eigen::Index>(rhs.size());
        const Eigen::Map<const Eigen::VectorXcd> b(rhs.data(), n);
        Eigen::VectorXcd x = dense_->lu.solve(b);

        CurrentSolution sol;
        sol.diagnostics.method = "dense-lu";
        double res = relative_residual(*op_, {x.data(), rhs.size()}, rhs);
        // Iterative refinement for badly conditioned metal scenes.
        for (int pass = 0; pass < 3 && res > settings_.tolerance; ++pass)
        {
            std::vector<cplx> r = op_->apply({x.data(), rhs.size()});
            Eigen::VectorXcd rv(n);
            for (Eigen::Index i = 0; i < n; ++i)
                rv(i) = rhs[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];
            x += dense_->lu.solve(rv);
            res = relative_residual(*op_, {x.data(), rhs.size()}, rhs);
            ++sol.diagnostics.iterations;
        }
        sol.diagnostics.residual = res;
        sol.diagnostics.seconds = seconds_since(t0);
        if (!(res <= settings_.tolerance))
            throw SolverError("dense solve residual above tolerance", res);
        sol.currents.assign(x.data(), x.data() + n);
        return sol;
    }

    // CG on the normal equations Z^H Z x = Z^H b, tracking the true residual b - Z x.
    CurrentSolution Solver::solve_cgnr(std::span<const cplx> rhs) const
    {
        const auto t0 = std::chrono::steady_clock::now();
        const std::size_t n = rhs.size();
        const double nb = std::sqrt(kernels::norm2(rhs));
        CurrentSolution sol;
        sol.diagnostics.method = "cgnr-fft";
        sol.currents.assign(n, 0.0);
        if (nb == 0.0)
            return sol;

        std::vector<cplx> r(rhs.begin(), rhs.end());
        std::vector<cplx> s = op_->apply_adjoint(r);
        std::vector<cplx> p = s;
        double gamma = kernels::norm2(s);
        double best = 1.0;

        for (int it = 1; it <= settings_.max_iterations; ++it)
        {
            const std::vector<cplx> q = op_->apply(p);
            const double qq = kernels::norm2(q);
            if (qq == 0.0)
                break;
            const double alpha = gamma / qq;
            kernels::axpy(alpha, p, sol.currents);
            kernels::axpy(-alpha, q, r);
            const double res = std::sqrt(kernels::norm2(r)) / nb;
            best = std::min(best, res);
            sol.diagnostics.iterations = it;
            if (res <= settings_.tolerance)
            {
                // Confirm against the explicitly recomputed residual.
                const double true_res = relative_residual(*op_, sol.currents, rhs);
                if (true_res <= settings_.tolerance)
                {
                    sol.diagnostics.residual = true_res;
                    sol.diagnostics.seconds = seconds_since(t0);
                    return sol;
                }
                r = op_->apply(sol.currents);
                for (std::size_t i = 0; i < n; ++i)
                    r[i] = rhs[i] - r[i];
            }
            s = op_->apply_adjoint(r);
            const double gamma_new = kernels::norm2(s);
            kernels::xpby(s, gamma_new / gamma, p);
            gamma = gamma_new;
        }
        throw SolverError("cgnr did not converge within " + std::to_string(settings_.max_iterations) + " iterations",
                          best);
    }

    CurrentSolution Solver::solve_bicgstab(std::span<const cplx> rhs) const
    {
        const auto t0 = std::chrono::steady_clock::now();
        const std::size_t n = rhs.size();
        const double nb = std::sqrt(kernels::norm2(rhs));
        CurrentSolution sol;
        sol.diagnostics.method = "bicgstab-fft";
        sol.currents.assign(n, 0.0);
        if (nb == 0.0)
            return sol;

        std::vector<cplx> r(rhs.begin(), rhs.end());
        const std::vector<cplx> r_hat = r;
        std::vector<cplx> p(n, 0.0), v(n, 0.0);
        cplx rho = 1.0, alpha = 1.0, omega = 1.0;
        double best = 1.0;

        for (int it = 1; it <= settings_.max_iterations; ++it)
        {
            const cplx rho_new = kernels::dotc(r_hat, r);
            if (std::abs(rho_new) < 1e-300)
                break;
            const cplx beta = (rho_new / rho) * (alpha / omega);
            // p = r + beta (p - omega v)
            kernels::axpy(-omega, v, p);
            kernels::xpby(r, beta, p);
            v = op_->apply(p);
            alpha = rho_new / kernels::dotc(r_hat, v);
            std::vector<cplx> s = r;
            kernels::axpy(-alpha, v, s);
            sol.diagnostics.iterations = it;
            if (std::sqrt(kernels::norm2(s)) / nb <= settings_.tolerance)
            {
                kernels::axpy(alpha, p, sol.currents);
                r = std::move(s);
            }
            else
            {
                const std::vector<cplx> t = op_->apply(s);
                omega = kernels::dotc(t, s) / kernels::norm2(t);
                kernels::axpy(alpha, p, sol.currents);
                kernels::axpy(omega, s, sol.currents);
                r = std::move(s);
                kernels::axpy(-omega, t, r);
            }
            rho = rho_new;
            const double res = std::sqrt(kernels::norm2(r)) / nb;
            best = std::min(best, res);
            if (res <= settings_.tolerance)
            {
                const double true_res = relative_residual(*op_, sol.currents, rhs);
                if (true_res <= settings_.tolerance)
                {
                    sol.diagnostics.residual = true_res;
                    sol.diagnostics.seconds = seconds_since(t0);
                    return sol;
                }
                r = op_->apply(sol.currents);
                for (std::size_t i = 0; i < n; ++i)
                    r[i] = rhs[i] - r[i];
            }
        }
        throw SolverError("bicgstab did not converge within " + std::to_string(settings_.max_iterations) + " iterations",
                          best);
    }

    std::vector<cplx> excitation(const SourceExcitation &src, const Grid &grid)
    {
        if (const auto *ls = std::get_if<LineSource>(&src))
            if (grid.cell_at(ls->position))
                throw std::invalid_argument("line source lies inside an occupied cell");
        std::vector<cplx> rhs;
        rhs.reserve(grid.size());
        for (const Cell &c : grid.cells())
            rhs.push_back(incident_field(src, c.center));
        return rhs;
    }

    CurrentSolution solve(const ImpedanceOperator &op, const SourceExcitation &src, const Grid &grid,
                          const SolverSettings &settings)
    {
        if (grid.empty())
            return {{}, {"none", 0, 0.0, 0.0}};
        const Solver solver(op, settings);
        const std::vector<cplx> rhs = excitation(src, grid);
        return solver.solve(rhs);
    }

    // ----- Radiated fields -------------------------------------------------

    Eigen::MatrixXcd radiation_matrix(const Grid &grid, std::span<const Point> points)
    {
        const auto rows = static_cast<Eigen::Index>(points.size());
        const auto cols = static_cast<Eigen::Index>(grid.size());
        Eigen::MatrixXcd k(rows, cols);
        const double a = grid.equivalent_radius();
        const cplx prefactor = kInteraction * (2.0 * std::numbers::pi * a / k0) * special::bessel_j(1, k0 * a);
        for (Eigen::Index r = 0; r < rows; ++r)
        {
            const Point p = points[static_cast<std::size_t>(r)];
            if (grid.cell_at(p))
                throw std::invalid_argument("field evaluation point lies inside an occupied cell");
            for (Eigen::Index c = 0; c < cols; ++c)
            {
                const double d = distance(p, grid.cells()[static_cast<std::size_t>(c)].center);
                k(r, c) = prefactor * special::hankel2(0, k0 * d);
            }
        }
        return k;
    }

    std::vector<cplx> scattered_field(const CurrentSolution &sol, const Grid &grid, std::span<const Point> points)
    {
        if (sol.currents.size() != grid.size())
            throw std::invalid_argument("scattered_field: solution does not match the grid");
        if (grid.empty())
            return std::vector<cplx>(points.size(), 0.0);
        const Eigen::MatrixXcd k = radiation_matrix(grid, points);
        const Eigen::Map<const Eigen::VectorXcd> j(sol.currents.data(), static_cast<Eigen::Index>(sol.currents.size()));
        const Eigen::VectorXcd e = -(k * j);
        return {e.data(), e.data() + e.size()};
    }

    std::vector<cplx> total_field(const SourceExcitation &src, const CurrentSolution &sol, const Grid &grid,
                                  std::span<const Point> points)
    {
        std::vector<cplx> e = scattered_field(sol, grid, points);
        const std::vector<cplx> inc = incident_field(src, points);
        for (std::size_t i = 0; i < e.size(); ++i)
            e[i] += inc[i];
        return e;
    }

} // namespace edofsim
