// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#ifndef EDOFSIM_VIE_HPP
#define EDOFSIM_VIE_HPP

#include "edofsim/scene.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// 2-D TM volume integral equation on a pulse basis. Cell currents j_n satisfy
//
//     E_inc(r_m) = sum_n Z_mn j_n,
//     Z_mn = (k eta / 4) * I_mn,   Z_mm = eta / (j k (eps_m - 1)) + (k eta / 4) * I_mm,
//
// where I_mn integrates H0^(2)(k |r_m - r'|) over cell n. Cell integrals use the
// equal-area circle of radius a = delta / sqrt(pi):
//
//     I_mn = (2 pi a / k) J1(k a) H0^(2)(k R_mn),   I_mm = (2 pi a / k) H1^(2)(k a) - 4j / k^2.
//
// The line source field is (1/4j) H0^(2)(k rho); the -j omega mu prefactor is dropped.

namespace edofsim
{
    struct LineSource
    {
        Point position;
    };

    // Unit plane wave exp(-j k (x cos(angle) + y sin(angle))).
    struct PlaneWave
    {
        double angle = 0.0;
    };

    using SourceExcitation = std::variant<LineSource, PlaneWave>;

    class SingularityError : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    // Free-space scalar Green's function (1/4j) H0^(2)(k rho).
    cplx green2d(double rho);

    std::vector<cplx> incident_field(const SourceExcitation &src, std::span<const Point> points);
    cplx incident_field(const SourceExcitation &src, Point p);

    namespace cell_integrals
    {
        // Integral of H0^(2)(k |r - r_n|) over a cell of side delta seen from |r - r_n| = dist >= a.
        cplx off_cell(double delta, double dist);
        // Integral of H0^(2)(k |r_n - r'|) over the cell's own area.
        cplx self_cell(double delta);
    } // namespace cell_integrals

    // Discretized operator. Stores the lattice Toeplitz generator (one value per
    // offset |di|, |dj|), the per-cell contrast diagonal and the transformed circulant
    // embedding of the generator. Immutable and shareable after construction; an
    // empty grid yields a 0 x 0 operator.
    class ImpedanceOperator
    {
    public:
        explicit ImpedanceOperator(const Grid &grid);
        ~ImpedanceOperator();
        ImpedanceOperator(ImpedanceOperator &&) noexcept;
        ImpedanceOperator &operator=(ImpedanceOperator &&) noexcept;

        std::size_t size() const { return diag_.size(); }

        // Z_mn; symmetric in (m, n).
        cplx entry(std::size_t m, std::size_t n) const;
        // Contrast term eta / (j k (eps_m - 1)) of Z_mm.
        cplx contrast_term(std::size_t m) const { return diag_[m]; }
        // Free-space interaction between cells at lattice offset (di, dj).
        cplx kernel(int di, int dj) const;

        Eigen::MatrixXcd dense() const;

        // Z * x via the zero-padded circulant convolution.
        std::vector<cplx> apply(std::span<const cplx> x) const;
        // Z * x via an explicit loop over entries (reference path).
        std::vector<cplx> apply_dense(std::span<const cplx> x) const;

        // conj(Z) * x; Z is complex symmetric so this is Z^H * x.
        std::vector<cplx> apply_adjoint(std::span<const cplx> x) const;

    private:
        struct FftState;

        int nx_ = 0;
        int ny_ = 0;
        std::vector<int> ci_;
        std::vector<int> cj_;
        std::vector<cplx> diag_;
        std::vector<cplx> generator_; // nx * ny, index |di| + nx * |dj|
        std::unique_ptr<FftState> fft_;
    };

    // Rejects empty grids and eps_r == 1 cells.
    ImpedanceOperator assemble(const Grid &grid);

    enum class SolverMethod
    {
        Auto,
        DenseDirect,
        IterativeFft
    };

    enum class KrylovMethod
    {
        Cgnr,
        BiCgStab
    };

    struct SolverSettings
    {
        SolverMethod method = SolverMethod::Auto;
        KrylovMethod krylov = KrylovMethod::Cgnr;
        double tolerance = 1e-6;
        int max_iterations = 0;         // 0 selects 10 * unknowns
        std::size_t dense_limit = 3000; // Auto uses dense at or below this many cells
    };

    std::string to_string(SolverMethod m);
    std::string to_string(KrylovMethod m);

    struct SolveDiagnostics
    {
        std::string method; // "dense-lu", "cgnr-fft" or "bicgstab-fft"
        int iterations = 0;
        double residual = 0.0;
        double seconds = 0.0;
    };

    struct CurrentSolution
    {
        std::vector<cplx> currents;
        SolveDiagnostics diagnostics;
    };

    class SolverError : public std::runtime_error
    {
    public:
        SolverError(const std::string &what, double best_residual)
            : std::runtime_error(what), best_residual_(best_residual) {}
        double best_residual() const { return best_residual_; }

    private:
        double best_residual_;
    };

    // A prepared solver bound to one operator. The dense factorization is computed
    // once at construction and reused for every right-hand side; solve() is const
    // and may be called concurrently.
    class Solver
    {
    public:
        Solver(const ImpedanceOperator &op, SolverSettings settings);
        ~Solver();
        Solver(Solver &&) noexcept;

        SolverMethod method() const { return method_; }
        CurrentSolution solve(std::span<const cplx> rhs) const;

    private:
        CurrentSolution solve_dense(std::span<const cplx> rhs) const;
        CurrentSolution solve_cgnr(std::span<const cplx> rhs) const;
        CurrentSolution solve_bicgstab(std::span<const cplx> rhs) const;

        struct DenseState;

        const ImpedanceOperator *op_;
        SolverSettings settings_;
        SolverMethod method_;
        std::unique_ptr<DenseState> dense_;
    };

    // Incident field sampled at cell centers; throws if a line source sits in an occupied cell.
    std::vector<cplx> excitation(const SourceExcitation &src, const Grid &grid);

    CurrentSolution solve(const ImpedanceOperator &op, const SourceExcitation &src, const Grid &grid,
                          const SolverSettings &settings = {});

    // Radiation of the cell currents. Rows are evaluation points, columns are cells:
    // E_sca = -radiation_matrix * j. Points inside occupied cells throw std::invalid_argument.
    Eigen::MatrixXcd radiation_matrix(const Grid &grid, std::span<const Point> points);

    std::vector<cplx> scattered_field(const CurrentSolution &sol, const Grid &grid, std::span<const Point> points);
    std::vector<cplx> total_field(const SourceExcitation &src, const CurrentSolution &sol, const Grid &grid,
                                  std::span<const Point> points);

} // namespace edofsim

#endif
