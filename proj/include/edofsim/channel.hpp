// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#ifndef EDOFSIM_CHANNEL_HPP
#define EDOFSIM_CHANNEL_HPP

#include "edofsim/vie.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace edofsim
{
    // Uniform linear array, endpoints included.
    struct ArrayGeometry
    {
        Point center;
        double length = 0.0;
        double orientation = 0.0; // radians from +x
        std::vector<Point> elements;

        std::size_t size() const { return elements.size(); }
    };

    // 2L/lambda0 + 1 elements at spacing L/(N-1). L must be a positive multiple of lambda0/2.
    ArrayGeometry build_array(Point center, double length, double orientation);

    // Vertical array at x = x_position, the layout every preset uses.
    ArrayGeometry vertical_array(double x_position, double length);

    struct ChannelProvenance
    {
        std::uint64_t scene_hash = 0;
        int cells_per_lambda0 = 0;
        std::size_t unknowns = 0;
        std::string solver;
        double tolerance = 0.0;
    };

    struct ChannelMatrix
    {
        Eigen::MatrixXcd h; // rows: receivers, columns: sources
        ChannelProvenance provenance;
        std::vector<SolveDiagnostics> diagnostics; // one per source column
    };

    class ChannelError : public std::runtime_error
    {
    public:
        ChannelError(const std::string &what, std::size_t source_index)
            : std::runtime_error(what), source_index_(source_index) {}
        std::size_t source_index() const { return source_index_; }

    private:
        std::size_t source_index_;
    };

    struct ChannelOptions
    {
        SolverSettings solver;
        unsigned threads = 1;
        std::uint64_t scene_hash = 0;
        int cells_per_lambda0 = 0;
    };

    // Prepared pipeline for one grid: operator, solver and receiver radiation matrix.
    // Field evaluations for several sources reuse the same factorization.
    class FieldEngine
    {
    public:
        FieldEngine(const Grid &grid, const SolverSettings &settings);
        ~FieldEngine();

        const Grid &grid() const { return *grid_; }
        bool free_space() const { return grid_->empty(); }
        // Method actually used ("none" in free space).
        std::string method_name() const;

        CurrentSolution solve(const SourceExcitation &src) const;
        std::vector<cplx> total_field(const SourceExcitation &src, const CurrentSolution &sol,
                                      std::span<const Point> points) const;

    private:
        const Grid *grid_;
        std::unique_ptr<ImpedanceOperator> op_;
        std::unique_ptr<Solver> solver_;
        KrylovMethod krylov_;
    };

    // Column n is the total field at all receivers from a unit line source at tx[n].
    // The operator is assembled once and, on the dense path, factorized once.
    ChannelMatrix build_channel(const FieldEngine &engine, const ArrayGeometry &tx, const ArrayGeometry &rx,
                                const ChannelOptions &options = {});
    ChannelMatrix build_channel(const Grid &grid, const ArrayGeometry &tx, const ArrayGeometry &rx,
                                const ChannelOptions &options = {});
    ChannelMatrix build_channel(const Scene &scene, int cells_per_lambda0, const ArrayGeometry &tx,
                                const ArrayGeometry &rx, const SolverSettings &settings = {}, unsigned threads = 1);

    void write_channel_csv(std::ostream &os, const ChannelMatrix &ch);

} // namespace edofsim

#endif
