// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#ifndef EDOFSIM_ORACLE_HPP
#define EDOFSIM_ORACLE_HPP

#include "edofsim/types.hpp"

#include <span>
#include <vector>

namespace edofsim
{
    // Eigenfunction solution for a unit TM plane wave exp(-j k x) hitting a homogeneous
    // circular cylinder centered on the origin. Exterior field:
    //
    //     E_sca = sum_{m=-M..M} a_m H_m^(2)(k rho) e^{j m phi}
    //     E_int = sum_{m=-M..M} b_m J_m(k sqrt(eps) rho) e^{j m phi}
    //
    // Real permittivity only; lossy cylinders are not covered.
    class CylinderSeries
    {
    public:
        // order < 0 selects ceil(k R) + 15.
        CylinderSeries(double radius, double eps_r, int order = -1);

        static int default_order(double radius);

        double radius() const { return radius_; }
        double eps_r() const { return eps_r_; }
        int order() const { return order_; }

        cplx exterior_coefficient(int m) const { return a_[static_cast<std::size_t>(m + order_)]; }
        cplx interior_coefficient(int m) const { return b_[static_cast<std::size_t>(m + order_)]; }

        // Throws std::invalid_argument for points inside the cylinder.
        cplx scattered_field(Point p) const;
        std::vector<cplx> scattered_field(std::span<const Point> points) const;

        // Largest |last retained term| / |sum| seen by scattered_field; > 1e-10 flags
        // an under-resolved truncation.
        double truncation_ratio(Point p) const;

    private:
        double radius_;
        double eps_r_;
        int order_;
        std::vector<cplx> a_;
        std::vector<cplx> b_;
    };

} // namespace edofsim

#endif
