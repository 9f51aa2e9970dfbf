// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#ifndef EDOFSIM_TYPES_HPP
#define EDOFSIM_TYPES_HPP

#include <cmath>
#include <complex>
#include <numbers>

namespace edofsim
{
    using cplx = std::complex<double>;

    inline constexpr cplx kJ{0.0, 1.0};

    // All lengths are measured in free-space wavelengths.
    struct PhysicalConstants
    {
        static constexpr double lambda0 = 1.0;
        static constexpr double k0 = 2.0 * std::numbers::pi / lambda0;
        static constexpr double eta0 = 1.0; // normalized wave impedance
    };

    struct Point
    {
        double x = 0.0;
        double y = 0.0;

        friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
        friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
        friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
        friend bool operator==(Point a, Point b) = default;
    };

    inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

    struct BoundingBox
    {
        Point min;
        Point max;

        bool empty() const { return !(max.x > min.x && max.y > min.y); }
    };

} // namespace edofsim

#endif
