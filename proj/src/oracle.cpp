// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "edofsim/oracle.hpp"

#include "edofsim/special.hpp"

#include <cmath>
#include <stdexcept>

namespace edofsim
{
    namespace
    {
        constexpr double k0 = PhysicalConstants::k0;

        // j^{-m}
        cplx inv_j_power(int m)
        {
            switch (((m % 4) + 4) % 4)
            {
            case 0:
                return 1.0;
            case 1:
                return -kJ;
            case 2:
                return -1.0;
            default:
                return kJ;
            }
        }
    } // namespace

    int CylinderSeries::default_order(double radius) { return static_cast<int>(std::ceil(k0 * radius)) + 15; }

    CylinderSeries::CylinderSeries(double radius, double eps_r, int order)
        : radius_(radius), eps_r_(eps_r), order_(order < 0 ? default_order(radius) : order)
    {
        if (!(radius > 0.0))
            throw std::invalid_argument("cylinder radius must be positive");
        if (!(eps_r > 0.0))
            throw std::invalid_argument("cylinder series supports positive real permittivity only");

        const double k1 = k0 * std::sqrt(eps_r);
        const double x0 = k0 * radius, x1 = k1 * radius;
        a_.resize(static_cast<std::size_t>(2 * order_ + 1));
        b_.resize(a_.size());
        for (int m = -order_; m <= order_; ++m)
        {
            const double j0 = special::bessel_j(m, x0), j0p = special::bessel_j_prime(m, x0);
            const double j1 = special::bessel_j(m, x1), j1p = special::bessel_j_prime(m, x1);
            const cplx h0 = special::hankel2(m, x0), h0p = special::hankel2_prime(m, x0);

            // Continuity of E_z and its radial derivative at rho = R.
            const cplx num = k1 * j1p * j0 - k0 * j1 * j0p;
            const cplx den = k0 * j1 * h0p - k1 * j1p * h0;
            const cplx bm = num / den;

            const auto idx = static_cast<std::size_t>(m + order_);
            a_[idx] = inv_j_power(m) * bm;
            if (std::abs(j1) > 1e-12)
                b_[idx] = inv_j_power(m) * (j0 + bm * h0) / j1;
            else
                b_[idx] = inv_j_power(m) * k0 * (j0p + bm * h0p) / (k1 * j1p);
        }
    }

    cplx CylinderSeries::scattered_field(Point p) const
    {
        const double rho = std::hypot(p.x, p.y);
        if (rho < radius_)
            throw std::invalid_argument("cylinder series evaluated inside the cylinder");
        const double phi = std::atan2(p.y, p.x);
        cplx s = 0.0;
        for (int m = -order_; m <= order_; ++m)
            s += exterior_coefficient(m) * special::hankel2(m, k0 * rho) * std::exp(kJ * (m * phi));
        return s;
    }

    std::vector<cplx> CylinderSeries::scattered_field(std::span<const Point> points) const
    {
        std::vector<cplx> out;
        out.reserve(points.size());
        for (const Point &p : points)
            out.push_back(scattered_field(p));
        return out;
    }

    double CylinderSeries::truncation_ratio(Point p) const
    {
        const double rho = std::hypot(p.x, p.y);
        const double phi = std::atan2(p.y, p.x);
        const cplx sum = scattered_field(p);
        cplx last = 0.0;
        for (int m : {-order_, order_})
            last += exterior_coefficient(m) * special::hankel2(m, k0 * rho) * std::exp(kJ * (m * phi));
        const double mag = std::abs(sum);
        return mag > 0.0 ? std::abs(last) / mag : 0.0;
    }

} // namespace edofsim
