// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "edofsim/special.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace edofsim::special
{
    namespace
    {
        double reflect_sign(int n) { return (n < 0 && (std::abs(n) % 2 == 1)) ? -1.0 : 1.0; }
    } // namespace

    double bessel_j(int n, double x)
    {
        if (x < 0.0)
            throw std::domain_error("bessel_j: negative argument");
        return reflect_sign(n) * std::cyl_bessel_j(static_cast<double>(std::abs(n)), x);
    }

    double bessel_y(int n, double x)
    {
        if (!(x > 0.0))
            throw std::domain_error("bessel_y: argument must be positive");
        return reflect_sign(n) * std::cyl_neumann(static_cast<double>(std::abs(n)), x);
    }

    cplx hankel2(int n, double x)
    {
        return {bessel_j(n, x), -bessel_y(n, x)};
    }

    double bessel_j_prime(int n, double x)
    {
        return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
    }

    cplx hankel2_prime(int n, double x)
    {
        return 0.5 * (hankel2(n - 1, x) - hankel2(n + 1, x));
    }

} // namespace edofsim::special
