// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#ifndef EDOFSIM_SPECIAL_HPP
#define EDOFSIM_SPECIAL_HPP

#include "edofsim/types.hpp"

namespace edofsim::special
{
    // Integer-order Bessel functions of real argument, x > 0 for the Y / H variants.
    // Negative orders follow the reflection J_{-n} = (-1)^n J_n.
    double bessel_j(int n, double x);
    double bessel_y(int n, double x);

    // Hankel function of the second kind, H_n^(2)(x) = J_n(x) - j Y_n(x).
    cplx hankel2(int n, double x);

    // Derivatives with respect to the argument.
    double bessel_j_prime(int n, double x);
    cplx hankel2_prime(int n, double x);

} // namespace edofsim::special

#endif
