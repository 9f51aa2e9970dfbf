// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#ifndef EDOFSIM_TESTS_SUPPORT_HPP
#define EDOFSIM_TESTS_SUPPORT_HPP

#include "edofsim/types.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace edofsim::testing
{
    // ||a - b|| / ||b||
    inline double rel_l2(std::span<const cplx> a, std::span<const cplx> b)
    {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            num += std::norm(a[i] - b[i]);
            den += std::norm(b[i]);
        }
        return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }

    inline std::vector<cplx> random_vector(std::size_t n, std::mt19937_64 &rng)
    {
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<cplx> v(n);
        for (auto &x : v)
            x = {g(rng), g(rng)};
        return v;
    }

    // Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
    inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n)
    {
        std::vector<double> x(static_cast<std::size_t>(n)), w(x.size());
        for (int i = 0; i < n; ++i)
        {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it)
            {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= n; ++k)
                {
                    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (z * p1 - p0) / (z * z - 1.0);
                const double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-15)
                    break;
            }
            x[static_cast<std::size_t>(i)] = z;
            w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        return {x, w};
    }

    // Ascending power series for J0 and Y0, independent of the library's Bessel routines.
    inline double series_j0(double x)
    {
        double term = 1.0, sum = 1.0;
        const double q = -0.25 * x * x;
        for (int k = 1; k < 80; ++k)
        {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
        }
        return sum;
    }

    inline double series_y0(double x)
    {
        constexpr double gamma = 0.57721566490153286061;
        double term = 1.0, harmonic = 0.0, tail = 0.0;
        const double q = -0.25 * x * x;
        for (int k = 1; k < 80; ++k)
        {
            term *= q / (static_cast<double>(k) * k);
            harmonic += 1.0 / k;
            tail += term * harmonic;
        }
        return (2.0 / std::numbers::pi) * ((std::log(0.5 * x) + gamma) * series_j0(x) - tail);
    }
} // namespace edofsim::testing

#endif
