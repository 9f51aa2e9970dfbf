// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#ifndef EDOFSIM_METRICS_HPP
#define EDOFSIM_METRICS_HPP

#include "edofsim/channel.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>

namespace edofsim
{
    enum class CorrelationSide
    {
        Receive, // H H^dagger
        Transmit // H^dagger H
    };

    Eigen::MatrixXcd correlation(const Eigen::MatrixXcd &h, CorrelationSide side = CorrelationSide::Receive);

    // Eigenvalues of a Hermitian matrix, descending.
    Eigen::VectorXd eigenvalues(const Eigen::MatrixXcd &r);

    // (tr R / ||R||_F)^2. Throws std::domain_error when the trace vanishes.
    double edof(const Eigen::MatrixXcd &r);
    // (sum s)^2 / sum s^2 over an eigenvalue list.
    double edof_from_eigenvalues(std::span<const double> sigma);

    enum class FieldNormalization
    {
        UnitPeak, // each vector scaled so max |f| = 1
        UnitNorm, // each vector scaled to unit 2-norm
        Raw
    };

    std::string to_string(FieldNormalization n);

    // |<f_m, f_n>| after normalization. Throws for unequal lengths or all-zero vectors.
    double field_correlation(std::span<const cplx> fm, std::span<const cplx> fn,
                             FieldNormalization norm = FieldNormalization::UnitPeak);

    // (1/N) sum_{n=1..N} exp(j k0 cos(pi n / N) xi), the finite plane-wave sum of the
    // Clarke model; tends to J0(k0 xi).
    cplx clarke_autocorrelation(double xi, int plane_waves);

    // One-sided spatial correlation J0(k0 |p - q|) between array elements.
    Eigen::MatrixXd clarke_correlation_matrix(const ArrayGeometry &array);

    // Rich-scattering reference: Kronecker channel H = Rr^(1/2) G Rt^(1/2) with i.i.d. G.
    // Its mean correlation E[H H^dagger] = tr(Rt) Rr (and E[H^dagger H] = tr(Rr) Rt);
    // the reported value is the geometric mean of the EDOF of the two sides, which
    // equals the square root of the EDOF of the eigenvalue products of Rt (x) Rr.
    double rayleigh_baseline_edof(const ArrayGeometry &tx, const ArrayGeometry &rx);

} // namespace edofsim

#endif
