// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "edofsim/metrics.hpp"

#include "edofsim/special.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace edofsim
{
    Eigen::MatrixXcd correlation(const Eigen::MatrixXcd &h, CorrelationSide side)
    {
        if (h.size() == 0)
            throw std::invalid_argument("correlation: empty channel matrix");
        Eigen::MatrixXcd r = side == CorrelationSide::Receive ? Eigen::MatrixXcd(h * h.adjoint())
                                                              : Eigen::MatrixXcd(h.adjoint() * h);
        // Symmetrize away the rounding of the product.
        return 0.5 * (r + r.adjoint());
    }

    Eigen::VectorXd eigenvalues(const Eigen::MatrixXcd &r)
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eigenvalue decomposition failed");
        Eigen::VectorXd s = es.eigenvalues();
        std::sort(s.data(), s.data() + s.size(), std::greater<>());
        return s;
    }

    double edof(const Eigen::MatrixXcd &r)
    {
        const double tr = r.trace().real();
        const double fro2 = r.squaredNorm();
        if (!(tr > 0.0) || !(fro2 > 0.0))
            throw std::domain_error("EDOF undefined for a correlation matrix with zero trace");
        return tr * tr / fro2;
    }

    double edof_from_eigenvalues(std::span<const double> sigma)
    {
        double s1 = 0.0, s2 = 0.0;
        for (double s : sigma)
        {
            s1 += s;
            s2 += s * s;
        }
        if (!(s1 > 0.0))
            throw std::domain_error("EDOF undefined for a zero eigenvalue sum");
        return s1 * s1 / s2;
    }

    std::string to_string(FieldNormalization n)
    {
        switch (n)
        {
        case FieldNormalization::UnitPeak:
            return "unit_peak";
        case FieldNormalization::UnitNorm:
            return "unit_norm";
        case FieldNormalization::Raw:
            return "raw";
        }
        return "?";
    }

    double field_correlation(std::span<const cplx> fm, std::span<const cplx> fn, FieldNormalization norm)
    {
        if (fm.size() != fn.size())
            throw std::invalid_argument("field_correlation: vectors differ in length");
        const auto scale = [&](std::span<const cplx> f) {
            double peak = 0.0, sq = 0.0;
            for (const cplx &v : f)
            {
                peak = std::max(peak, std::abs(v));
                sq += std::norm(v);
            }
            if (!(peak > 0.0))
                throw std::invalid_argument("field_correlation: zero field vector");
            switch (norm)
            {
            case FieldNormalization::UnitPeak:
                return 1.0 / peak;
            case FieldNormalization::UnitNorm:
                return 1.0 / std::sqrt(sq);
            case FieldNormalization::Raw:
                break;
            }
            return 1.0;
        };
        const double sm = scale(fm), sn = scale(fn);
        cplx acc = 0.0;
        for (std::size_t i = 0; i < fm.size(); ++i)
            acc += std::conj(fm[i]) * fn[i];
        return std::abs(acc) * sm * sn;
    }

    cplx clarke_autocorrelation(double xi, int plane_waves)
    {
        if (plane_waves < 1)
            throw std::invalid_argument("clarke_autocorrelation: need at least one plane wave");
        if (xi < 0.0)
            throw std::invalid_argument("clarke_autocorrelation: negative separation");
        cplx s = 0.0;
        for (int n = 1; n <= plane_waves; ++n)
        {
            const double alpha = std::numbers::pi * n / plane_waves;
            s += std::exp(kJ * (PhysicalConstants::k0 * std::cos(alpha) * xi));
        }
        return s / static_cast<double>(plane_waves);
    }

    Eigen::MatrixXd clarke_correlation_matrix(const ArrayGeometry &array)
    {
        const auto n = static_cast<Eigen::Index>(array.size());
        Eigen::MatrixXd r(n, n);
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = 0; q < n; ++q)
                r(p, q) = special::bessel_j(0, PhysicalConstants::k0 *
                                                    distance(array.elements[static_cast<std::size_t>(p)],
                                                             array.elements[static_cast<std::size_t>(q)]));
        return r;
    }

    double rayleigh_baseline_edof(const ArrayGeometry &tx, const ArrayGeometry &rx)
    {
        const Eigen::MatrixXcd rt = clarke_correlation_matrix(tx).cast<cplx>();
        const Eigen::MatrixXcd rr = clarke_correlation_matrix(rx).cast<cplx>();
        return std::sqrt(edof(rt) * edof(rr));
    }

} // namespace edofsim
