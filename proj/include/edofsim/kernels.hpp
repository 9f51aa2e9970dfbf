// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#ifndef EDOFSIM_KERNELS_HPP
#define EDOFSIM_KERNELS_HPP

#include "edofsim/types.hpp"

#include <span>
#include <string_view>

// Data-parallel inner loops shared by the Krylov solvers and the FFT convolution.
// Every kernel has a portable scalar reference in `kernels::scalar` and, on x86-64,
// an AVX2/FMA variant in `kernels::avx2`. The free functions in `kernels` dispatch
// to the widest variant the running CPU supports (see `active_isa`).

namespace edofsim::kernels
{
    enum class Isa
    {
        Scalar,
        Avx2
    };

    // Table of kernel entry points for one instruction set.
    struct KernelTable
    {
        // a[i] *= b[i]
        void (*cmul_inplace)(std::span<cplx> a, std::span<const cplx> b);
        // y[i] += alpha * x[i]
        void (*axpy)(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
        // p[i] = r[i] + beta * p[i]
        void (*xpby)(std::span<const cplx> r, cplx beta, std::span<cplx> p);
        // sum conj(x[i]) * y[i]
        cplx (*dotc)(std::span<const cplx> x, std::span<const cplx> y);
        // sum |x[i]|^2
        double (*norm2)(std::span<const cplx> x);
        // y[i] = d[i] * x[i] + y[i]
        void (*diag_fma)(std::span<const cplx> d, std::span<const cplx> x, std::span<cplx> y);
    };

    namespace scalar
    {
        const KernelTable &table();
    }

    bool avx2_available();

    namespace avx2
    {
        // Only valid when avx2_available() is true.
        const KernelTable &table();
    }

    // The instruction set currently used by the dispatching functions. Defaults to the
    // best supported one; EDOFSIM_FORCE_SCALAR=1 in the environment pins scalar.
    Isa active_isa();
    void set_active_isa(Isa isa);
    std::string_view isa_name(Isa isa);

    const KernelTable &active_table();

    inline void cmul_inplace(std::span<cplx> a, std::span<const cplx> b) { active_table().cmul_inplace(a, b); }
    inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) { active_table().axpy(alpha, x, y); }
    inline void xpby(std::span<const cplx> r, cplx beta, std::span<cplx> p) { active_table().xpby(r, beta, p); }
    inline cplx dotc(std::span<const cplx> x, std::span<const cplx> y) { return active_table().dotc(x, y); }
    inline double norm2(std::span<const cplx> x) { return active_table().norm2(x); }
    inline void diag_fma(std::span<const cplx> d, std::span<const cplx> x, std::span<cplx> y) { active_table().diag_fma(d, x, y); }

} // namespace edofsim::kernels

#endif
