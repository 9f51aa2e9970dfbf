// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "edofsim/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace edofsim::kernels
{
    namespace scalar
    {
        namespace
        {
            void cmul_inplace(std::span<cplx> a, std::span<const cplx> b)
            {
                for (std::size_t i = 0; i < a.size(); ++i)
                    a[i] *= b[i];
            }

            void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y)
            {
                for (std::size_t i = 0; i < x.size(); ++i)
                    y[i] += alpha * x[i];
            }

            void xpby(std::span<const cplx> r, cplx beta, std::span<cplx> p)
            {
                for (std::size_t i = 0; i < r.size(); ++i)
                    p[i] = r[i] + beta * p[i];
            }

            cplx dotc(std::span<const cplx> x, std::span<const cplx> y)
            {
                cplx s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i)
                    s += std::conj(x[i]) * y[i];
                return s;
            }

            double norm2(std::span<const cplx> x)
            {
                double s = 0.0;
                for (const auto &v : x)
                    s += std::norm(v);
                return s;
            }

            void diag_fma(std::span<const cplx> d, std::span<const cplx> x, std::span<cplx> y)
            {
                for (std::size_t i = 0; i < x.size(); ++i)
                    y[i] += d[i] * x[i];
            }

            const KernelTable kTable{cmul_inplace, axpy, xpby, dotc, norm2, diag_fma};
        } // namespace

        const KernelTable &table() { return kTable; }
    } // namespace scalar

#if !defined(EDOFSIM_HAVE_AVX2)
    bool avx2_available() { return false; }
    namespace avx2
    {
        const KernelTable &table() { return scalar::table(); }
    }
#else
    bool avx2_available()
    {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }
#endif

    namespace
    {
        Isa initial_isa()
        {
            const char *force = std::getenv("EDOFSIM_FORCE_SCALAR");
            if (force != nullptr && std::strcmp(force, "0") != 0 && force[0] != '\0')
                return Isa::Scalar;
            return avx2_available() ? Isa::Avx2 : Isa::Scalar;
        }

        std::atomic<Isa> &isa_slot()
        {
            static std::atomic<Isa> slot{initial_isa()};
            return slot;
        }
    } // namespace

    Isa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

    void set_active_isa(Isa isa)
    {
        if (isa == Isa::Avx2 && !avx2_available())
            isa = Isa::Scalar;
        isa_slot().store(isa, std::memory_order_relaxed);
    }

    std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

    const KernelTable &active_table()
    {
        return active_isa() == Isa::Avx2 ? avx2::table() : scalar::table();
    }

} // namespace edofsim::kernels
