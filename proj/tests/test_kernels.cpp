// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "doctest.h"
#include "support.hpp"

#include "edofsim/kernels.hpp"
#include "edofsim/vie.hpp"

#include <cstdlib>
#include <cstring>

using namespace edofsim;
using namespace edofsim::testing;
namespace kn = edofsim::kernels;

namespace
{
    bool close(std::span<const cplx> a, std::span<const cplx> b, double tol)
    {
        return rel_l2(a, b) <= tol;
    }

    bool forced_scalar()
    {
        const char *v = std::getenv("EDOFSIM_FORCE_SCALAR");
        return v != nullptr && v[0] != '\0' && std::strcmp(v, "0") != 0;
    }

    // Restores the dispatch choice on scope exit.
    struct IsaGuard
    {
        kn::Isa saved = kn::active_isa();
        ~IsaGuard() { kn::set_active_isa(saved); }
    };
} // namespace

TEST_SUITE("kernels")
{
    TEST_CASE("dispatch honours the environment override")
    {
        if (forced_scalar())
            CHECK(kn::active_isa() == kn::Isa::Scalar);
        else
            CHECK(kn::active_isa() == (kn::avx2_available() ? kn::Isa::Avx2 : kn::Isa::Scalar));
        MESSAGE("active isa: " << kn::isa_name(kn::active_isa()));
    }

    TEST_CASE("scalar and avx2 variants agree on random inputs")
    {
        if (!kn::avx2_available())
        {
            MESSAGE("avx2 not available, equivalence skipped");
            return;
        }
        const auto &s = kn::scalar::table();
        const auto &v = kn::avx2::table();
        std::mt19937_64 rng(20240611);
        std::uniform_int_distribution<std::size_t> len(0, 67);

        for (int trial = 0; trial < 200; ++trial)
        {
            const std::size_t n = trial < 8 ? static_cast<std::size_t>(trial) : len(rng);
            CAPTURE(n);
            const auto x = random_vector(n, rng);
            const auto y = random_vector(n, rng);
            const auto d = random_vector(n, rng);
            const cplx alpha = random_vector(1, rng)[0];

            auto a1 = x, a2 = x;
            s.cmul_inplace(a1, y);
            v.cmul_inplace(a2, y);
            CHECK(close(a2, a1, 1e-14));

            auto y1 = y, y2 = y;
            s.axpy(alpha, x, y1);
            v.axpy(alpha, x, y2);
            CHECK(close(y2, y1, 1e-14));

            auto p1 = y, p2 = y;
            s.xpby(x, alpha, p1);
            v.xpby(x, alpha, p2);
            CHECK(close(p2, p1, 1e-14));

            auto f1 = y, f2 = y;
            s.diag_fma(d, x, f1);
            v.diag_fma(d, x, f2);
            CHECK(close(f2, f1, 1e-14));

            const cplx dz1 = s.dotc(x, y), dz2 = v.dotc(x, y);
            CHECK(std::abs(dz1 - dz2) <= 1e-13 * std::max(1.0, std::sqrt(s.norm2(x) * s.norm2(y))));
            CHECK(v.norm2(x) == doctest::Approx(s.norm2(x)).epsilon(1e-13));
        }
    }

    TEST_CASE("scalar kernels match their definitions")
    {
        std::mt19937_64 rng(7);
        const auto x = random_vector(13, rng);
        const auto y = random_vector(13, rng);
        const auto &s = kn::scalar::table();
        cplx dot = 0.0;
        double nn = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            dot += std::conj(x[i]) * y[i];
            nn += std::norm(x[i]);
        }
        CHECK(std::abs(s.dotc(x, y) - dot) < 1e-13);
        CHECK(s.norm2(x) == doctest::Approx(nn).epsilon(1e-14));
        auto a = x;
        s.cmul_inplace(a, y);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(std::abs(a[i] - x[i] * y[i]) < 1e-14);
    }

    TEST_CASE("iterative solves are independent of the kernel variant")
    {
        IsaGuard guard;
        std::vector<Cell> cells;
        const double delta = 0.1;
        for (int j = 0; j < 9; ++j)
            for (int i = 0; i < 9; ++i)
                if ((i - 4) * (i - 4) + (j - 4) * (j - 4) <= 16)
                    cells.push_back({i, j, {(i + 0.5) * delta, (j + 0.5) * delta}, cplx{2.5, -0.1}});
        const Grid grid(delta, {0.0, 0.0}, 9, 9, cells);
        const auto op = assemble(grid);
        SolverSettings st;
        st.method = SolverMethod::IterativeFft;
        st.tolerance = 1e-10;

        std::vector<std::vector<cplx>> results;
        for (kn::Isa isa : {kn::Isa::Scalar, kn::Isa::Avx2})
        {
            kn::set_active_isa(isa);
            for (KrylovMethod km : {KrylovMethod::Cgnr, KrylovMethod::BiCgStab})
            {
                st.krylov = km;
                results.push_back(solve(op, PlaneWave{0.3}, grid, st).currents);
            }
        }
        CHECK(close(results[2], results[0], 1e-9));
        CHECK(close(results[3], results[1], 1e-9));
    }
}
