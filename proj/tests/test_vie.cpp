// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "doctest.h"
#include "support.hpp"

#include "edofsim/scenarios.hpp"
#include "edofsim/vie.hpp"

#include <algorithm>
#include <cmath>

using namespace edofsim;
using namespace edofsim::testing;

namespace
{
    constexpr double k0 = PhysicalConstants::k0;

    Grid block_grid(int nx, int ny, double delta, cplx eps)
    {
        std::vector<Cell> cells;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                cells.push_back({i, j, {(i + 0.5) * delta, (j + 0.5) * delta}, eps});
        return Grid(delta, {0.0, 0.0}, nx, ny, cells);
    }

    Grid disk_grid(double radius, cplx eps, int cpl, Point center = {0.0, 0.0})
    {
        Scene s;
        s.add(Disk{center, radius}, eps);
        return rasterize(s, cpl);
    }

    std::vector<cplx> residual(const ImpedanceOperator &op, std::span<const cplx> j, std::span<const cplx> rhs)
    {
        auto r = op.apply_dense(j);
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] -= rhs[i];
        return r;
    }

    double norm(std::span<const cplx> v)
    {
        double s = 0.0;
        for (const auto &x : v)
            s += std::norm(x);
        return std::sqrt(s);
    }

    SolverSettings dense_settings(double tol = 1e-10)
    {
        SolverSettings st;
        st.method = SolverMethod::DenseDirect;
        st.tolerance = tol;
        return st;
    }

    SolverSettings fft_settings(KrylovMethod km, double tol)
    {
        SolverSettings st;
        st.method = SolverMethod::IterativeFft;
        st.krylov = km;
        st.tolerance = tol;
        return st;
    }

    // Outward power through the circle |r - c| = radius, up to the common factor 1/(2 omega mu):
    // -(1/k) * closed integral of Im(conj(E) dE/drho).
    double outward_flux(const SourceExcitation &src, const CurrentSolution &sol, const Grid &grid, Point c,
                        double radius, int samples = 720)
    {
        const double h = 1e-4;
        std::vector<Point> inner, outer;
        for (int s = 0; s < samples; ++s)
        {
            const double phi = 2.0 * std::numbers::pi * s / samples;
            const Point u{std::cos(phi), std::sin(phi)};
            inner.push_back(c + (radius - h) * u);
            outer.push_back(c + (radius + h) * u);
        }
        const auto ei = total_field(src, sol, grid, inner);
        const auto eo = total_field(src, sol, grid, outer);
        double flux = 0.0;
        for (int s = 0; s < samples; ++s)
        {
            const cplx e = 0.5 * (ei[s] + eo[s]);
            const cplx de = (eo[s] - ei[s]) / (2.0 * h);
            flux += std::imag(std::conj(e) * de);
        }
        return -flux * (2.0 * std::numbers::pi * radius / samples) / k0;
    }
} // namespace

TEST_SUITE("impedance operator")
{
    TEST_CASE("off-diagonal entries are symmetric")
    {
        const Grid g = disk_grid(0.6, cplx{3.0, -0.2}, 10);
        const auto op = assemble(g);
        for (std::size_t m = 0; m < op.size(); m += 3)
            for (std::size_t n = 0; n < op.size(); n += 5)
                CHECK(op.entry(m, n) == op.entry(n, m));
    }

    TEST_CASE("kernel depends only on the separation")
    {
        const Grid g = block_grid(8, 8, 0.1, 2.0);
        const auto op = assemble(g);
        CHECK(op.kernel(3, 4) == op.kernel(4, 3));
        CHECK(op.kernel(-3, 4) == op.kernel(3, -4));
        CHECK(std::abs(op.kernel(3, 4) - op.kernel(5, 0)) <= 1e-14 * std::abs(op.kernel(5, 0)));
        // cells (0,0)-(3,4) and (2,1)-(7,1): both 5 cells apart
        const auto idx = [&](int i, int j) { return static_cast<std::size_t>(i + 8 * j); };
        CHECK(std::abs(op.entry(idx(0, 0), idx(3, 4)) - op.entry(idx(2, 1), idx(7, 1))) <=
              1e-14 * std::abs(op.entry(idx(2, 1), idx(7, 1))));
        const cplx expected = (k0 / 4.0) * cell_integrals::off_cell(0.1, 0.5);
        CHECK(std::abs(op.kernel(5, 0) - expected) <= 1e-14 * std::abs(expected));
    }

    TEST_CASE("contrast term grows without bound as the contrast vanishes")
    {
        double previous = 0.0;
        for (double d : {1e-1, 1e-3, 1e-6, 1e-9})
        {
            const auto op = assemble(block_grid(1, 1, 0.1, cplx{1.0 + d, 0.0}));
            const double t = std::abs(op.contrast_term(0));
            CHECK(t > previous);
            CHECK(t == doctest::Approx(1.0 / (k0 * d)).epsilon(1e-6));
            previous = t;
        }
    }

    TEST_CASE("contrast term ratio between metal surrogate and dielectric")
    {
        const auto metal = assemble(block_grid(1, 1, 0.1, kSurrogateMetalEpsR));
        const auto diel = assemble(block_grid(1, 1, 0.1, 3.0));
        const double expected = std::abs(cplx{2.0, 0.0}) / std::abs(cplx{0.0, -1e4});
        CHECK(std::abs(metal.contrast_term(0)) / std::abs(diel.contrast_term(0)) ==
              doctest::Approx(expected).epsilon(1e-12));
        const cplx direct = 1.0 / (kJ * k0 * (cplx{3.0, 0.0} - 1.0));
        CHECK(std::abs(diel.contrast_term(0) - direct) < 1e-14);
    }

    TEST_CASE("apply of zero is zero and a single cell is its own entry")
    {
        const auto op = assemble(disk_grid(0.4, 2.0, 10));
        const std::vector<cplx> zero(op.size(), 0.0);
        for (const auto &v : op.apply(zero))
            CHECK(v == cplx{0.0, 0.0});

        const auto one = assemble(block_grid(1, 1, 0.05, 4.0));
        const std::vector<cplx> unit{1.0};
        const auto y = one.apply(unit);
        REQUIRE(y.size() == 1);
        CHECK(std::abs(y[0] - one.entry(0, 0)) < 1e-14 * std::abs(one.entry(0, 0)));
        const cplx z11 = one.contrast_term(0) + (k0 / 4.0) * cell_integrals::self_cell(0.05);
        CHECK(std::abs(one.entry(0, 0) - z11) < 1e-14 * std::abs(z11));
    }

    TEST_CASE("FFT and dense matvec agree")
    {
        std::mt19937_64 rng(99);
        SUBCASE("full 20 x 20 block")
        {
            const auto op = assemble(block_grid(20, 20, 0.1, cplx{2.0, -0.3}));
            const auto x = random_vector(op.size(), rng);
            CHECK(rel_l2(op.apply(x), op.apply_dense(x)) <= 1e-10);
        }
        SUBCASE("sparse occupancy")
        {
            const auto g = rasterize(preset_scene("cavity", {{"Sc", 3.0}}, MetalContrast::Surrogate), 5);
            const auto op = assemble(g);
            const auto x = random_vector(op.size(), rng);
            CHECK(rel_l2(op.apply(x), op.apply_dense(x)) <= 1e-10);
        }
        SUBCASE("dense materialization matches entries")
        {
            const auto op = assemble(disk_grid(0.3, 3.0, 10));
            const auto z = op.dense();
            for (std::size_t m = 0; m < op.size(); ++m)
                for (std::size_t n = 0; n < op.size(); ++n)
                {
                    const auto em = static_cast<Eigen::Index>(m), en = static_cast<Eigen::Index>(n);
                    CHECK(z(em, en) == op.entry(m, n));
                }
        }
    }

    TEST_CASE("adjoint apply satisfies the inner-product identity")
    {
        std::mt19937_64 rng(5);
        const auto op = assemble(disk_grid(0.5, cplx{4.0, -1.0}, 10));
        const auto x = random_vector(op.size(), rng);
        const auto y = random_vector(op.size(), rng);
        const auto zx = op.apply(x);
        const auto zhy = op.apply_adjoint(y);
        cplx lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            lhs += std::conj(y[i]) * zx[i];
            rhs += std::conj(zhy[i]) * x[i];
        }
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
    }

    TEST_CASE("dimension and grid errors")
    {
        const auto op = assemble(block_grid(2, 2, 0.1, 2.0));
        const std::vector<cplx> bad(3);
        CHECK_THROWS_AS(op.apply(bad), std::invalid_argument);
        CHECK_THROWS_AS(op.apply_dense(bad), std::invalid_argument);
        CHECK_THROWS_AS(assemble(Grid{}), std::invalid_argument);
        CHECK_THROWS_AS(assemble(block_grid(2, 2, 0.1, 1.0)), std::invalid_argument);
    }
}

TEST_SUITE("solve")
{
    TEST_CASE("free space gives an empty solution")
    {
        const Grid g;
        const ImpedanceOperator op(g);
        const auto sol = solve(op, LineSource{{0.0, 0.0}}, g);
        CHECK(sol.currents.empty());
        CHECK(sol.diagnostics.iterations == 0);
    }

    TEST_CASE("single weak cell matches the first-order value")
    {
        const Grid g = block_grid(1, 1, 0.05, cplx{1.01, 0.0});
        const auto op = assemble(g);
        const PlaneWave pw{0.0};
        const auto sol = solve(op, pw, g, dense_settings());
        const cplx born = incident_field(pw, g.cells()[0].center) / op.contrast_term(0);
        CHECK(std::abs(sol.currents[0] - born) <= 0.01 * std::abs(born));
    }

    TEST_CASE("all methods meet the residual contract")
    {
        const Grid g = disk_grid(0.8, cplx{3.0, -0.5}, 10);
        const auto op = assemble(g);
        const LineSource src{{-2.0, 0.3}};
        const auto rhs = excitation(src, g);
        for (const auto &st : {dense_settings(1e-6), fft_settings(KrylovMethod::Cgnr, 1e-6),
                               fft_settings(KrylovMethod::BiCgStab, 1e-6)})
        {
            const auto sol = solve(op, src, g, st);
            CAPTURE(sol.diagnostics.method);
            CHECK(norm(residual(op, sol.currents, rhs)) / norm(rhs) <= 1e-6);
            CHECK(sol.diagnostics.residual <= 1e-6);
        }
        CHECK(solve(op, src, g, dense_settings()).diagnostics.method == "dense-lu");
        CHECK(solve(op, src, g, fft_settings(KrylovMethod::Cgnr, 1e-6)).diagnostics.method == "cgnr-fft");
        CHECK(solve(op, src, g, fft_settings(KrylovMethod::BiCgStab, 1e-6)).diagnostics.method == "bicgstab-fft");
    }

    TEST_CASE("auto selection follows the dense limit")
    {
        const Grid g = disk_grid(0.5, 2.0, 10);
        const auto op = assemble(g);
        SolverSettings st;
        CHECK(Solver(op, st).method() == SolverMethod::DenseDirect);
        st.dense_limit = 10;
        CHECK(Solver(op, st).method() == SolverMethod::IterativeFft);
    }

    TEST_CASE("dense and iterative solutions agree on twin cylinders")
    {
        const Grid g = rasterize(preset_scene("twin_cylinders", {{"R", 0.9}, {"eps_r", 3.0}}), 10);
        const auto op = assemble(g);
        const LineSource src{{-5.0, 0.5}};
        const auto ref = solve(op, src, g, dense_settings(1e-12));
        for (KrylovMethod km : {KrylovMethod::Cgnr, KrylovMethod::BiCgStab})
        {
            const auto it = solve(op, src, g, fft_settings(km, 1e-8));
            CAPTURE(it.diagnostics.method);
            CHECK(rel_l2(it.currents, ref.currents) <= 1e-6);
        }
    }

    TEST_CASE("dense and FFT agree on assorted grids")
    {
        std::vector<Grid> grids;
        grids.push_back(disk_grid(1.0, 3.0, 15));
        grids.push_back(rasterize(preset_scene("keyhole", {{"S", 1.0}, {"L", 2.0}, {"D", 4.0}, {"height", 6.0}},
                                               MetalContrast::Surrogate),
                                  10));
        grids.push_back(block_grid(7, 31, 0.1, cplx{5.0, -2.0}));
        for (const auto &g : grids)
        {
            REQUIRE(g.size() <= 2500);
            const auto op = assemble(g);
            const PlaneWave src{0.4};
            const auto a = solve(op, src, g, dense_settings(1e-12));
            const auto b = solve(op, src, g, fft_settings(KrylovMethod::BiCgStab, 1e-9));
            CAPTURE(g.size());
            CHECK(rel_l2(b.currents, a.currents) <= 1e-6);
        }
    }

    TEST_CASE("solve is linear in the excitation")
    {
        const Grid g = disk_grid(0.6, cplx{2.0, -0.1}, 10);
        const auto op = assemble(g);
        const Solver solver(op, dense_settings());
        const auto e = excitation(LineSource{{1.5, 0.2}}, g);
        const cplx c{-2.5, 0.75};
        std::vector<cplx> ce(e.size());
        for (std::size_t i = 0; i < e.size(); ++i)
            ce[i] = c * e[i];
        const auto j1 = solver.solve(e).currents;
        const auto j2 = solver.solve(ce).currents;
        std::vector<cplx> cj(j1.size());
        for (std::size_t i = 0; i < j1.size(); ++i)
            cj[i] = c * j1[i];
        CHECK(rel_l2(j2, cj) <= 1e-13);
    }

    TEST_CASE("non-convergence reports the best residual")
    {
        const Grid g = disk_grid(1.0, cplx{6.0, 0.0}, 10);
        const auto op = assemble(g);
        auto st = fft_settings(KrylovMethod::Cgnr, 1e-12);
        st.max_iterations = 3;
        try
        {
            (void)solve(op, PlaneWave{0.0}, g, st);
            FAIL("expected SolverError");
        }
        catch (const SolverError &e)
        {
            CHECK(e.best_residual() > 1e-12);
            CHECK(e.best_residual() < 1.0);
        }
    }

    TEST_CASE("sources inside scatterers are rejected")
    {
        const Grid g = disk_grid(0.5, 2.0, 10);
        CHECK_THROWS_AS(excitation(LineSource{{0.0, 0.0}}, g), std::invalid_argument);
        const auto op = assemble(g);
        CHECK_THROWS_AS(solve(op, LineSource{{0.1, 0.0}}, g), std::invalid_argument);
    }
}

TEST_SUITE("fields")
{
    TEST_CASE("zero currents radiate nothing and free space is the incident field")
    {
        const Grid g = disk_grid(0.5, 2.0, 10);
        CurrentSolution zero;
        zero.currents.assign(g.size(), 0.0);
        const std::vector<Point> pts{{2.0, 0.0}, {-1.0, 3.0}};
        for (const auto &v : scattered_field(zero, g, pts))
            CHECK(v == cplx{0.0, 0.0});

        const Grid empty;
        const LineSource src{{0.2, 0.1}};
        const auto sol = solve(ImpedanceOperator(empty), src, empty);
        const auto tot = total_field(src, sol, empty, pts);
        const auto inc = incident_field(src, pts);
        for (std::size_t i = 0; i < pts.size(); ++i)
            CHECK(tot[i] == inc[i]);
    }

    TEST_CASE("vanishing contrast scatters vanishingly little")
    {
        const Grid g = disk_grid(0.7, cplx{1.0 + 1e-9, 0.0}, 10);
        const auto op = assemble(g);
        const PlaneWave pw{0.0};
        const auto sol = solve(op, pw, g, dense_settings());
        const std::vector<Point> pts{{2.0, 0.0}, {0.0, -3.0}, {-1.5, 1.5}};
        const auto sca = scattered_field(sol, g, pts);
        for (std::size_t i = 0; i < pts.size(); ++i)
            CHECK(std::abs(sca[i]) <= 1e-6 * std::abs(incident_field(pw, pts[i])));
    }

    TEST_CASE("field evaluation inside a scatterer is rejected")
    {
        const Grid g = disk_grid(0.5, 2.0, 10);
        CurrentSolution zero;
        zero.currents.assign(g.size(), 0.0);
        const std::vector<Point> inside{{0.0, 0.0}};
        CHECK_THROWS_AS(scattered_field(zero, g, inside), std::invalid_argument);
        CHECK_THROWS_AS(radiation_matrix(g, inside), std::invalid_argument);
    }

    TEST_CASE("radiation matrix reproduces the scattered field")
    {
        const Grid g = disk_grid(0.5, cplx{3.0, -1.0}, 10);
        const auto op = assemble(g);
        const auto sol = solve(op, PlaneWave{1.0}, g);
        const std::vector<Point> pts{{2.0, 0.5}, {-4.0, 1.0}};
        const auto a = radiation_matrix(g, pts);
        const Eigen::Map<const Eigen::VectorXcd> jv(sol.currents.data(), static_cast<Eigen::Index>(sol.currents.size()));
        const Eigen::VectorXcd e = -(a * jv);
        const auto sca = scattered_field(sol, g, pts);
        for (std::size_t i = 0; i < pts.size(); ++i)
            CHECK(std::abs(e(static_cast<Eigen::Index>(i)) - sca[i]) <= 1e-12 * std::abs(sca[i]));
    }

    TEST_CASE("reciprocity between two line sources")
    {
        const Grid g = rasterize(preset_scene("twin_cylinders", {{"R", 1.0}, {"eps_r", 4.0}}), 10);
        const auto op = assemble(g);
        const Solver solver(op, dense_settings(1e-12));
        const std::vector<std::pair<Point, Point>> pairs = {
            {{-5.0, 0.0}, {5.0, 1.0}}, {{-5.0, -1.0}, {5.0, 0.5}}, {{0.0, 2.0}, {-2.5, -1.5}}};
        for (const auto &[p, q] : pairs)
        {
            const LineSource sp{p}, sq{q};
            const auto jp = solver.solve(excitation(sp, g));
            const auto jq = solver.solve(excitation(sq, g));
            const std::vector<Point> at_q{q}, at_p{p};
            const cplx epq = total_field(sp, jp, g, at_q)[0];
            const cplx eqp = total_field(sq, jq, g, at_p)[0];
            CHECK(std::abs(epq - eqp) <= 1e-6 * std::abs(epq));
        }
    }

    TEST_CASE("lossless scene conserves energy")
    {
        const LineSource src{{0.0, 1.5}};
        const Point origin{0.0, 0.0};

        const Grid empty;
        const auto free_sol = solve(ImpedanceOperator(empty), src, empty);
        const double p_free = outward_flux(src, free_sol, empty, origin, 4.0);
        CHECK(p_free == doctest::Approx(1.0 / (4.0 * k0)).epsilon(1e-4));

        const Grid g = rasterize(preset_scene("twin_cylinders", {{"R", 0.8}, {"eps_r", 2.5}, {"D", 5.0}}), 10);
        const auto op = assemble(g);
        const auto sol = solve(op, src, g, dense_settings());
        const double p_out = outward_flux(src, sol, g, origin, 4.2);
        // Power delivered by the unit line current: the finite (imaginary) part of the field at
        // the source, -1/4 for the incident term alone.
        const std::vector<Point> at_src{src.position};
        const double p_in = (0.25 - scattered_field(sol, g, at_src)[0].imag()) / k0;
        MESSAGE("delivered " << p_in << " radiated " << p_out << " free " << p_free);
        CHECK(std::abs(p_out - p_in) <= 0.02 * p_in);
    }

    TEST_CASE("wider key-hole apertures let more power through")
    {
        auto measure = [](double s)
        {
            const PresetParams params{{"S", s}, {"L", 5.0}, {"D", 5.0}};
            const Grid g = rasterize(preset_scene("keyhole", params, MetalContrast::Surrogate), 10);
            const auto op = assemble(g);
            const LineSource src{{-2.5, 0.0}};
            const auto sol = solve(op, src, g, dense_settings(1e-9));
            const auto line = receiving_line(params, 0.05);
            const auto e = total_field(src, sol, g, line);
            double power = 0.0, mx = 0.0, mn = 1e300;
            for (const auto &v : e)
            {
                power += std::norm(v);
                mx = std::max(mx, std::abs(v));
                mn = std::min(mn, std::abs(v));
            }
            return std::pair{power, mx / mn};
        };
        const auto [p_small, ratio_small] = measure(0.5);
        const auto [p_large, ratio_large] = measure(2.0);
        MESSAGE("S=0.5 power " << p_small << " max/min " << ratio_small);
        MESSAGE("S=2   power " << p_large << " max/min " << ratio_large);
        CHECK(p_large > p_small);
        CHECK(ratio_small < ratio_large);
    }
}
