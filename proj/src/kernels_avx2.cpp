// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------
//
// AVX2/FMA variants. This file is compiled with -mavx2 -mfma; nothing here may run
// before avx2_available() has returned true.

#include "edofsim/kernels.hpp"

#include <immintrin.h>

namespace edofsim::kernels::avx2
{
    namespace
    {
        // std::complex<double> is layout-compatible with double[2].
        inline const double *raw(const cplx *p) { return reinterpret_cast<const double *>(p); }
        inline double *raw(cplx *p) { return reinterpret_cast<double *>(p); }

        // Two complex products per register: (ar br - ai bi, ai br + ar bi).
        inline __m256d cmul(__m256d a, __m256d b)
        {
            const __m256d b_re = _mm256_movedup_pd(b);
            const __m256d b_im = _mm256_permute_pd(b, 0xF);
            const __m256d a_sw = _mm256_permute_pd(a, 0x5);
            return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
        }

        inline __m256d broadcast(cplx c) { return _mm256_setr_pd(c.real(), c.imag(), c.real(), c.imag()); }

        inline double hsum(__m256d v)
        {
            const __m128d lo = _mm256_castpd256_pd128(v);
            const __m128d hi = _mm256_extractf128_pd(v, 1);
            const __m128d s = _mm_add_pd(lo, hi);
            return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
        }

        void cmul_inplace(std::span<cplx> a, std::span<const cplx> b)
        {
            const std::size_t n = a.size();
            std::size_t i = 0;
            for (; i + 2 <= n; i += 2)
            {
                const __m256d va = _mm256_loadu_pd(raw(a.data() + i));
                const __m256d vb = _mm256_loadu_pd(raw(b.data() + i));
                _mm256_storeu_pd(raw(a.data() + i), cmul(va, vb));
            }
            for (; i < n; ++i)
                a[i] *= b[i];
        }

        void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y)
        {
            const std::size_t n = x.size();
            const __m256d va = broadcast(alpha);
            std::size_t i = 0;
            for (; i + 2 <= n; i += 2)
            {
                const __m256d vx = _mm256_loadu_pd(raw(x.data() + i));
                const __m256d vy = _mm256_loadu_pd(raw(y.data() + i));
                _mm256_storeu_pd(raw(y.data() + i), _mm256_add_pd(vy, cmul(vx, va)));
            }
            for (; i < n; ++i)
                y[i] += alpha * x[i];
        }

        void xpby(std::span<const cplx> r, cplx beta, std::span<cplx> p)
        {
            const std::size_t n = r.size();
            const __m256d vb = broadcast(beta);
            std::size_t i = 0;
            for (; i + 2 <= n; i += 2)
            {
                const __m256d vr = _mm256_loadu_pd(raw(r.data() + i));
                const __m256d vp = _mm256_loadu_pd(raw(p.data() + i));
                _mm256_storeu_pd(raw(p.data() + i), _mm256_add_pd(vr, cmul(vp, vb)));
            }
            for (; i < n; ++i)
                p[i] = r[i] + beta * p[i];
        }

        cplx dotc(std::span<const cplx> x, std::span<const cplx> y)
        {
            const std::size_t n = x.size();
            __m256d acc_re = _mm256_setzero_pd(); // (xr yr, xi yi)
            __m256d acc_im = _mm256_setzero_pd(); // (xi yr, xr yi)
            std::size_t i = 0;
            for (; i + 2 <= n; i += 2)
            {
                const __m256d vx = _mm256_loadu_pd(raw(x.data() + i));
                const __m256d vy = _mm256_loadu_pd(raw(y.data() + i));
                acc_re = _mm256_fmadd_pd(vx, vy, acc_re);
                acc_im = _mm256_fmadd_pd(_mm256_permute_pd(vx, 0x5), vy, acc_im);
            }
            alignas(32) double im_lanes[4];
            _mm256_store_pd(im_lanes, acc_im);
            cplx s{hsum(acc_re), (im_lanes[1] - im_lanes[0]) + (im_lanes[3] - im_lanes[2])};
            for (; i < n; ++i)
                s += std::conj(x[i]) * y[i];
            return s;
        }

        double norm2(std::span<const cplx> x)
        {
            const std::size_t n = x.size();
            __m256d acc = _mm256_setzero_pd();
            std::size_t i = 0;
            for (; i + 2 <= n; i += 2)
            {
                const __m256d vx = _mm256_loadu_pd(raw(x.data() + i));
                acc = _mm256_fmadd_pd(vx, vx, acc);
            }
            double s = hsum(acc);
            for (; i < n; ++i)
                s += std::norm(x[i]);
            return s;
        }

        void diag_fma(std::span<const cplx> d, std::span<const cplx> x, std::span<cplx> y)
        {
            const std::size_t n = x.size();
            std::size_t i = 0;
            for (; i + 2 <= n; i += 2)
            {
                const __m256d vd = _mm256_loadu_pd(raw(d.data() + i));
                const __m256d vx = _mm256_loadu_pd(raw(x.data() + i));
                const __m256d vy = _mm256_loadu_pd(raw(y.data() + i));
                _mm256_storeu_pd(raw(y.data() + i), _mm256_add_pd(vy, cmul(vd, vx)));
            }
            for (; i < n; ++i)
                y[i] += d[i] * x[i];
        }

        const KernelTable kTable{cmul_inplace, axpy, xpby, dotc, norm2, diag_fma};
    } // namespace

    const KernelTable &table() { return kTable; }

} // namespace edofsim::kernels::avx2
