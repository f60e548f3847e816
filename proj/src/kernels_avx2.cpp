// AVX2 kernel variants. Two complex doubles per 256-bit vector; complex
// multiply uses the mul/permute/addsub idiom. Compiled with -mavx2 -mfma on
// x86_64 only (see src/CMakeLists.txt); elsewhere this TU contributes a stub.
//
// Reduction order differs from the scalar backend, so results may differ in
// the last ulp; the equivalence tests allow for that.

#include "sqss/kernels.hpp"

#if defined(SQSS_AVX2_TU)

#include <immintrin.h>

namespace sqss::qsim::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_hadd_pd(s, s));
}

// v holds two complex values [r0,i0,r1,i1]; multiplies each by (cre + i*cim).
inline __m256d cmul(__m256d v, __m256d cre, __m256d cim) {
    __m256d vswap = _mm256_permute_pd(v, 0b0101); // [i0,r0,i1,r1]
    return _mm256_addsub_pd(_mm256_mul_pd(v, cre), _mm256_mul_pd(vswap, cim));
}

double norm_sq_avx2(const cplx* a, std::size_t n) {
    const double* d = reinterpret_cast<const double*>(a);
    const std::size_t n2 = 2 * n;
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n2; k += 4) {
        __m256d v = _mm256_loadu_pd(d + k);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; k < n2; ++k) s += d[k] * d[k];
    return s;
}

void scale_avx2(cplx* a, std::size_t n, double s) {
    double* d = reinterpret_cast<double*>(a);
    const std::size_t n2 = 2 * n;
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t k = 0;
    for (; k + 4 <= n2; k += 4) {
        _mm256_storeu_pd(d + k, _mm256_mul_pd(_mm256_loadu_pd(d + k), vs));
    }
    for (; k < n2; ++k) d[k] *= s;
}

cplx dot_conj_avx2(const cplx* x, const cplx* y, std::size_t n) {
    const double* dx = reinterpret_cast<const double*>(x);
    const double* dy = reinterpret_cast<const double*>(y);
    const std::size_t n2 = 2 * n;
    // P accumulates x .* y (lane sums give the real part);
    // Q accumulates swap(x) .* y (odd-even lane differences give the imag part).
    __m256d p = _mm256_setzero_pd();
    __m256d q = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n2; k += 4) {
        __m256d vx = _mm256_loadu_pd(dx + k);
        __m256d vy = _mm256_loadu_pd(dy + k);
        p = _mm256_fmadd_pd(vx, vy, p);
        q = _mm256_fmadd_pd(_mm256_permute_pd(vx, 0b0101), vy, q);
    }
    const __m256d signs = _mm256_set_pd(1.0, -1.0, 1.0, -1.0);
    double re = hsum(p);
    double im = hsum(_mm256_mul_pd(q, signs));
    for (; k + 2 <= n2; k += 2) {
        re += dx[k] * dy[k] + dx[k + 1] * dy[k + 1];
        im += dx[k] * dy[k + 1] - dx[k + 1] * dy[k];
    }
    return {re, im};
}

void store_scaled_avx2(cplx* dst, const cplx* src, std::size_t n, cplx c) {
    double* dd = reinterpret_cast<double*>(dst);
    const double* ds = reinterpret_cast<const double*>(src);
    const std::size_t n2 = 2 * n;
    const __m256d cre = _mm256_set1_pd(c.real());
    const __m256d cim = _mm256_set1_pd(c.imag());
    std::size_t k = 0;
    for (; k + 4 <= n2; k += 4) {
        _mm256_storeu_pd(dd + k, cmul(_mm256_loadu_pd(ds + k), cre, cim));
    }
    for (; k < n2; k += 2) {
        const cplx v = src[k / 2] * c;
        dd[k] = v.real();
        dd[k + 1] = v.imag();
    }
}

void pair_transform_avx2(cplx* a, std::size_t dim, std::size_t stride, const cplx g[4]) {
    double* d = reinterpret_cast<double*>(a);
    const __m256d g0re = _mm256_set1_pd(g[0].real()), g0im = _mm256_set1_pd(g[0].imag());
    const __m256d g1re = _mm256_set1_pd(g[1].real()), g1im = _mm256_set1_pd(g[1].imag());
    const __m256d g2re = _mm256_set1_pd(g[2].real()), g2im = _mm256_set1_pd(g[2].imag());
    const __m256d g3re = _mm256_set1_pd(g[3].real()), g3im = _mm256_set1_pd(g[3].imag());

    if (stride == 1) {
        if (dim < 4) {
            // single pair; not worth vectorizing
            const cplx x = a[0], y = a[1];
            a[0] = g[0] * x + g[1] * y;
            a[1] = g[2] * x + g[3] * y;
            return;
        }
        // adjacent pairs: transpose two pairs into (x,x)/(y,y) vectors
        for (std::size_t k = 0; k + 4 <= dim; k += 4) {
            __m256d v0 = _mm256_loadu_pd(d + 2 * k);     // a[k],   a[k+1]
            __m256d v1 = _mm256_loadu_pd(d + 2 * k + 4); // a[k+2], a[k+3]
            __m256d x = _mm256_permute2f128_pd(v0, v1, 0x20); // a[k],   a[k+2]
            __m256d y = _mm256_permute2f128_pd(v0, v1, 0x31); // a[k+1], a[k+3]
            __m256d x2 = _mm256_add_pd(cmul(x, g0re, g0im), cmul(y, g1re, g1im));
            __m256d y2 = _mm256_add_pd(cmul(x, g2re, g2im), cmul(y, g3re, g3im));
            _mm256_storeu_pd(d + 2 * k, _mm256_permute2f128_pd(x2, y2, 0x20));
            _mm256_storeu_pd(d + 2 * k + 4, _mm256_permute2f128_pd(x2, y2, 0x31));
        }
        return;
    }

    // stride >= 2: both halves of every pair are whole vectors apart
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t off = 0; off < stride; off += 2) {
            double* p0 = d + 2 * (base + off);
            double* p1 = p0 + 2 * stride;
            __m256d x = _mm256_loadu_pd(p0);
            __m256d y = _mm256_loadu_pd(p1);
            _mm256_storeu_pd(p0, _mm256_add_pd(cmul(x, g0re, g0im), cmul(y, g1re, g1im)));
            _mm256_storeu_pd(p1, _mm256_add_pd(cmul(x, g2re, g2im), cmul(y, g3re, g3im)));
        }
    }
}

double bit_marginal_avx2(const cplx* a, std::size_t dim, std::size_t stride) {
    const double* d = reinterpret_cast<const double*>(a);
    if (stride == 1) {
        if (dim < 4) return std::norm(a[1]);
        // lanes 2,3 of each 4-double load are the odd (bit set) amplitude
        __m256d acc = _mm256_setzero_pd();
        const __m256d zero = _mm256_setzero_pd();
        for (std::size_t k = 0; k + 4 <= dim; k += 4) {
            __m256d v0 = _mm256_loadu_pd(d + 2 * k);
            __m256d v1 = _mm256_loadu_pd(d + 2 * k + 4);
            acc = _mm256_fmadd_pd(_mm256_blend_pd(zero, v0, 0b1100),
                                  _mm256_blend_pd(zero, v0, 0b1100), acc);
            acc = _mm256_fmadd_pd(_mm256_blend_pd(zero, v1, 0b1100),
                                  _mm256_blend_pd(zero, v1, 0b1100), acc);
        }
        return hsum(acc);
    }
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t base = stride; base < dim; base += 2 * stride) {
        for (std::size_t off = 0; off < stride; off += 2) {
            __m256d v = _mm256_loadu_pd(d + 2 * (base + off));
            acc = _mm256_fmadd_pd(v, v, acc);
        }
    }
    return hsum(acc);
}

void collapse_bit_avx2(cplx* a, std::size_t dim, std::size_t stride, int keep,
                       double inv_norm) {
    double* d = reinterpret_cast<double*>(a);
    if (stride == 1) {
        if (dim < 4) {
            if (keep == 0) {
                a[0] *= inv_norm;
                a[1] = cplx{0.0, 0.0};
            } else {
                a[0] = cplx{0.0, 0.0};
                a[1] *= inv_norm;
            }
            return;
        }
        // per-lane factor: kept complex scaled, other zeroed
        const __m256d f = (keep == 0)
                              ? _mm256_set_pd(0.0, 0.0, inv_norm, inv_norm)
                              : _mm256_set_pd(inv_norm, inv_norm, 0.0, 0.0);
        for (std::size_t k = 0; k + 2 <= dim; k += 2) {
            double* p = d + 2 * k;
            _mm256_storeu_pd(p, _mm256_mul_pd(_mm256_loadu_pd(p), f));
        }
        return;
    }
    const __m256d vinv = _mm256_set1_pd(inv_norm);
    const __m256d vzero = _mm256_setzero_pd();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t off = 0; off < stride; off += 2) {
            double* p0 = d + 2 * (base + off);
            double* p1 = p0 + 2 * stride;
            if (keep == 0) {
                _mm256_storeu_pd(p0, _mm256_mul_pd(_mm256_loadu_pd(p0), vinv));
                _mm256_storeu_pd(p1, vzero);
            } else {
                _mm256_storeu_pd(p0, vzero);
                _mm256_storeu_pd(p1, _mm256_mul_pd(_mm256_loadu_pd(p1), vinv));
            }
        }
    }
}

} // namespace

const Ops* avx2_ops_table() {
    static const Ops ops{
        norm_sq_avx2,    scale_avx2,        dot_conj_avx2, store_scaled_avx2,
        pair_transform_avx2, bit_marginal_avx2, collapse_bit_avx2, "avx2",
    };
    return &ops;
}

} // namespace sqss::qsim::kernels

#else // !SQSS_AVX2_TU

namespace sqss::qsim::kernels {
const Ops* avx2_ops_table() { return nullptr; }
} // namespace sqss::qsim::kernels

#endif
