// Scalar reference kernels. These define the semantics the AVX2 variants are
// tested against; keep them simple enough to audit by eye.

#include "sqss/kernels.hpp"

namespace sqss::qsim::kernels {

namespace {

double norm_sq_scalar(const cplx* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += std::norm(a[k]);
    return s;
}

void scale_scalar(cplx* a, std::size_t n, double s) {
    for (std::size_t k = 0; k < n; ++k) a[k] *= s;
}

cplx dot_conj_scalar(const cplx* x, const cplx* y, std::size_t n) {
    cplx s{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) s += std::conj(x[k]) * y[k];
    return s;
}

void store_scaled_scalar(cplx* dst, const cplx* src, std::size_t n, cplx c) {
    for (std::size_t k = 0; k < n; ++k) dst[k] = c * src[k];
}

void pair_transform_scalar(cplx* a, std::size_t dim, std::size_t stride, const cplx g[4]) {
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            const std::size_t i0 = base + off;
            const std::size_t i1 = i0 + stride;
            const cplx x = a[i0];
            const cplx y = a[i1];
            a[i0] = g[0] * x + g[1] * y;
            a[i1] = g[2] * x + g[3] * y;
        }
    }
}

double bit_marginal_scalar(const cplx* a, std::size_t dim, std::size_t stride) {
    double s = 0.0;
    for (std::size_t base = stride; base < dim; base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) s += std::norm(a[base + off]);
    }
    return s;
}

void collapse_bit_scalar(cplx* a, std::size_t dim, std::size_t stride, int keep,
                         double inv_norm) {
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            const std::size_t i0 = base + off;
            const std::size_t i1 = i0 + stride;
            if (keep == 0) {
                a[i0] *= inv_norm;
                a[i1] = cplx{0.0, 0.0};
            } else {
                a[i0] = cplx{0.0, 0.0};
                a[i1] *= inv_norm;
            }
        }
    }
}

} // namespace

const Ops& scalar_ops() {
    static const Ops ops{
        norm_sq_scalar,    scale_scalar,        dot_conj_scalar, store_scaled_scalar,
        pair_transform_scalar, bit_marginal_scalar, collapse_bit_scalar, "scalar",
    };
    return ops;
}

} // namespace sqss::qsim::kernels
