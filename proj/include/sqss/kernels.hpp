// Amplitude-level kernels behind the state-vector operations.
//
// Every arithmetic inner loop that touches amplitude arrays goes through this
// table: a scalar reference implementation (the ground truth) and an AVX2
// variant selected at runtime when the CPU supports it. The two backends are
// equivalence-tested against each other in tests/test_kernels.cpp.
//
// Registers are tiny (<= 64 complex amplitudes) but these loops run millions
// of times per Monte Carlo experiment, so the vector variants pay off.

#pragma once

#include <complex>
#include <cstddef>

namespace sqss::qsim::kernels {

using cplx = std::complex<double>;

enum class Backend { Auto, Scalar, Avx2 };

struct Ops {
    // sum of |a_k|^2 over n complex values
    double (*norm_sq)(const cplx* a, std::size_t n);

    // a_k *= s
    void (*scale)(cplx* a, std::size_t n, double s);

    // sum of conj(x_k) * y_k
    cplx (*dot_conj)(const cplx* x, const cplx* y, std::size_t n);

    // dst_k = c * src_k
    void (*store_scaled)(cplx* dst, const cplx* src, std::size_t n, cplx c);

    // One-qubit gate over index pairs split by `stride` (a power of two):
    //   (a[i], a[i+stride]) <- (g0*a[i] + g1*a[i+stride], g2*a[i] + g3*a[i+stride])
    // for every i whose stride bit is 0. dim is the full array length.
    void (*pair_transform)(cplx* a, std::size_t dim, std::size_t stride, const cplx g[4]);

    // sum of |a_k|^2 over indices whose stride bit is 1
    double (*bit_marginal)(const cplx* a, std::size_t dim, std::size_t stride);

    // Projective collapse onto stride-bit == keep: zero the other half and
    // multiply the kept half by inv_norm.
    void (*collapse_bit)(cplx* a, std::size_t dim, std::size_t stride, int keep,
                         double inv_norm);

    const char* name;
};

// Scalar reference backend; always available.
const Ops& scalar_ops();

// AVX2 backend, or nullptr when not compiled in / not supported by the CPU.
const Ops* avx2_ops();

// Currently selected backend table. Defaults to the best available; the
// SQSS_KERNELS environment variable ("scalar" or "avx2") overrides.
const Ops& active();

Backend active_backend();

// Force a backend (tests, benchmarking). Throws std::invalid_argument if the
// requested backend is unavailable. Not thread-safe; call before spawning
// worker threads.
void select_backend(Backend b);

bool avx2_supported();

} // namespace sqss::qsim::kernels
