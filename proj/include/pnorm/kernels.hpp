#pragma once

// Data-parallel inner loops. The functions in pnorm::kernels are OpenMP
// parallel; pnorm::kernels::serial holds the plain reference versions used
// by the tests and the benchmark.
//
// Reductions are split into fixed-size blocks whose partial sums are added
// in block order, so parallel results do not depend on the thread count.

#include <cstddef>
#include <span>

#include "pnorm/sparse.hpp"

namespace pnorm::kernels {

inline constexpr std::size_t kReductionBlock = 2048;

// log(sum_e |x_e|^p), evaluated per entry as p*log|x_e| with a max shift.
// Returns -inf when x is zero.
double log_pow_sum(std::span<const double> x, double p);
// sum_e |x_e|^p; throws Overflow when the sum is not representable.
double pow_sum(std::span<const double> x, double p);
// sum_e |x_e - c d_e|^p without materializing the shifted vector.
double shifted_pow_sum(std::span<const double> x, std::span<const double> d, double c, double p);
// g_e = |x_e|^{p-2} x_e, r_e = |x_e|^{p-2}.
void residual_terms(std::span<const double> x, double p, std::span<double> g, std::span<double> r);
double dot(std::span<const double> a, std::span<const double> b);
// y = M x (row gather).
void csr_multiply(const CsrView& m, std::span<const double> x, std::span<double> y);
// out = C diag(w) C^T v; ct must be the compressed-row form of C^T.
void weighted_gram_apply(const CsrView& c, const CsrView& ct, std::span<const double> w,
                         std::span<const double> v, std::span<double> scratch,
                         std::span<double> out);
// Dense row-major S = C diag(w) C^T, S has c.rows^2 entries.
void weighted_gram_dense(const CsrView& c, const CsrView& ct, std::span<const double> w,
                         std::span<double> out);

// Sets the OpenMP thread count used by the kernels and the refinement grid.
void set_threads(int threads);
int threads();

namespace serial {

double log_pow_sum(std::span<const double> x, double p);
double pow_sum(std::span<const double> x, double p);
double shifted_pow_sum(std::span<const double> x, std::span<const double> d, double c, double p);
void residual_terms(std::span<const double> x, double p, std::span<double> g, std::span<double> r);
double dot(std::span<const double> a, std::span<const double> b);
void csr_multiply(const CsrView& m, std::span<const double> x, std::span<double> y);
void weighted_gram_apply(const CsrView& c, const CsrView& ct, std::span<const double> w,
                         std::span<const double> v, std::span<double> scratch,
                         std::span<double> out);
void weighted_gram_dense(const CsrView& c, const CsrView& ct, std::span<const double> w,
                         std::span<double> out);

}  // namespace serial
}  // namespace pnorm::kernels
