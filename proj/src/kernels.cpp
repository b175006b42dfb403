#include "pnorm/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pnorm/errors.hpp"

namespace pnorm::kernels {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t block_count(std::size_t n) {
  return (n + kReductionBlock - 1) / kReductionBlock;
}

// Sums f(i) over [0, n) in fixed blocks; block partials are added in order.
template <class F>
double blocked_sum(std::size_t n, F&& f) {
  const std::size_t nb = block_count(n);
  if (nb <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f(i);
    return s;
  }
  std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    partial[b] = s;
  }
  double s = 0.0;
  for (double v : partial) s += v;
  return s;
}

template <class F>
double blocked_max(std::size_t n, F&& f) {
  double m = 0.0;
  if (n < kReductionBlock) {
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, f(i));
    return m;
  }
#pragma omp parallel for reduction(max : m) schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) m = std::max(m, f(i));
  return m;
}

double finish_pow_sum(double scale, double sum, double p) {
  const double value = std::pow(scale, p) * sum;
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::Overflow, "sum of p-th powers exceeds double range");
  }
  return value;
}

}  // namespace

double log_pow_sum(std::span<const double> x, double p) {
  const double scale = blocked_max(x.size(), [&](std::size_t i) { return std::abs(x[i]); });
  if (scale == 0.0) return kNegInf;
  const double sum = blocked_sum(x.size(), [&](std::size_t i) {
    return std::pow(std::abs(x[i]) / scale, p);
  });
  return p * std::log(scale) + std::log(sum);
}

double pow_sum(std::span<const double> x, double p) {
  const double scale = blocked_max(x.size(), [&](std::size_t i) { return std::abs(x[i]); });
  if (scale == 0.0) return 0.0;
  const double sum = blocked_sum(x.size(), [&](std::size_t i) {
    return std::pow(std::abs(x[i]) / scale, p);
  });
  return finish_pow_sum(scale, sum, p);
}

double shifted_pow_sum(std::span<const double> x, std::span<const double> d, double c, double p) {
  const double scale =
      blocked_max(x.size(), [&](std::size_t i) { return std::abs(x[i] - c * d[i]); });
  if (scale == 0.0) return 0.0;
  if (!std::isfinite(scale)) return std::numeric_limits<double>::infinity();
  const double sum = blocked_sum(x.size(), [&](std::size_t i) {
    return std::pow(std::abs(x[i] - c * d[i]) / scale, p);
  });
  const double value = std::pow(scale, p) * sum;
  return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

void residual_terms(std::span<const double> x, double p, std::span<double> g, std::span<double> r) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (n >= static_cast<std::ptrdiff_t>(kReductionBlock))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double w = std::pow(std::abs(x[i]), p - 2.0);
    r[i] = w;
    g[i] = w * x[i];
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return blocked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

void csr_multiply(const CsrView& m, std::span<const double> x, std::span<double> y) {
  const auto rows = static_cast<std::ptrdiff_t>(m.rows);
#pragma omp parallel for schedule(static) if (m.values.size() >= kReductionBlock)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) s += m.values[k] * x[m.col_index[k]];
    y[r] = s;
  }
}

void weighted_gram_apply(const CsrView& c, const CsrView& ct, std::span<const double> w,
                         std::span<const double> v, std::span<double> scratch,
                         std::span<double> out) {
  csr_multiply(ct, v, scratch);
  const auto n = static_cast<std::ptrdiff_t>(scratch.size());
#pragma omp parallel for schedule(static) if (n >= static_cast<std::ptrdiff_t>(kReductionBlock))
  for (std::ptrdiff_t i = 0; i < n; ++i) scratch[i] *= w[i];
  csr_multiply(c, scratch, out);
}

void weighted_gram_dense(const CsrView& c, const CsrView& ct, std::span<const double> w,
                         std::span<double> out) {
  const std::size_t n = c.rows;
  std::fill(out.begin(), out.end(), 0.0);
#pragma omp parallel for schedule(dynamic, 16) if (c.values.size() >= kReductionBlock)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    double* row = out.data() + static_cast<std::size_t>(i) * n;
    for (std::size_t a = c.row_ptr[i]; a < c.row_ptr[i + 1]; ++a) {
      const std::size_t k = c.col_index[a];
      const double cik = c.values[a] * w[k];
      for (std::size_t b = ct.row_ptr[k]; b < ct.row_ptr[k + 1]; ++b) {
        row[ct.col_index[b]] += cik * ct.values[b];
      }
    }
  }
}

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int threads() { return omp_get_max_threads(); }

namespace serial {

double log_pow_sum(std::span<const double> x, double p) {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return kNegInf;
  double sum = 0.0;
  for (double v : x) sum += std::pow(std::abs(v) / scale, p);
  return p * std::log(scale) + std::log(sum);
}

double pow_sum(std::span<const double> x, double p) {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : x) sum += std::pow(std::abs(v) / scale, p);
  return finish_pow_sum(scale, sum, p);
}

double shifted_pow_sum(std::span<const double> x, std::span<const double> d, double c, double p) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - c * d[i];
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  if (!std::isfinite(scale)) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double v : y) sum += std::pow(std::abs(v) / scale, p);
  const double value = std::pow(scale, p) * sum;
  return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

void residual_terms(std::span<const double> x, double p, std::span<double> g, std::span<double> r) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    r[i] = std::pow(std::abs(x[i]), p - 2.0);
    g[i] = r[i] * x[i];
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void csr_multiply(const CsrView& m, std::span<const double> x, std::span<double> y) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    double s = 0.0;
    for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) s += m.values[k] * x[m.col_index[k]];
    y[r] = s;
  }
}

void weighted_gram_apply(const CsrView& c, const CsrView& ct, std::span<const double> w,
                         std::span<const double> v, std::span<double> scratch,
                         std::span<double> out) {
  csr_multiply(ct, v, scratch);
  for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] *= w[i];
  csr_multiply(c, scratch, out);
}

void weighted_gram_dense(const CsrView& c, const CsrView& ct, std::span<const double> w,
                         std::span<double> out) {
  // Column-outer accumulation: a different loop order from the parallel
  // version, so the two are independent.
  const std::size_t n = c.rows;
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < ct.rows; ++k) {
    for (std::size_t a = ct.row_ptr[k]; a < ct.row_ptr[k + 1]; ++a) {
      const std::size_t i = ct.col_index[a];
      const double cik = ct.values[a] * w[k];
      for (std::size_t b = ct.row_ptr[k]; b < ct.row_ptr[k + 1]; ++b) {
        out[i * n + ct.col_index[b]] += cik * ct.values[b];
      }
    }
  }
}

}  // namespace serial
}  // namespace pnorm::kernels
