// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pnorm/kernels.hpp"
#include "pnorm/sparse.hpp"

namespace {

using namespace pnorm;

Vector random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

// Sparse matrix with k nonzeros per row.
SparseMatrix random_sparse(std::size_t rows, std::size_t cols, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::size_t> col(0, cols - 1);
  std::vector<Triplet> trips;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < k; ++j) trips.push_back({r, col(rng), normal(rng)});
  return SparseMatrix(rows, cols, std::move(trips));
}

template <bool Parallel>
void BM_PowSum(benchmark::State& state) {
  const Vector x = random_vector(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? kernels::pow_sum(x, 7.5) : kernels::serial::pow_sum(x, 7.5));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_ShiftedPowSum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Vector x = random_vector(n, 2), d = random_vector(n, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? kernels::shifted_pow_sum(x, d, 0.25, 16.0)
                                      : kernels::serial::shifted_pow_sum(x, d, 0.25, 16.0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_ResidualTerms(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Vector x = random_vector(n, 4);
  Vector g(n), r(n);
  for (auto _ : state) {
    if (Parallel) {
      kernels::residual_terms(x, 8.0, g, r);
    } else {
      kernels::serial::residual_terms(x, 8.0, g, r);
    }
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_CsrMultiply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SparseMatrix a = random_sparse(n, 2 * n, 8, 5);
  const Vector x = random_vector(2 * n, 6);
  Vector y(n);
  for (auto _ : state) {
    if (Parallel) {
      kernels::csr_multiply(a.view(), x, y);
    } else {
      kernels::serial::csr_multiply(a.view(), x, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_GramDense(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SparseMatrix c = random_sparse(n, 2 * n, 16, 7);
  auto entries = c.entries();
  for (auto& e : entries) std::swap(e.row, e.col);
  const SparseMatrix ct(c.cols(), c.rows(), std::move(entries));
  Vector w = random_vector(2 * n, 8);
  for (double& v : w) v = 1.0 + v * v;
  Vector out(n * n);
  for (auto _ : state) {
    if (Parallel) {
      kernels::weighted_gram_dense(c.view(), ct.view(), w, out);
    } else {
      kernels::serial::weighted_gram_dense(c.view(), ct.view(), w, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

void threads_arg(benchmark::internal::Benchmark* b) {
  for (long n : {1L << 12, 1L << 16, 1L << 20}) b->Arg(n);
}

}  // namespace

BENCHMARK(BM_PowSum<false>)->Apply(threads_arg);
BENCHMARK(BM_PowSum<true>)->Apply(threads_arg)->UseRealTime();
BENCHMARK(BM_ShiftedPowSum<false>)->Apply(threads_arg);
BENCHMARK(BM_ShiftedPowSum<true>)->Apply(threads_arg)->UseRealTime();
BENCHMARK(BM_ResidualTerms<false>)->Apply(threads_arg);
BENCHMARK(BM_ResidualTerms<true>)->Apply(threads_arg)->UseRealTime();
BENCHMARK(BM_CsrMultiply<false>)->Apply(threads_arg);
BENCHMARK(BM_CsrMultiply<true>)->Apply(threads_arg)->UseRealTime();
BENCHMARK(BM_GramDense<false>)->Arg(256)->Arg(1024);
BENCHMARK(BM_GramDense<true>)->Arg(256)->Arg(1024)->UseRealTime();

int main(int argc, char** argv) {
  if (const char* env = std::getenv("PNORM_THREADS")) pnorm::kernels::set_threads(std::atoi(env));
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
