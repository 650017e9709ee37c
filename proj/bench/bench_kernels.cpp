// Serial reference kernels against their OpenMP versions.
#include <benchmark/benchmark.h>

#include <memory>

#include "qhist/kernels.hpp"
#include "qhist/rng.hpp"
#include "qhist/spectral.hpp"
#include "qhist/spin_model.hpp"

using namespace qhist;

namespace {

struct Fixture {
  std::unique_ptr<SectorBasis> basis;
  std::unique_ptr<LinearOperator> h;
};

const Fixture& ladder(int spins) {
  static Fixture f[5];
  Fixture& out = f[spins / 4];
  if (!out.h) {
    ModelParams p;
    p.n = spins / 4;
    out.basis = std::make_unique<SectorBasis>(build_basis(spins, 0.0));
    out.h = std::make_unique<LinearOperator>(build_hamiltonian(p, *out.basis, true));
  }
  return out;
}

CMatrix random_block(long rows, long cols, std::uint64_t seed) {
  CounterRng rng(seed);
  CMatrix m(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) m(i, j) = Complex(rng.normal(), rng.normal());
  return m;
}

template <bool Parallel>
void BM_csr_matvec(benchmark::State& state) {
  const Fixture& f = ladder(static_cast<int>(state.range(0)));
  const long d = f.h->dim();
  const CVector x = random_block(d, 1, 1).col(0);
  CVector y(d);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::csr_matvec(f.h->csr().view(), x.data(), y.data());
    else
      kernels::serial::csr_matvec(f.h->csr().view(), x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
  state.counters["dim"] = static_cast<double>(d);
}

template <bool Parallel>
void BM_csr_matmat(benchmark::State& state) {
  const Fixture& f = ladder(static_cast<int>(state.range(0)));
  const long d = f.h->dim();
  const CMatrix x = random_block(d, 32, 2);
  CMatrix y(d, 32);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::csr_matmat(f.h->csr().view(), x, y);
    else
      kernels::serial::csr_matmat(f.h->csr().view(), x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_column_norms(benchmark::State& state) {
  const CMatrix m = random_block(state.range(0), 256, 3);
  for (auto _ : state) {
    RVector r = Parallel ? kernels::parallel::column_norms_sq(m) : kernels::serial::column_norms_sq(m);
    benchmark::DoNotOptimize(r.data());
  }
}

template <bool Parallel>
void BM_krylov_apply(benchmark::State& state) {
  const Fixture& f = ladder(static_cast<int>(state.range(0)));
  const CMatrix x = random_block(f.h->dim(), 8, 4);
  KrylovOptions opt;
  for (auto _ : state) {
    CMatrix y = Parallel ? parallel::krylov_apply(*f.h, x, 1.0, opt)
                         : serial::krylov_apply(*f.h, x, 1.0, opt);
    benchmark::DoNotOptimize(y.data());
  }
}

}  // namespace

BENCHMARK(BM_csr_matvec<false>)->Arg(12)->Arg(16);
BENCHMARK(BM_csr_matvec<true>)->Arg(12)->Arg(16);
BENCHMARK(BM_csr_matmat<false>)->Arg(12)->Arg(16);
BENCHMARK(BM_csr_matmat<true>)->Arg(12)->Arg(16);
BENCHMARK(BM_column_norms<false>)->Arg(924)->Arg(12870);
BENCHMARK(BM_column_norms<true>)->Arg(924)->Arg(12870);
BENCHMARK(BM_krylov_apply<false>)->Arg(12)->Arg(16);
BENCHMARK(BM_krylov_apply<true>)->Arg(12)->Arg(16);

BENCHMARK_MAIN();
