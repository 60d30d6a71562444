// Serial references against the OpenMP kernels, plus the two solvers at
// small sizes. Thread count comes from OMP_NUM_THREADS.
#include "qscare/dac.hpp"
#include "qscare/generators.hpp"
#include "qscare/kernels.hpp"
#include "qscare/tink.hpp"

#include <benchmark/benchmark.h>

using namespace qscare;

namespace {

BandedMatrix random_band(Index n, Index b, std::uint64_t seed) {
  auto g = make_rng(seed, 99);
  std::normal_distribution<double> nd;
  BandedMatrix m(n, b, b);
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(0, i - b); j <= std::min(n - 1, i + b); ++j) m.at(i, j) = nd(g);
  return m;
}

void band_args(benchmark::internal::Benchmark* bm) {
  for (Index n : {2000, 8000})
    for (Index b : {5, 40}) bm->Args({n, b});
}

template <bool Par>
void BM_band_multiply(benchmark::State& st) {
  const BandedMatrix a = random_band(st.range(0), st.range(1), 1), b = random_band(st.range(0), st.range(1), 2);
  for (auto _ : st) {
    BandedMatrix c = Par ? kernels::band_multiply_parallel(a, b) : kernels::band_multiply_serial(a, b);
    benchmark::DoNotOptimize(c.data().data());
  }
}

template <bool Par>
void BM_band_apply(benchmark::State& st) {
  const BandedMatrix a = random_band(st.range(0), st.range(1), 3);
  auto g = make_rng(4, 99);
  std::normal_distribution<double> nd;
  Mat x(st.range(0), 16);
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) x(i, j) = nd(g);
  for (auto _ : st) {
    Mat y = Par ? kernels::band_apply_parallel(a, x) : kernels::band_apply_serial(a, x);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Par>
void BM_offdiag_sv(benchmark::State& st) {
  const DenseCare p = decay_instance_real(st.range(0));
  const Mat x = p.q + p.a * p.a.transpose();
  for (auto _ : st) {
    Vec s = Par ? kernels::offdiag_sv_parallel(x, 20) : kernels::offdiag_sv_serial(x, 20);
    benchmark::DoNotOptimize(s.data());
  }
}

void BM_tink_comparison(benchmark::State& st) {
  const BandedCare p = comparison_instance(st.range(0), 1.0);
  TinkOptions o;
  o.tol = 1e-8;
  o.inner = InnerSolver::cg;
  for (auto _ : st) {
    TinkResult r = tink(p.a, p.f, p.q, o);
    benchmark::DoNotOptimize(r.x.data().data());
  }
}

void BM_dac_test1(benchmark::State& st) {
  const Index n = st.range(0);
  const DenseCare p = dac_test_instance(1, n, 0, 1);
  const HMatrix a = HMatrix::from_dense(p.a, 1e-10), f = HMatrix::from_dense(p.f, 1e-10),
                q = HMatrix::from_dense(p.q, 1e-10);
  DacOptions o;
  o.residual = false;
  for (auto _ : st) {
    DacResult r = dac_care(a, f, q, o);
    benchmark::DoNotOptimize(r.x.max_rank());
  }
}

}  // namespace

BENCHMARK(BM_band_multiply<false>)->Apply(band_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_band_multiply<true>)->Apply(band_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_band_apply<false>)->Apply(band_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_band_apply<true>)->Apply(band_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_offdiag_sv<false>)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_offdiag_sv<true>)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tink_comparison)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(BM_dac_test1)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
