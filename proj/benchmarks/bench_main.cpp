#include <benchmark/benchmark.h>

#include "covar/copula.hpp"
#include "covar/empirical.hpp"
#include "covar/marginal.hpp"
#include "covar/mde.hpp"

namespace {

using covar::copula::CopulaSpec;

covar::empirical::PseudoSample clayton_sample(std::size_t n) {
    const auto s = covar::copula::sample(CopulaSpec::clayton(2.0), n, 11);
    return covar::empirical::pseudo_observations(s.u, s.v);
}

void BM_VExact(benchmark::State& state) {
    const CopulaSpec t = CopulaSpec::student_t(0.5, 4.0);
    for (auto _ : state) benchmark::DoNotOptimize(covar::copula::v_exact(t, 0.05, 0.01));
}
BENCHMARK(BM_VExact);

void BM_CriterionAttraction(benchmark::State& state) {
    const auto s = clayton_sample(static_cast<std::size_t>(state.range(0)));
    const std::vector<double> theta{2.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(
            covar::mde::criterion_attraction(s, 100, covar::tail::ModelFamily::ReflectedGumbelTDF, theta));
}
BENCHMARK(BM_CriterionAttraction)->Arg(5000)->Arg(20000);

void BM_MdeFit(benchmark::State& state) {
    const auto s = clayton_sample(5000);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            covar::mde::fit(s, 100, covar::tail::Regime::Attraction, covar::tail::ModelFamily::StudentTTDF));
}
BENCHMARK(BM_MdeFit)->Unit(benchmark::kMillisecond);

void BM_GarchFit(benchmark::State& state) {
    covar::marginal::ArGarchParams p;
    p.phi = 0.05;
    p.beta0 = 0.05;
    p.beta1 = 0.08;
    p.beta2 = 0.9;
    p.eta = 6.0;
    p.lambda_skew = -0.1;
    const auto r = covar::marginal::simulate_ar_garch(p, static_cast<std::size_t>(state.range(0)), 5);
    for (auto _ : state) benchmark::DoNotOptimize(covar::marginal::fit_ar_garch(r));
}
BENCHMARK(BM_GarchFit)->Arg(1250)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
