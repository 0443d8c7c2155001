#include "hbdn/algorithm.hpp"
#include "hbdn/data.hpp"
#include "hbdn/graph.hpp"
#include "hbdn/objective.hpp"
#include "hbdn/theory.hpp"

#include <benchmark/benchmark.h>

#include <memory>

namespace {

struct Desk {
  hbdn::ConsensusMatrix w;
  std::shared_ptr<hbdn::GlobalObjective> obj;
};

Desk make_desk(int n, int m) {
  const auto topo = hbdn::gen_regular(n, n - 6, 1);
  auto ds = hbdn::synthesize(m, 10, 42, 2.0);
  const auto part = hbdn::shuffle_partition(m, n, 42);
  std::vector<std::shared_ptr<const hbdn::LocalObjective>> locals;
  for (const auto& local : hbdn::split(ds, part)) {
    locals.push_back(std::make_shared<hbdn::LogisticLocal>(local.features, local.labels, 0.05));
  }
  return {hbdn::metropolis_weights(topo), std::make_shared<hbdn::GlobalObjective>(std::move(locals))};
}

void BM_Step(benchmark::State& st) {
  const Desk desk = make_desk(static_cast<int>(st.range(0)), 4000);
  const hbdn::AlgoConfig cfg(hbdn::Variant::NewtonHeavyBall, 0.15, 0.5);
  auto s = hbdn::init(*desk.obj, Eigen::MatrixXd::Zero(desk.w.size(), 10));
  for (auto _ : st) {
    s = hbdn::step(s, desk.w, cfg, *desk.obj);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_Step)->Arg(20)->Arg(40);

void BM_SpectralRadius(benchmark::State& st) {
  const auto c = hbdn::ProblemConstants::make(0.05, 0.6, 0.3, 0.9, 20);
  double alpha = 0.001;
  for (auto _ : st) {
    const auto m = hbdn::contraction_entries(c, alpha, 0.1 * alpha);
    benchmark::DoNotOptimize(hbdn::spectral_radius(m));
    alpha = alpha < 0.08 ? alpha * 1.01 : 0.001;
  }
}
BENCHMARK(BM_SpectralRadius);

void BM_MetropolisWeights(benchmark::State& st) {
  const auto topo = hbdn::gen_regular(static_cast<int>(st.range(0)), 6, 3);
  for (auto _ : st) benchmark::DoNotOptimize(hbdn::metropolis_weights(topo).sigma);
}
BENCHMARK(BM_MetropolisWeights)->Arg(20)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
