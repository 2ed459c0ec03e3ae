// Serial reference kernels vs their OpenMP counterparts.

#include <random>

#include <benchmark/benchmark.h>

#include "carv/harness.hpp"

namespace {

carv::Network random_policy(std::size_t in, std::vector<std::size_t> hidden, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 0.3);
    std::vector<carv::Layer> layers;
    std::size_t prev = in;
    hidden.push_back(1);
    for (std::size_t li = 0; li < hidden.size(); ++li) {
        carv::Mat w(hidden[li], prev);
        for (std::size_t r = 0; r < w.rows(); ++r)
            for (std::size_t c = 0; c < w.cols(); ++c) w(r, c) = gauss(rng);
        carv::Vec b(hidden[li]);
        for (double& v : b) v = gauss(rng);
        const auto act = li + 1 == hidden.size() ? carv::Activation::linear : carv::Activation::relu;
        layers.push_back({std::move(w), std::move(b), act});
        prev = hidden[li];
    }
    return carv::Network(in, std::move(layers));
}

carv::Scenario unicycle_scenario() {
    carv::Scenario s;
    s.dynamics = {carv::DynamicsKind::unicycle, 0.2, 1.0};
    s.policy = random_policy(3, {16, 8}, 7);
    s.x0 = carv::Box({-8.0, 2.0, -0.1}, {-7.5, 2.5, 0.1});
    s.t_f = 10;
    s.k_max = 5;
    return s;
}

const carv::PartitionGrid kGrid{{3, 3, 4}};

void BM_PartitionSerial(benchmark::State& state) {
    const auto s = unicycle_scenario();
    for (auto _ : state) benchmark::DoNotOptimize(carv::run_partition_serial(s, kGrid));
}

void BM_PartitionParallel(benchmark::State& state) {
    const auto s = unicycle_scenario();
    for (auto _ : state) benchmark::DoNotOptimize(carv::run_partition(s, kGrid));
}

void BM_McCheckSerial(benchmark::State& state) {
    const auto s = unicycle_scenario();
    const auto r = carv::run_concrete(s);
    for (auto _ : state) benchmark::DoNotOptimize(carv::mc_check_serial(s, r, 2000, 1));
}

void BM_McCheckParallel(benchmark::State& state) {
    const auto s = unicycle_scenario();
    const auto r = carv::run_concrete(s);
    for (auto _ : state) benchmark::DoNotOptimize(carv::mc_check(s, r, 2000, 1));
}

}  // namespace

BENCHMARK(BM_PartitionSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PartitionParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McCheckSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McCheckParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
