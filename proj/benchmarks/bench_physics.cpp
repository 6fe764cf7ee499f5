// SPDX-License-Identifier: Apache-2.0
#include "birdbench/geometry.hpp"
#include "birdbench/level.hpp"
#include "birdbench/physics.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>

using namespace birdbench;

namespace {

level::Level pack_level(const std::string &id)
{
    return level::load_level_file(std::filesystem::path(BIRDBENCH_SOURCE_DIR) / "levels" / (id + ".json"));
}

// Fixed steps of a resting structure; items are world steps.
void bm_step_at_rest(benchmark::State &state)
{
    const auto l = pack_level(state.range(0) == 0 ? "L01" : "L10");
    auto w = level::build_world(l);
    for (auto _ : state)
        w.step();
    state.SetItemsProcessed(state.iterations());
    state.counters["bodies"] = static_cast<double>(w.bodies().size());
}
BENCHMARK(bm_step_at_rest)->Arg(0)->Arg(1);

// A full shot into a structure, from launch to settle.
void bm_simulate_shot(benchmark::State &state)
{
    const auto l = pack_level("L03");
    const auto base = level::build_world(l);
    for (auto _ : state) {
        auto w = base;
        const auto r = phys::simulate_shot(w, {deg_to_rad(20.0), 1.0, 0});
        benchmark::DoNotOptimize(r.steps);
    }
}
BENCHMARK(bm_simulate_shot)->Unit(benchmark::kMillisecond);

void bm_solve_launch_angles(benchmark::State &state)
{
    double x = 1.0;
    for (auto _ : state) {
        x = x > 70.0 ? 1.0 : x + 0.37;
        benchmark::DoNotOptimize(geo::solve_launch_angles(28.0, 9.8, {x, 3.0}));
    }
}
BENCHMARK(bm_solve_launch_angles);

void bm_first_obstruction(benchmark::State &state)
{
    const auto w = level::build_world(pack_level("L10"));
    const auto scene = w.scene();
    const auto path = geo::sample_trajectory(deg_to_rad(25.0), 28.0, 9.8, geo::kDefaultSampleDt, 4.0,
                                             w.launch_point(), 0.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(geo::first_obstruction(path, scene));
}
BENCHMARK(bm_first_obstruction);

} // namespace

BENCHMARK_MAIN();
