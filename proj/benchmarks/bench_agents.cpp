// SPDX-License-Identifier: Apache-2.0
#include "birdbench/agents.hpp"
#include "birdbench/level.hpp"
#include "birdbench/percept.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>

using namespace birdbench;

namespace {

proto::Percept pack_percept(const std::string &id)
{
    const auto l = level::load_level_file(std::filesystem::path(BIRDBENCH_SOURCE_DIR) / "levels" / (id + ".json"));
    const auto w = level::build_world(l);
    return proto::snapshot_percept(w, proto::ScreenMap{}, proto::LevelState::playing, 0, 1800.0, 0);
}

// One shot decision per agent kind on the same scene.
void bm_select(benchmark::State &state, const char *kind)
{
    const auto p = pack_percept("L04");
    for (auto _ : state) {
        auto agent = agents::make_agent(kind, 1);
        benchmark::DoNotOptimize(agent->select(p, agents::EnvInfo{}));
    }
}
BENCHMARK_CAPTURE(bm_select, naive, "naive");
BENCHMARK_CAPTURE(bm_select, blocking, "blocking");
BENCHMARK_CAPTURE(bm_select, strategy, "strategy");
BENCHMARK_CAPTURE(bm_select, simulation, "simulation")->Unit(benchmark::kMillisecond);

} // namespace
