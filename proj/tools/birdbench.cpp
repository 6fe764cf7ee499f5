// SPDX-License-Identifier: Apache-2.0
#include "birdbench/client.hpp"
#include "birdbench/game.hpp"
#include "birdbench/net.hpp"
#include "birdbench/server.hpp"
#include "birdbench/tournament.hpp"
#include "birdbench/validate.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

using namespace birdbench;

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

proto::ClockMode clock_from(const std::string &s) { return s == "wall" ? proto::ClockMode::wall : proto::ClockMode::game; }

int serve(std::uint16_t port, const std::string &levels_dir, const std::string &stage, double budget, double time_scale,
          const std::string &clock, const std::string &visibility)
{
    proto::RoundConfig rc;
    rc.stage = stage;
    rc.levels = level::load_pack(levels_dir);
    rc.budget_s = budget;
    rc.time_scale = time_scale;
    rc.clock = clock_from(clock);
    rc.visibility = proto::parse_visibility(visibility).value_or(proto::Visibility::global);
    proto::Server server(rc);
    server.set_action_sink([](const proto::ActionRecord &a) {
        std::cout << tourney::actions_to_jsonl(std::span(&a, 1)) << std::flush;
    });
    net::TcpServer tcp(server, port);
    std::cerr << "serving " << rc.levels.size() << " levels on 127.0.0.1:" << tcp.port() << '\n';
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop)
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.end_round();
    tcp.stop();
    return 0;
}

int agent(const std::string &kind, const std::string &host, std::uint16_t port, std::uint64_t seed, std::string id,
          const std::string &record, int max_attempts, const std::string &selector_kind)
{
    auto a = agents::make_agent(kind, seed);
    if (id.empty())
        id = kind + "-" + std::to_string(seed);
    std::ofstream rec;
    if (!record.empty())
        rec.open(record, std::ios::binary | std::ios::trunc);
    sdk::Client client(std::make_unique<sdk::TcpTransport>(host, port), record.empty() ? nullptr : &rec);
    std::unique_ptr<sdk::LevelSelector> selector;
    if (selector_kind == "weighted")
        selector = std::make_unique<sdk::WeightedSelector>(seed);
    else
        selector = std::make_unique<sdk::RoundRobinSelector>();
    const auto r = sdk::play_round(client, *a, *selector, {id, max_attempts, selector_kind == "weighted"});
    std::cout << "agent " << id << " attempts " << r.attempts << " shots " << r.shots << " total " << r.total << '\n';
    return 0;
}

int tournament(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto config = tourney::parse_tournament_config(ss.str(), std::filesystem::path(path).parent_path());
    const auto report = tourney::run_tournament(config, &std::cout);
    return report.champion ? 0 : 1;
}

int benchmark(const std::string &kind, const std::string &levels_dir, double budget, std::uint64_t seed,
              const std::string &run_dir)
{
    tourney::Entrant e{kind, [&] { return agents::make_agent(kind, seed); }, "round_robin", seed};
    const auto levels = level::load_pack(levels_dir);
    tourney::StageRunOptions opts;
    if (!run_dir.empty())
        opts.run_dir = run_dir;
    const auto r = tourney::benchmark(e, levels, budget, opts);
    for (std::size_t i = 0; i < levels.size(); ++i)
        std::cout << std::left << std::setw(8) << levels[i].id << ' ' << r.levels[i] << '\n';
    std::cout << "total " << r.total << '\n';
    return 0;
}

int validate(const std::string &levels_dir, bool probe, const std::string &probe_kind, int attempts)
{
    int failures = 0;
    int solvable = 0;
    const auto levels = level::load_pack(levels_dir);
    for (const auto &l : levels) {
        const auto s = level::validate_stability(l);
        std::cout << std::left << std::setw(8) << l.id << " stable " << (s.stable ? "yes" : "no") << " drift "
                  << s.max_drift;
        if (!s.stable)
            ++failures;
        if (probe) {
            auto agent = agents::make_agent(probe_kind, 0);
            const auto v = level::validate_solvability(l, *agent, attempts);
            const bool ok = v.solvable.value_or(false);
            solvable += ok ? 1 : 0;
            std::cout << " solvable " << (ok ? "yes" : "unproven") << " attempts " << v.probe_attempts << " shots "
                      << v.probe_shots;
        }
        std::cout << '\n';
    }
    if (probe)
        std::cout << "solvable " << solvable << " of " << levels.size() << '\n';
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"birdbench: physics puzzle game server, agents and tournament runner"};
    app.require_subcommand(1);

    std::uint16_t port = proto::kDefaultPort;
    std::string levels_dir = "levels";
    std::string stage = "practice";
    double budget = 1800.0;
    double time_scale = 1.0;
    std::string clock = "game";
    std::string visibility = "global";
    auto *serve_cmd = app.add_subcommand("serve", "run the game server");
    serve_cmd->add_option("--port", port, "TCP port")->capture_default_str();
    serve_cmd->add_option("--levels", levels_dir, "level pack directory")->capture_default_str();
    serve_cmd->add_option("--stage", stage, "stage name reported to agents")->capture_default_str();
    serve_cmd->add_option("--budget", budget, "round budget in seconds")->capture_default_str();
    serve_cmd->add_option("--time-scale", time_scale, "multiplier for wall-clock durations")->capture_default_str();
    serve_cmd->add_option("--clock", clock, "game or wall")->check(CLI::IsMember({"game", "wall"}))->capture_default_str();
    serve_cmd->add_option("--visibility", visibility, "global or group")
        ->check(CLI::IsMember({"global", "group"}))
        ->capture_default_str();

    std::string kind = "naive";
    std::string host = "127.0.0.1";
    std::uint64_t seed = 0;
    std::string id;
    std::string record;
    int max_attempts = -1;
    std::string selector = "round_robin";
    auto *agent_cmd = app.add_subcommand("agent", "connect one agent to a server");
    agent_cmd->add_option("--kind", kind, "naive, blocking, strategy or simulation")->capture_default_str();
    agent_cmd->add_option("--host", host)->capture_default_str();
    agent_cmd->add_option("--port", port)->capture_default_str();
    agent_cmd->add_option("--seed", seed)->capture_default_str();
    agent_cmd->add_option("--id", id, "agent id (default <kind>-<seed>)");
    agent_cmd->add_option("--record-requests", record, "write every request line to this file");
    agent_cmd->add_option("--max-attempts", max_attempts, "stop after this many level attempts")->capture_default_str();
    agent_cmd->add_option("--selector", selector, "round_robin or weighted")
        ->check(CLI::IsMember({"round_robin", "weighted"}))
        ->capture_default_str();

    std::string config;
    auto *tourney_cmd = app.add_subcommand("tournament", "run a staged tournament");
    tourney_cmd->add_option("--config", config, "tournament config JSON")->required();

    std::string run_dir;
    auto *bench_cmd = app.add_subcommand("benchmark", "score one agent on a level pack");
    bench_cmd->add_option("--agent", kind, "agent kind")->capture_default_str();
    bench_cmd->add_option("--levels", levels_dir)->capture_default_str();
    bench_cmd->add_option("--budget", budget, "budget in game seconds")->capture_default_str();
    bench_cmd->add_option("--seed", seed)->capture_default_str();
    bench_cmd->add_option("--run-dir", run_dir, "persist the attempt log here");

    bool probe = false;
    std::string probe_kind = "simulation";
    int attempts = 10;
    auto *validate_cmd = app.add_subcommand("validate", "check level stability and solvability");
    validate_cmd->add_option("--levels", levels_dir)->capture_default_str();
    validate_cmd->add_flag("--probe", probe, "also run the solvability probe");
    validate_cmd->add_option("--probe-agent", probe_kind)->capture_default_str();
    validate_cmd->add_option("--attempts", attempts, "probe attempt budget per level")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve_cmd)
            return serve(port, levels_dir, stage, budget, time_scale, clock, visibility);
        if (*agent_cmd)
            return agent(kind, host, port, seed, id, record, max_attempts, selector);
        if (*tourney_cmd)
            return tournament(config);
        if (*bench_cmd)
            return benchmark(kind, levels_dir, budget, seed, run_dir);
        if (*validate_cmd)
            return validate(levels_dir, probe, probe_kind, attempts);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
