#include "dpush/world.hpp"

#include <fstream>

#include "dpush/scenario.hpp"

namespace dpush {

World World::open(const std::filesystem::path& dir) {
    World world;
    world.dir_ = dir;
    std::filesystem::create_directories(dir);

    auto config_path = dir / "config.json";
    nlohmann::json cfg_json;
    if (std::filesystem::exists(config_path)) {
        std::ifstream in(config_path);
        cfg_json = nlohmann::json::parse(in, nullptr, false);
        if (cfg_json.is_discarded()) throw std::runtime_error("invalid world config.json");
    } else {
        cfg_json = {{"nodes", 8}, {"seed", 1}, {"floor_bits", 16}, {"latency_ms", 10},
                    {"record_trace", false}};
        std::ofstream out(config_path);
        out << cfg_json.dump() << '\n';
    }

    SimConfig cfg = sim_config_from_json(cfg_json);
    cfg.record_trace = false;  // worlds accumulate across invocations; no trace
    world.sim_ = std::make_unique<Sim>(cfg);

    auto state_path = dir / "state.bin";
    if (std::filesystem::exists(state_path)) {
        std::ifstream in(state_path, std::ios::binary);
        std::uint8_t count_raw[4];
        if (!in.read(reinterpret_cast<char*>(count_raw), 4))
            throw std::runtime_error("corrupt world state.bin");
        std::uint32_t count = load_u32_be(count_raw);
        for (std::uint32_t i = 0; i < count && i < world.sim_->node_count(); ++i) {
            if (!world.sim_->node(i).store().load(in))
                throw std::runtime_error("corrupt world state.bin");
        }
    }
    return world;
}

void World::save() {
    std::ofstream out(dir_ / "state.bin", std::ios::binary | std::ios::trunc);
    Bytes count;
    put_u32_be(count, static_cast<std::uint32_t>(sim_->node_count()));
    out.write(reinterpret_cast<const char*>(count.data()), static_cast<std::streamsize>(count.size()));
    for (std::size_t i = 0; i < sim_->node_count(); ++i) sim_->node(i).store().save(out);
    if (!out) throw std::runtime_error("failed to write world state.bin");
}

}  // namespace dpush
