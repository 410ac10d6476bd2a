#pragma once

#include <filesystem>
#include <memory>

#include "dpush/simnet.hpp"

namespace dpush {

// The CLI's in-process network: a seeded simulation whose node stores
// persist between invocations (config.json + state.bin in the world
// directory). Routing tables are rebuilt deterministically from the seed on
// every open.
class World {
public:
    static World open(const std::filesystem::path& dir);

    Sim& sim() { return *sim_; }
    ProtocolNode& access_node() { return sim_->node(0); }

    void save();

private:
    World() = default;

    std::filesystem::path dir_;
    std::unique_ptr<Sim> sim_;
};

}  // namespace dpush
