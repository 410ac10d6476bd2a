#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dpush/node.hpp"
#include "dpush/rng.hpp"
#include "dpush/rpc.hpp"

namespace dpush {

struct SimConfig {
    std::size_t node_count = 1;
    std::uint64_t seed = 1;
    std::uint32_t latency_min_ms = 5;
    std::uint32_t latency_max_ms = 25;
    double drop_rate = 0.0;
    std::size_t k = 20;
    std::size_t alpha = 3;
    std::size_t replication = 20;
    int floor_bits = 16;
    std::size_t max_block_size = kDefaultMaxBlockSize;
    std::uint64_t timeout_ms = 0;  // 0: derived as 4 * latency_max_ms
    std::uint64_t max_events = 50'000'000;
    bool record_trace = true;
};

struct OpRow {
    std::string kind;
    int hops = 0;
    std::uint64_t messages = 0;
    std::uint64_t attempts = 0;
};

struct SimMetrics {
    std::vector<OpRow> ops;
    std::uint64_t messages_total = 0;  // transmitted frames, requests and responses
    std::map<std::string, std::uint64_t> messages_by_kind;
    std::uint64_t mining_attempts_total = 0;

    void add_op(std::string kind, int hops, std::uint64_t messages, std::uint64_t attempts);
    void reset();
    std::string to_csv() const;  // op_kind,hops,messages,attempts
};

// Deterministic single-threaded discrete-event network hosting full
// protocol nodes. Identical (config, action sequence) pairs produce
// byte-identical traces and metrics. Mining runs outside the simulated
// clock; its cost is recorded as attempts, convertible to seconds via a
// hash-rate figure.
class Sim {
public:
    explicit Sim(const SimConfig& config);
    ~Sim();

    Sim(const Sim&) = delete;
    Sim& operator=(const Sim&) = delete;

    const SimConfig& config() const { return config_; }
    std::size_t node_count() const { return nodes_.size(); }
    ProtocolNode& node(std::size_t i) { return *nodes_[i]; }
    const ProtocolNode& node(std::size_t i) const { return *nodes_[i]; }

    bool online(std::size_t i) const { return online_[i]; }
    void set_offline(std::size_t i);
    void set_online(std::size_t i);  // restores delivery and re-bootstraps

    std::uint64_t now_ms() const { return now_ms_; }
    Rng& rng() { return rng_; }
    SimMetrics& metrics() { return metrics_; }
    const SimMetrics& metrics() const { return metrics_; }
    const std::string& trace() const { return trace_; }

    // Drains every pending event (stale timeouts included).
    SimMetrics run_until_quiescent();

    // Convenience wrapper: runs fn as one named operation and records an
    // op row from the message delta plus the reported hops/attempts.
    template <typename Fn>
    auto record_op(const std::string& kind, std::uint64_t attempts_hint, Fn&& fn) {
        std::uint64_t before = metrics_.messages_total;
        auto result = fn();
        metrics_.add_op(kind, result.hops, metrics_.messages_total - before, attempts_hint);
        return result;
    }

    // Transport entry point; used by the per-node SimTransport only.
    std::vector<RpcOutcome> rpc_batch(std::size_t from, const std::vector<RpcCall>& batch);

private:
    enum class EventType { deliver_request, deliver_response, timeout };

    struct Event {
        EventType type = EventType::timeout;
        std::uint64_t call_id = 0;
        std::size_t from = 0;
        std::size_t to = 0;
        std::string kind;
        RpcRequest request;
        RpcResponse response;
    };

    struct PendingCall {
        bool resolved = false;
        RpcOutcome outcome;
    };

    void schedule(std::uint64_t at, Event ev);
    void process_next();
    bool all_resolved(const std::vector<std::uint64_t>& call_ids) const;
    std::uint64_t sample_latency();
    std::uint64_t timeout_ms() const;
    void trace_line(std::string line);

    SimConfig config_;
    Rng rng_;
    std::uint64_t now_ms_ = 0;
    std::uint64_t event_seq_ = 0;
    std::uint64_t call_seq_ = 0;
    std::uint64_t processed_events_ = 0;

    std::map<std::pair<std::uint64_t, std::uint64_t>, Event> queue_;  // (time, seq) -> event
    std::map<std::uint64_t, PendingCall> pending_;

    std::vector<std::unique_ptr<Transport>> transports_;
    std::vector<std::unique_ptr<ProtocolNode>> nodes_;
    std::vector<bool> online_;

    SimMetrics metrics_;
    std::string trace_;
};

}  // namespace dpush
