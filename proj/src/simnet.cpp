#include "dpush/simnet.hpp"

#include <sstream>
#include <stdexcept>

namespace dpush {

namespace {

// Per-node view of the shared event loop.
class SimTransport final : public Transport {
public:
    SimTransport(Sim& sim, std::size_t index) : sim_(&sim), index_(index) {}

    std::vector<RpcOutcome> call(const NodeInfo&, const std::vector<RpcCall>& batch) override {
        return sim_->rpc_batch(index_, batch);
    }

private:
    Sim* sim_;
    std::size_t index_;
};

std::array<std::uint8_t, 32> node_seed(std::uint64_t master_seed, std::size_t index) {
    Bytes material;
    put_u64_be(material, master_seed);
    Bytes tag = to_bytes("dpush-sim-node");
    material.insert(material.end(), tag.begin(), tag.end());
    put_u64_be(material, index);
    KeyId digest = sha512(material);
    std::array<std::uint8_t, 32> seed;
    std::copy(digest.bytes.begin(), digest.bytes.begin() + 32, seed.begin());
    return seed;
}

}  // namespace

void SimMetrics::add_op(std::string kind, int hops, std::uint64_t messages,
                        std::uint64_t attempts) {
    mining_attempts_total += attempts;
    ops.push_back(OpRow{std::move(kind), hops, messages, attempts});
}

void SimMetrics::reset() {
    ops.clear();
    messages_total = 0;
    messages_by_kind.clear();
    mining_attempts_total = 0;
}

std::string SimMetrics::to_csv() const {
    std::ostringstream out;
    out << "op_kind,hops,messages,attempts\n";
    for (const auto& row : ops)
        out << row.kind << ',' << row.hops << ',' << row.messages << ',' << row.attempts << '\n';
    return out.str();
}

Sim::Sim(const SimConfig& config) : config_(config), rng_(config.seed) {
    if (config_.node_count < 1) throw std::invalid_argument("sim: node_count must be >= 1");
    if (config_.latency_max_ms < config_.latency_min_ms)
        throw std::invalid_argument("sim: latency range inverted");
    if (config_.drop_rate < 0.0 || config_.drop_rate > 1.0)
        throw std::invalid_argument("sim: drop_rate out of [0,1]");

    NodeParams params;
    params.k = config_.k;
    params.alpha = config_.alpha;
    params.replication = config_.replication;
    params.policy.min_targeted_difficulty = Difficulty(config_.floor_bits);
    params.policy.max_block_size = config_.max_block_size;

    const CryptoSuite& suite = default_suite();
    for (std::size_t i = 0; i < config_.node_count; ++i) {
        transports_.push_back(std::make_unique<SimTransport>(*this, i));
        auto identity = suite.sig_keypair_from_seed(node_seed(config_.seed, i));
        nodes_.push_back(std::make_unique<ProtocolNode>(suite, std::move(identity), i, params,
                                                        *transports_.back()));
        online_.push_back(true);
    }

    // Scripted bootstrap: everyone joins through node 0.
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        trace_line("join n" + std::to_string(i) + " via n0");
        nodes_[i]->bootstrap(nodes_[0]->info());
    }
}

Sim::~Sim() = default;

void Sim::set_offline(std::size_t i) {
    online_[i] = false;
    trace_line("offline n" + std::to_string(i));
}

void Sim::set_online(std::size_t i) {
    online_[i] = true;
    trace_line("online n" + std::to_string(i));
    for (std::size_t seed = 0; seed < nodes_.size(); ++seed) {
        if (seed == i || !online_[seed]) continue;
        nodes_[i]->bootstrap(nodes_[seed]->info());
        break;
    }
}

SimMetrics Sim::run_until_quiescent() {
    while (!queue_.empty()) process_next();
    trace_line("quiescent");
    return metrics_;
}

std::uint64_t Sim::timeout_ms() const {
    return config_.timeout_ms ? config_.timeout_ms : 4ull * config_.latency_max_ms;
}

std::uint64_t Sim::sample_latency() {
    if (config_.latency_min_ms == config_.latency_max_ms) return config_.latency_min_ms;
    return rng_.between(config_.latency_min_ms, config_.latency_max_ms);
}

void Sim::trace_line(std::string line) {
    if (!config_.record_trace) return;
    trace_ += "t=" + std::to_string(now_ms_) + ' ' + std::move(line) + '\n';
}

void Sim::schedule(std::uint64_t at, Event ev) {
    queue_.emplace(std::make_pair(at, event_seq_++), std::move(ev));
}

bool Sim::all_resolved(const std::vector<std::uint64_t>& call_ids) const {
    for (auto id : call_ids) {
        auto it = pending_.find(id);
        if (it != pending_.end() && !it->second.resolved) return false;
    }
    return true;
}

std::vector<RpcOutcome> Sim::rpc_batch(std::size_t from, const std::vector<RpcCall>& batch) {
    std::vector<std::uint64_t> ids;
    ids.reserve(batch.size());

    for (const auto& [to_info, request] : batch) {
        std::uint64_t id = ++call_seq_;
        ids.push_back(id);
        pending_[id] = PendingCall{};

        std::size_t to = to_info.endpoint;
        std::string kind = rpc_kind(request);
        metrics_.messages_total += 1;
        metrics_.messages_by_kind[kind] += 1;
        trace_line("req " + kind + " n" + std::to_string(from) + ">n" + std::to_string(to) +
                   " c" + std::to_string(id));

        // Every call resolves through either a response or this timeout.
        Event timeout;
        timeout.type = EventType::timeout;
        timeout.call_id = id;
        timeout.kind = kind;
        schedule(now_ms_ + timeout_ms(), std::move(timeout));

        if (rng_.chance(config_.drop_rate)) {
            trace_line("drop req " + kind + " c" + std::to_string(id));
            continue;
        }
        Event deliver;
        deliver.type = EventType::deliver_request;
        deliver.call_id = id;
        deliver.from = from;
        deliver.to = to;
        deliver.kind = kind;
        deliver.request = request;
        schedule(now_ms_ + sample_latency(), std::move(deliver));
    }

    while (!all_resolved(ids)) {
        if (queue_.empty()) throw std::logic_error("sim: unresolved calls with empty queue");
        process_next();
    }

    std::vector<RpcOutcome> outcomes;
    outcomes.reserve(ids.size());
    for (auto id : ids) {
        outcomes.push_back(std::move(pending_[id].outcome));
        pending_.erase(id);
    }
    return outcomes;
}

void Sim::process_next() {
    if (++processed_events_ > config_.max_events)
        throw std::runtime_error("sim: event budget exceeded (runaway scenario)");

    auto node_handle = queue_.extract(queue_.begin());
    const auto [at, seq] = node_handle.key();
    Event ev = std::move(node_handle.mapped());
    if (at > now_ms_) now_ms_ = at;  // simulated time never decreases

    switch (ev.type) {
        case EventType::deliver_request: {
            if (!online_[ev.to]) {
                trace_line("lost " + ev.kind + " c" + std::to_string(ev.call_id) + " offline n" +
                           std::to_string(ev.to));
                return;
            }
            trace_line("deliver " + ev.kind + " n" + std::to_string(ev.from) + ">n" +
                       std::to_string(ev.to) + " c" + std::to_string(ev.call_id));
            RpcResponse response = nodes_[ev.to]->handle(nodes_[ev.from]->info(), ev.request);

            metrics_.messages_total += 1;
            metrics_.messages_by_kind[ev.kind + "_resp"] += 1;
            if (rng_.chance(config_.drop_rate)) {
                trace_line("drop rsp " + ev.kind + " c" + std::to_string(ev.call_id));
                return;
            }
            Event reply;
            reply.type = EventType::deliver_response;
            reply.call_id = ev.call_id;
            reply.from = ev.to;
            reply.to = ev.from;
            reply.kind = ev.kind;
            reply.response = std::move(response);
            schedule(now_ms_ + sample_latency(), std::move(reply));
            return;
        }
        case EventType::deliver_response: {
            auto it = pending_.find(ev.call_id);
            if (it == pending_.end() || it->second.resolved) return;
            trace_line("rsp " + ev.kind + " n" + std::to_string(ev.from) + ">n" +
                       std::to_string(ev.to) + " c" + std::to_string(ev.call_id));
            it->second.resolved = true;
            it->second.outcome = std::move(ev.response);
            return;
        }
        case EventType::timeout: {
            auto it = pending_.find(ev.call_id);
            if (it == pending_.end() || it->second.resolved) return;  // stale
            trace_line("timeout " + ev.kind + " c" + std::to_string(ev.call_id));
            it->second.resolved = true;
            it->second.outcome = std::nullopt;
            return;
        }
    }
}

}  // namespace dpush
