#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "dpush/block.hpp"
#include "dpush/routing.hpp"
#include "dpush/store.hpp"

namespace dpush {

struct PingRequest {};
struct FindNodeRequest {
    KeyId target;
};
struct StoreStaticRequest {
    Bytes data;
};
struct GetStaticRequest {
    KeyId id;
};
struct StoreUpdateableRequest {
    UpdateableRecord record;
};
struct GetUpdateableRequest {
    KeyId id;
};
struct StoreTargetedRequest {
    TargetedBlock block;
};
struct ScanTargetedRequest {
    KeyId target_key;
    Difficulty difficulty;
    ScanCursor cursor;
    std::uint32_t limit = 1;
};

using RpcRequest = std::variant<PingRequest, FindNodeRequest, StoreStaticRequest, GetStaticRequest,
                                StoreUpdateableRequest, GetUpdateableRequest, StoreTargetedRequest,
                                ScanTargetedRequest>;

struct PingResponse {};
struct FindNodeResponse {
    std::vector<NodeInfo> nodes;
};
struct StoreStaticResponse {
    StoreStatus status;
    KeyId id;
};
struct GetStaticResponse {
    std::optional<Bytes> data;
};
struct StoreUpdateableResponse {
    StoreStatus status;
};
struct GetUpdateableResponse {
    std::optional<UpdateableRecord> record;
};
struct StoreTargetedResponse {
    StoreStatus status;
};
struct ScanTargetedResponse {
    std::vector<TargetedBlock> blocks;
    ScanCursor next;
};

using RpcResponse =
    std::variant<PingResponse, FindNodeResponse, StoreStaticResponse, GetStaticResponse,
                 StoreUpdateableResponse, GetUpdateableResponse, StoreTargetedResponse,
                 ScanTargetedResponse>;

const char* rpc_kind(const RpcRequest& req);

// One logical RPC: destination plus request. Batched calls within one wave
// are semantically concurrent; the transport decides the interleaving.
using RpcCall = std::pair<NodeInfo, RpcRequest>;
using RpcOutcome = std::optional<RpcResponse>;  // nullopt: dropped, offline or timed out

class Transport {
public:
    virtual ~Transport() = default;
    virtual std::vector<RpcOutcome> call(const NodeInfo& from, const std::vector<RpcCall>& batch) = 0;
};

}  // namespace dpush
