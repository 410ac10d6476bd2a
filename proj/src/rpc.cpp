#include "dpush/rpc.hpp"

namespace dpush {

const char* rpc_kind(const RpcRequest& req) {
    struct Visitor {
        const char* operator()(const PingRequest&) { return "ping"; }
        const char* operator()(const FindNodeRequest&) { return "find_node"; }
        const char* operator()(const StoreStaticRequest&) { return "store_static"; }
        const char* operator()(const GetStaticRequest&) { return "get_static"; }
        const char* operator()(const StoreUpdateableRequest&) { return "store_updateable"; }
        const char* operator()(const GetUpdateableRequest&) { return "get_updateable"; }
        const char* operator()(const StoreTargetedRequest&) { return "store_targeted"; }
        const char* operator()(const ScanTargetedRequest&) { return "scan_targeted"; }
    };
    return std::visit(Visitor{}, req);
}

}  // namespace dpush
