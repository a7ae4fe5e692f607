#pragma once

#include "cbdc/bytes.hpp"
#include "cbdc/types.hpp"

#include <cstdint>
#include <memory>
#include <string_view>

namespace cbdc {

using SharedBytes = std::shared_ptr<const Bytes>;

/// Something that receives messages and timer callbacks.
class Endpoint {
public:
    virtual ~Endpoint() = default;
    virtual void on_message(NodeId from, const SharedBytes& message) = 0;
    virtual void on_timer(std::uint64_t tag) = 0;
};

/// What a node may do to the outside world. `kind` must have static storage
/// duration; it only labels trace records.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(NodeId from, NodeId to, std::string_view kind, SharedBytes message) = 0;
    virtual void set_timer(NodeId node, TimeMs at, std::uint64_t tag) = 0;
    virtual TimeMs now() const = 0;
};

}  // namespace cbdc
