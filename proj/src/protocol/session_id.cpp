#include <cstdio>
#include <random>

#include "openverse/protocol/message.hpp"

namespace openverse {

namespace {

std::string random_epoch() {
    std::random_device rd;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rd()));
    return buf;
}

}  // namespace

SessionIdAllocator::SessionIdAllocator() : epoch_(random_epoch()) {}

SessionIdAllocator::SessionIdAllocator(std::string epoch) : epoch_(std::move(epoch)) {}

SessionId SessionIdAllocator::next() {
    return "s" + epoch_ + "-" + std::to_string(counter_.fetch_add(1) + 1);
}

}  // namespace openverse
