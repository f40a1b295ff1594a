#pragma once

#include <deque>
#include <vector>

#include "dualdrive/token.hpp"

namespace dd::encoder {

struct KeyEntry {
    SceneToken token;
    double steer = 0.0;  // [-1, 1]
    double brake = 0.0;  // [0, 1]
};

// FIFO ring of momentum-encoded tokens with their control labels; oldest
// entries are evicted first once capacity is reached.
class KeyDictionary {
public:
    explicit KeyDictionary(std::size_t capacity = 4096) : capacity_(capacity) {}

    // Appends a batch; returns the number of entries dropped because the
    // batch alone exceeded capacity (callers may warn on a nonzero result).
    std::size_t push(const std::vector<KeyEntry>& batch) {
        std::size_t dropped = 0;
        std::size_t start = 0;
        if (batch.size() > capacity_) {
            dropped = batch.size() - capacity_;
            start = dropped;  // keep only the newest `capacity` entries
        }
        for (std::size_t i = start; i < batch.size(); ++i) {
            if (entries_.size() == capacity_) entries_.pop_front();
            entries_.push_back(batch[i]);
        }
        return dropped;
    }

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<KeyEntry>& entries() const { return entries_; }

private:
    std::size_t capacity_;
    std::deque<KeyEntry> entries_;
};

}  // namespace dd::encoder
