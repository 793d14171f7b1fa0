#pragma once

#include <cstdint>
#include <deque>

namespace lossid::sim {

enum class EnqueueResult { Accepted, QDrop };

// Tail-drop FIFO in front of the bottleneck link. Occupancy counts packets,
// not bytes.
class BottleneckQueue {
public:
    explicit BottleneckQueue(std::int64_t capacity_pkts) : capacity_(capacity_pkts) {}

    EnqueueResult enqueue(std::int64_t copy_id) {
        if (static_cast<std::int64_t>(q_.size()) >= capacity_) return EnqueueResult::QDrop;
        q_.push_back(copy_id);
        return EnqueueResult::Accepted;
    }

    std::int64_t pop_front() {
        const std::int64_t id = q_.front();
        q_.pop_front();
        return id;
    }

    std::int64_t front() const { return q_.front(); }
    bool empty() const { return q_.empty(); }
    std::int64_t occupancy() const { return static_cast<std::int64_t>(q_.size()); }
    std::int64_t capacity() const { return capacity_; }

private:
    std::int64_t capacity_;
    std::deque<std::int64_t> q_;
};

}  // namespace lossid::sim
