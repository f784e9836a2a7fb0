#pragma once

#include <cstddef>
#include <deque>
#include <stdexcept>

#include "tisim/il2_field.hpp"

namespace tisim {

/// FIFO of pending completion times of the delayed recruitment channel.
/// With a constant delay, completion times arrive in nondecreasing order, so
/// the queue head is always the earliest pending completion.
class ScheduleQueue {
public:
    double head() const { return pending_.empty() ? kNever : pending_.front(); }
    bool empty() const { return pending_.empty(); }
    std::size_t size() const { return pending_.size(); }

    void enqueue(double completion_time) {
        if (!pending_.empty() && completion_time < pending_.back()) {
            throw std::logic_error("ScheduleQueue: completion times must be nondecreasing");
        }
        pending_.push_back(completion_time);
    }

    double dequeue() {
        if (pending_.empty()) throw std::logic_error("ScheduleQueue: dequeue from empty queue");
        const double t = pending_.front();
        pending_.pop_front();
        return t;
    }

private:
    std::deque<double> pending_;
};

}  // namespace tisim
