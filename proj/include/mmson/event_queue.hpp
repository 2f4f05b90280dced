#pragma once

#include <chrono>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mmson {

using VirtualTime = std::chrono::microseconds;

inline double to_seconds(VirtualTime t) noexcept {
    return std::chrono::duration<double>(t).count();
}

inline VirtualTime from_seconds(double s) {
    return std::chrono::round<VirtualTime>(std::chrono::duration<double>(s));
}

/// Deterministic priority queue over virtual time.
///
/// Events pop in nondecreasing time. At equal time, all message
/// deliveries precede all timers, and within a lane insertion order wins.
/// Popping an event advances the clock; pushing into the past throws.
template <class Payload>
class EventQueue {
public:
    enum class Lane : std::uint8_t { Delivery = 0, Timer = 1 };

    struct Entry {
        VirtualTime time;
        Lane lane;
        std::uint64_t sequence;
        Payload payload;
    };

    void push(VirtualTime time, Lane lane, Payload payload) {
        if (time < now_) throw std::logic_error("event scheduled in the past");
        heap_.push(Entry{time, lane, next_sequence_++, std::move(payload)});
    }

    Entry pop() {
        Entry e = heap_.top();
        heap_.pop();
        now_ = e.time;
        return e;
    }

    const Entry& top() const { return heap_.top(); }
    bool empty() const noexcept { return heap_.empty(); }
    std::size_t size() const noexcept { return heap_.size(); }
    VirtualTime now() const noexcept { return now_; }

    /// Moves the clock forward without processing events.
    void advance_to(VirtualTime t) {
        if (t < now_) throw std::logic_error("clock cannot move backwards");
        now_ = t;
    }

private:
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const noexcept {
            if (a.time != b.time) return a.time > b.time;
            if (a.lane != b.lane) return a.lane > b.lane;
            return a.sequence > b.sequence;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::uint64_t next_sequence_ = 0;
    VirtualTime now_{0};
};

}  // namespace mmson
