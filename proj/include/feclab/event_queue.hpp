// event_queue.hpp -- deterministic discrete-event scheduler.
//
// Events order by (time, insertion ordinal): the ordinal breaks ties, so
// two events at exactly the same instant fire in the order they were
// scheduled and a run is a pure function of its inputs.

#pragma once

#include <cstdint>
#include <queue>
#include <variant>
#include <vector>

#include "feclab/wire.hpp"

namespace feclab {

enum class EventKind : std::uint8_t {
    FrameDue,       // traffic model hands bytes to the sender
    PacketArrival,  // forward-channel delivery at the receiver
    AckArrival,     // reverse-channel delivery at the sender (ack or feedback)
    FeedbackTimer,  // receiver-side periodic feedback report
    SendSlot,       // sender pacing wakeup
};

struct FrameDuePayload {
    std::uint64_t frame_index;
};
struct PacketArrivalPayload {
    AnyPacket packet;
};
struct AckArrivalPayload {
    AnyPacket packet;
};
struct FeedbackTimerPayload {};
struct SendSlotPayload {};

using EventPayload = std::variant<FrameDuePayload, PacketArrivalPayload,
                                  AckArrivalPayload, FeedbackTimerPayload,
                                  SendSlotPayload>;

struct Event {
    double at = 0.0;
    std::uint64_t ordinal = 0;
    EventKind kind = EventKind::SendSlot;
    EventPayload payload;
};

class EventQueue {
public:
    void push(double at, EventKind kind, EventPayload payload) {
        heap_.push(Event{at, next_ordinal_++, kind, std::move(payload)});
    }

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

    Event pop() {
        Event e = heap_.top();
        heap_.pop();
        return e;
    }

    const Event& peek() const { return heap_.top(); }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.ordinal > b.ordinal;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_ordinal_ = 0;
};

}  // namespace feclab
