#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mmson/deployment.hpp"
#include "mmson/event_queue.hpp"
#include "mmson/geometry.hpp"
#include "mmson/rng.hpp"

namespace mmson {

enum class NodeStatus : std::uint8_t { Idle, Candidate, ClusterHead, IbMember, ObMember };
enum class Band : std::uint8_t { InBand, OutBand };

enum class MessageKind : std::uint8_t {
    Hello,              // neighbor discovery on arrival; heads answer with an announce
    CandidacyAnnounce,
    JoinRequest,
    JoinAck,
    ChResign,           // "I am not (or no longer) a head"
    LeaveNotice,
};

const char* to_string(NodeStatus s) noexcept;
const char* to_string(Band b) noexcept;
const char* to_string(MessageKind k) noexcept;

struct FlocMessage {
    MessageKind kind = MessageKind::Hello;
    int sender = -1;
    Point2D sender_position;
    int cluster_id = -1;
    Band band = Band::InBand;
    VirtualTime announce_time{0};  // candidacy key of the announcing head
};

struct FlocParams {
    double unit_distance_m = 100.0;
    double outband_distance_m = 200.0;
    VirtualTime arrival_window = std::chrono::seconds(10);
    VirtualTime backoff_max = std::chrono::seconds(1);
    VirtualTime message_delay = std::chrono::milliseconds(10);
    VirtualTime time_budget = std::chrono::seconds(60);
    // A node whose backoff expires with heads only in out-band range joins one
    // as OB. When false it runs for head instead and clusters stay in-band.
    bool outband_join = true;

    void validate() const;

    friend bool operator==(const FlocParams&, const FlocParams&) = default;
};

struct KnownHead {
    int id = -1;
    Point2D position;
    VirtualTime announce_time{0};
};

struct Membership {
    int id = -1;
    Band band = Band::InBand;

    friend bool operator==(const Membership&, const Membership&) = default;
};

/// Everything a single node knows. Transitions never touch other nodes.
struct NodeState {
    int id = -1;
    Point2D position;
    NodeStatus status = NodeStatus::Idle;
    bool started = false;
    bool backoff_expired = false;
    int head = -1;  // own id when head
    Band band = Band::InBand;
    VirtualTime announce_time{0};
    std::optional<int> pending_join;
    Band pending_band = Band::InBand;
    std::uint32_t epoch = 0;  // invalidates stale timers
    std::vector<KnownHead> known_heads;
    std::vector<Membership> members;  // heads only, excludes self
};

enum class TimerKind : std::uint8_t { CandidacyBackoff, ConflictWait };

/// Arrival (or re-arrival after losing a head). `backoff` is the drawn wait.
struct Start {
    VirtualTime backoff{0};
};

struct TimerExpiry {
    TimerKind kind = TimerKind::CandidacyBackoff;
    std::uint32_t epoch = 0;
};

using ProtocolInput = std::variant<Start, FlocMessage, TimerExpiry>;

struct Outgoing {
    FlocMessage message;
    std::optional<int> destination;  // nullopt broadcasts within delivery radius
};

struct TimerRequest {
    TimerKind kind;
    VirtualTime delay;
    std::uint32_t epoch;
};

struct StepResult {
    NodeState state;
    std::vector<Outgoing> messages;
    std::vector<TimerRequest> timers;
    bool restart = false;  // node lost its head and must run a fresh Start
};

/// Pure per-node transition. Same (state, input, now) gives the same result.
///
/// Candidacy keys order by (announce time, node id). A candidate hearing an
/// announce from inside unit distance with a smaller key withdraws and joins
/// it in-band. Throws ProtocolError on an out-of-range message kind.
StepResult candidacy_protocol_step(const NodeState& state, const ProtocolInput& input,
                                   VirtualTime now, const FlocParams& params);

struct ClusterMember {
    int id = -1;
    Band band = Band::InBand;

    friend bool operator==(const ClusterMember&, const ClusterMember&) = default;
};

struct Cluster {
    int head = -1;
    VirtualTime head_announce_time{0};
    std::vector<ClusterMember> members;  // sorted by id, excludes the head

    std::size_t size() const noexcept { return members.size() + 1; }
    std::vector<int> node_ids() const;  // head first, then members

    friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct ClusterAssignment {
    std::vector<Cluster> clusters;  // sorted by head id
    std::vector<int> unclustered;
    VirtualTime convergence_time{0};

    std::size_t node_count() const noexcept;
    const Cluster* find_cluster(int head) const noexcept;
    /// Head of the cluster containing `bs`, or -1.
    int head_of(int bs) const noexcept;

    friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

struct TraceEvent {
    VirtualTime time{0};
    int node = -1;
    MessageKind kind = MessageKind::Hello;  // meaningful when is_message
    bool is_message = false;
    int peer = -1;
    NodeStatus status_after = NodeStatus::Idle;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// Single-threaded discrete-event driver for the per-node state machines.
class FlocEngine {
public:
    FlocEngine(FlocParams params, std::uint64_t seed);

    const FlocParams& params() const noexcept { return params_; }

    /// Schedules a fresh node to arrive `after` the current clock.
    void add_station(const BaseStation& bs, VirtualTime after);
    /// Installs a converged assignment as terminal node states.
    void load(const ClusterAssignment& assignment, std::span<const BaseStation> stations);
    /// Departs a present node now: heads resign, members send a leave notice.
    void remove_station(int id);

    /// Processes events until the queue drains. Throws ConvergenceError if
    /// the budget (measured from the call) is exceeded or nodes remain unclustered.
    void run();

    bool contains(int id) const noexcept { return nodes_.count(id) != 0; }
    ClusterAssignment assignment() const;
    const std::vector<TraceEvent>& trace() const noexcept { return trace_; }
    const NodeState& node(int id) const { return nodes_.at(id).state; }
    VirtualTime now() const noexcept { return queue_.now(); }

private:
    struct Delivery {
        int destination;
        FlocMessage message;
    };
    struct Arrival {
        int node;
    };
    struct Timer {
        int node;
        TimerExpiry expiry;
    };
    using Event = std::variant<Arrival, Delivery, Timer>;

    struct Slot {
        NodeState state;
        bool present = false;
    };

    void apply(int id, const ProtocolInput& input);
    void dispatch(int from, const Outgoing& out);

    FlocParams params_;
    Rng rng_;
    std::map<int, Slot> nodes_;
    EventQueue<Event> queue_;
    std::vector<TraceEvent> trace_;
    VirtualTime last_change_{0};
};

/// Clusters every station of the layout. Arrivals are uniform in the
/// arrival window. Throws ConvergenceError on budget exhaustion.
ClusterAssignment run_clustering(const NetworkLayout& layout, const FlocParams& params,
                                 std::uint64_t seed, std::vector<TraceEvent>* trace = nullptr);

/// Local self-healing: clusters one new station against a converged assignment.
ClusterAssignment add_node(const ClusterAssignment& assignment, std::span<const BaseStation> stations,
                           const BaseStation& new_bs, const FlocParams& params, std::uint64_t seed);

/// Local self-healing after a departure. Throws ConfigError for unknown ids.
ClusterAssignment remove_node(const ClusterAssignment& assignment, std::span<const BaseStation> stations,
                              int bs_id, const FlocParams& params, std::uint64_t seed);

struct Violation {
    std::string rule;  // heads-too-close, out-of-range-member, ob-in-band-of-other-head, ...
    std::vector<int> nodes;
    std::string detail;
};

/// Checks every structural and geometric invariant of an assignment.
std::vector<Violation> verify_assignment(const ClusterAssignment& assignment, std::span<const BaseStation> stations,
                                         double unit_distance_m, double outband_distance_m);

std::vector<Violation> verify_assignment(const ClusterAssignment& assignment, const NetworkLayout& layout,
                                         double unit_distance_m, double outband_distance_m);

}  // namespace mmson
