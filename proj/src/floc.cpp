#include "mmson/floc.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mmson/errors.hpp"

namespace mmson {

const char* to_string(NodeStatus s) noexcept {
    switch (s) {
        case NodeStatus::Idle: return "IDLE";
        case NodeStatus::Candidate: return "CANDIDATE";
        case NodeStatus::ClusterHead: return "CLUSTER_HEAD";
        case NodeStatus::IbMember: return "IB_MEMBER";
        case NodeStatus::ObMember: return "OB_MEMBER";
    }
    return "?";
}

const char* to_string(Band b) noexcept { return b == Band::InBand ? "IB" : "OB"; }

const char* to_string(MessageKind k) noexcept {
    switch (k) {
        case MessageKind::Hello: return "HELLO";
        case MessageKind::CandidacyAnnounce: return "CANDIDACY_ANNOUNCE";
        case MessageKind::JoinRequest: return "JOIN_REQUEST";
        case MessageKind::JoinAck: return "JOIN_ACK";
        case MessageKind::ChResign: return "CH_RESIGN";
        case MessageKind::LeaveNotice: return "LEAVE_NOTICE";
    }
    return "?";
}

void FlocParams::validate() const {
    if (!(unit_distance_m > 0.0)) throw ConfigError("floc: unit_distance_m must be > 0");
    if (!(outband_distance_m >= unit_distance_m))
        throw ConfigError("floc: outband_distance_m must be >= unit_distance_m");
    if (arrival_window.count() < 0 || backoff_max.count() < 0)
        throw ConfigError("floc: arrival_window and backoff_max must be >= 0");
    if (message_delay.count() <= 0) throw ConfigError("floc: message_delay must be > 0");
    if (time_budget.count() <= 0) throw ConfigError("floc: time_budget must be > 0");
}

// ---------------------------------------------------------------------------
// Per-node state machine

namespace {

bool key_less(VirtualTime ta, int ida, VirtualTime tb, int idb) noexcept {
    return ta != tb ? ta < tb : ida < idb;
}

FlocMessage make_message(MessageKind kind, const NodeState& s) {
    FlocMessage m;
    m.kind = kind;
    m.sender = s.id;
    m.sender_position = s.position;
    m.cluster_id = s.head;
    m.band = s.band;
    m.announce_time = s.announce_time;
    return m;
}

void remember(NodeState& s, const FlocMessage& m) {
    if (m.sender == s.id) return;
    auto it = std::find_if(s.known_heads.begin(), s.known_heads.end(),
                           [&](const KnownHead& h) { return h.id == m.sender; });
    if (it == s.known_heads.end())
        s.known_heads.push_back({m.sender, m.sender_position, m.announce_time});
    else
        *it = {m.sender, m.sender_position, m.announce_time};
}

void forget(NodeState& s, int id) {
    std::erase_if(s.known_heads, [&](const KnownHead& h) { return h.id == id; });
}

// Smallest-key known head within `radius`, skipping `exclude`.
std::optional<KnownHead> best_head(const NodeState& s, double radius, int exclude = -1) {
    std::optional<KnownHead> best;
    for (const auto& h : s.known_heads) {
        if (h.id == exclude || distance(h.position, s.position) > radius) continue;
        if (!best || key_less(h.announce_time, h.id, best->announce_time, best->id)) best = h;
    }
    return best;
}

void send(StepResult& r, MessageKind kind, std::optional<int> to, Band band = Band::InBand) {
    FlocMessage m = make_message(kind, r.state);
    m.band = band;
    r.messages.push_back({m, to});
}

void request_join(StepResult& r, int head, Band band) {
    r.state.pending_join = head;
    r.state.pending_band = band;
    send(r, MessageKind::JoinRequest, head, band);
}

void decide(StepResult& r, VirtualTime now, const FlocParams& p) {
    auto& s = r.state;
    if (auto h = best_head(s, p.unit_distance_m)) {
        request_join(r, h->id, Band::InBand);
    } else if (auto ob = p.outband_join ? best_head(s, p.outband_distance_m) : std::nullopt) {
        request_join(r, ob->id, Band::OutBand);
    } else {
        s.status = NodeStatus::Candidate;
        s.head = s.id;
        s.announce_time = now;
        ++s.epoch;
        send(r, MessageKind::CandidacyAnnounce, std::nullopt);
        r.timers.push_back({TimerKind::ConflictWait, p.message_delay, s.epoch});
    }
}

void maybe_migrate(StepResult& r, const FlocParams& p) {
    auto& s = r.state;
    if (s.status != NodeStatus::ObMember || s.pending_join) return;
    if (auto h = best_head(s, p.unit_distance_m, s.head)) request_join(r, h->id, Band::InBand);
}

void on_message(StepResult& r, const FlocMessage& m, VirtualTime now, const FlocParams& p) {
    auto& s = r.state;
    switch (m.kind) {
        case MessageKind::Hello:
            if (s.status == NodeStatus::Candidate || s.status == NodeStatus::ClusterHead)
                send(r, MessageKind::CandidacyAnnounce, m.sender);
            return;

        case MessageKind::CandidacyAnnounce: {
            remember(s, m);
            const bool in_band = distance(s.position, m.sender_position) <= p.unit_distance_m;
            switch (s.status) {
                case NodeStatus::Idle:
                    if (in_band && !s.pending_join) request_join(r, m.sender, Band::InBand);
                    break;
                case NodeStatus::Candidate:
                    if (in_band && key_less(m.announce_time, m.sender, s.announce_time, s.id)) {
                        s.status = NodeStatus::Idle;
                        s.head = -1;
                        ++s.epoch;
                        send(r, MessageKind::ChResign, std::nullopt);
                        request_join(r, m.sender, Band::InBand);
                    }
                    break;
                case NodeStatus::ObMember:
                    maybe_migrate(r, p);
                    break;
                case NodeStatus::ClusterHead:
                case NodeStatus::IbMember:
                    break;
            }
            return;
        }

        case MessageKind::JoinRequest:
            if (s.status == NodeStatus::ClusterHead) {
                auto it = std::find_if(s.members.begin(), s.members.end(),
                                       [&](const Membership& mb) { return mb.id == m.sender; });
                if (it == s.members.end())
                    s.members.push_back({m.sender, m.band});
                else
                    it->band = m.band;
                send(r, MessageKind::JoinAck, m.sender, m.band);
            } else {
                send(r, MessageKind::ChResign, m.sender);
            }
            return;

        case MessageKind::JoinAck:
            if (s.pending_join != m.sender) {
                // Late acceptance from a head we no longer want.
                send(r, MessageKind::LeaveNotice, m.sender);
                return;
            }
            if (s.status == NodeStatus::ObMember && s.head >= 0 && s.head != m.sender)
                send(r, MessageKind::LeaveNotice, s.head);
            s.pending_join.reset();
            s.head = m.sender;
            s.band = m.band;
            s.status = m.band == Band::InBand ? NodeStatus::IbMember : NodeStatus::ObMember;
            maybe_migrate(r, p);
            return;

        case MessageKind::ChResign: {
            forget(s, m.sender);
            const bool was_pending = s.pending_join == m.sender;
            if (was_pending) s.pending_join.reset();
            const bool member = s.status == NodeStatus::IbMember || s.status == NodeStatus::ObMember;
            if (member && s.head == m.sender) {
                s.status = NodeStatus::Idle;
                s.head = -1;
                s.pending_join.reset();
                r.restart = true;
            } else if (was_pending && s.status == NodeStatus::Idle && s.backoff_expired) {
                decide(r, now, p);
            } else if (was_pending && s.status == NodeStatus::ObMember) {
                maybe_migrate(r, p);
            }
            return;
        }

        case MessageKind::LeaveNotice:
            if (s.status == NodeStatus::ClusterHead)
                std::erase_if(s.members, [&](const Membership& mb) { return mb.id == m.sender; });
            return;
    }
    throw ProtocolError("floc: unknown message kind " + std::to_string(static_cast<int>(m.kind)));
}

}  // namespace

StepResult candidacy_protocol_step(const NodeState& state, const ProtocolInput& input, VirtualTime now,
                                   const FlocParams& params) {
    StepResult r{state, {}, {}, false};
    auto& s = r.state;

    if (const auto* start = std::get_if<Start>(&input)) {
        s.started = true;
        s.status = NodeStatus::Idle;
        s.head = -1;
        s.members.clear();
        s.pending_join.reset();
        s.backoff_expired = false;
        ++s.epoch;
        send(r, MessageKind::Hello, std::nullopt);
        r.timers.push_back({TimerKind::CandidacyBackoff, 2 * params.message_delay + start->backoff, s.epoch});
        return r;
    }

    if (!s.started) throw ProtocolError("floc: node " + std::to_string(s.id) + " received input before start");

    if (const auto* timer = std::get_if<TimerExpiry>(&input)) {
        if (timer->epoch != s.epoch) return r;
        switch (timer->kind) {
            case TimerKind::CandidacyBackoff:
                if (s.status != NodeStatus::Idle) return r;
                s.backoff_expired = true;
                if (!s.pending_join) decide(r, now, params);
                return r;
            case TimerKind::ConflictWait:
                if (s.status == NodeStatus::Candidate) s.status = NodeStatus::ClusterHead;
                return r;
        }
        throw ProtocolError("floc: unknown timer kind");
    }

    on_message(r, std::get<FlocMessage>(input), now, params);
    return r;
}

// ---------------------------------------------------------------------------
// Assignment helpers

std::vector<int> Cluster::node_ids() const {
    std::vector<int> ids{head};
    for (const auto& m : members) ids.push_back(m.id);
    return ids;
}

std::size_t ClusterAssignment::node_count() const noexcept {
    std::size_t n = unclustered.size();
    for (const auto& c : clusters) n += c.size();
    return n;
}

const Cluster* ClusterAssignment::find_cluster(int head) const noexcept {
    auto it = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& c) { return c.head == head; });
    return it == clusters.end() ? nullptr : &*it;
}

int ClusterAssignment::head_of(int bs) const noexcept {
    for (const auto& c : clusters) {
        if (c.head == bs) return c.head;
        for (const auto& m : c.members)
            if (m.id == bs) return c.head;
    }
    return -1;
}

// ---------------------------------------------------------------------------
// Engine

FlocEngine::FlocEngine(FlocParams params, std::uint64_t seed) : params_(params), rng_(derive_seed(seed, {0xf10c})) {
    params_.validate();
}

void FlocEngine::add_station(const BaseStation& bs, VirtualTime after) {
    if (nodes_.count(bs.id)) throw ConfigError("floc: station " + std::to_string(bs.id) + " already present");
    Slot slot;
    slot.state.id = bs.id;
    slot.state.position = bs.position;
    nodes_.emplace(bs.id, std::move(slot));
    queue_.push(queue_.now() + after, EventQueue<Event>::Lane::Timer, Arrival{bs.id});
}

void FlocEngine::load(const ClusterAssignment& assignment, std::span<const BaseStation> stations) {
    std::unordered_map<int, Point2D> where;
    for (const auto& bs : stations) where[bs.id] = bs.position;
    auto position_of = [&](int id) {
        auto it = where.find(id);
        if (it == where.end()) throw ConfigError("floc: assignment references unknown station " + std::to_string(id));
        return it->second;
    };
    auto install = [&](NodeState s) {
        s.started = true;
        s.backoff_expired = true;
        if (nodes_.count(s.id)) throw ConfigError("floc: station " + std::to_string(s.id) + " listed twice");
        nodes_.emplace(s.id, Slot{std::move(s), true});
    };

    for (const auto& c : assignment.clusters) {
        NodeState head;
        head.id = c.head;
        head.position = position_of(c.head);
        head.status = NodeStatus::ClusterHead;
        head.head = c.head;
        head.announce_time = c.head_announce_time;
        for (const auto& m : c.members) head.members.push_back({m.id, m.band});
        install(head);
        for (const auto& m : c.members) {
            NodeState member;
            member.id = m.id;
            member.position = position_of(m.id);
            member.status = m.band == Band::InBand ? NodeStatus::IbMember : NodeStatus::ObMember;
            member.head = c.head;
            member.band = m.band;
            install(member);
        }
    }
    if (!assignment.unclustered.empty()) throw ConfigError("floc: cannot load an unconverged assignment");
    queue_.advance_to(std::max(queue_.now(), assignment.convergence_time));
    last_change_ = queue_.now();
}

void FlocEngine::remove_station(int id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end() || !it->second.present)
        throw ConfigError("floc: unknown station " + std::to_string(id));
    const NodeState& s = it->second.state;
    if (s.status == NodeStatus::ClusterHead || s.status == NodeStatus::Candidate) {
        dispatch(id, {make_message(MessageKind::ChResign, s), std::nullopt});
    } else if ((s.status == NodeStatus::IbMember || s.status == NodeStatus::ObMember) && s.head >= 0) {
        dispatch(id, {make_message(MessageKind::LeaveNotice, s), s.head});
    }
    nodes_.erase(it);
    last_change_ = queue_.now();
}

void FlocEngine::dispatch(int from, const Outgoing& out) {
    const VirtualTime at = queue_.now() + params_.message_delay;
    if (out.destination) {
        queue_.push(at, EventQueue<Event>::Lane::Delivery, Delivery{*out.destination, out.message});
        return;
    }
    for (const auto& [id, slot] : nodes_) {
        if (id == from) continue;
        if (distance(slot.state.position, out.message.sender_position) <= params_.outband_distance_m)
            queue_.push(at, EventQueue<Event>::Lane::Delivery, Delivery{id, out.message});
    }
}

void FlocEngine::apply(int id, const ProtocolInput& input) {
    Slot& slot = nodes_.at(id);
    StepResult r = candidacy_protocol_step(slot.state, input, queue_.now(), params_);

    const NodeState& before = slot.state;
    if (r.state.status != before.status || r.state.head != before.head || r.state.members != before.members)
        last_change_ = queue_.now();

    TraceEvent ev;
    ev.time = queue_.now();
    ev.node = id;
    if (const auto* m = std::get_if<FlocMessage>(&input)) {
        ev.is_message = true;
        ev.kind = m->kind;
        ev.peer = m->sender;
    }
    ev.status_after = r.state.status;
    trace_.push_back(ev);

    slot.state = std::move(r.state);
    for (const auto& out : r.messages) dispatch(id, out);
    for (const auto& t : r.timers)
        queue_.push(queue_.now() + t.delay, EventQueue<Event>::Lane::Timer, Timer{id, {t.kind, t.epoch}});
    if (r.restart) {
        const auto span = static_cast<double>(params_.backoff_max.count());
        apply(id, Start{VirtualTime(static_cast<std::int64_t>(uniform01(rng_) * span))});
    }
}

void FlocEngine::run() {
    const VirtualTime started = queue_.now();
    while (!queue_.empty()) {
        if (queue_.top().time - started > params_.time_budget) {
            auto partial = assignment();
            std::vector<int> pending = partial.unclustered;
            std::ostringstream os;
            os << "floc: no convergence within " << to_seconds(params_.time_budget) << " s of virtual time; "
               << pending.size() << " unclustered:";
            for (int id : pending) os << ' ' << id;
            throw ConvergenceError(os.str(), pending);
        }
        auto entry = queue_.pop();
        std::visit(
            [&](auto& ev) {
                using T = std::decay_t<decltype(ev)>;
                if constexpr (std::is_same_v<T, Arrival>) {
                    auto& slot = nodes_.at(ev.node);
                    slot.present = true;
                    const auto span = static_cast<double>(params_.backoff_max.count());
                    apply(ev.node, Start{VirtualTime(static_cast<std::int64_t>(uniform01(rng_) * span))});
                } else if constexpr (std::is_same_v<T, Delivery>) {
                    auto it = nodes_.find(ev.destination);
                    if (it != nodes_.end() && it->second.present) apply(ev.destination, ev.message);
                } else {
                    auto it = nodes_.find(ev.node);
                    if (it != nodes_.end() && it->second.present) apply(ev.node, ev.expiry);
                }
            },
            entry.payload);
    }

    auto result = assignment();
    if (!result.unclustered.empty()) {
        std::ostringstream os;
        os << "floc: " << result.unclustered.size() << " nodes left unclustered:";
        for (int id : result.unclustered) os << ' ' << id;
        throw ConvergenceError(os.str(), result.unclustered);
    }
}

ClusterAssignment FlocEngine::assignment() const {
    ClusterAssignment out;
    std::map<int, Cluster> by_head;
    for (const auto& [id, slot] : nodes_) {
        if (slot.present && slot.state.status == NodeStatus::ClusterHead)
            by_head[id] = Cluster{id, slot.state.announce_time, {}};
    }
    for (const auto& [id, slot] : nodes_) {
        const NodeState& s = slot.state;
        switch (s.status) {
            case NodeStatus::ClusterHead:
                if (!slot.present) out.unclustered.push_back(id);
                break;
            case NodeStatus::IbMember:
            case NodeStatus::ObMember: {
                auto it = by_head.find(s.head);
                if (!slot.present || it == by_head.end() || s.pending_join)
                    out.unclustered.push_back(id);
                else
                    it->second.members.push_back({id, s.band});
                break;
            }
            default:
                out.unclustered.push_back(id);
        }
    }
    for (auto& [head, c] : by_head) {
        std::sort(c.members.begin(), c.members.end(),
                  [](const ClusterMember& a, const ClusterMember& b) { return a.id < b.id; });
        out.clusters.push_back(std::move(c));
    }
    out.convergence_time = last_change_;
    return out;
}

// ---------------------------------------------------------------------------
// Entry points

ClusterAssignment run_clustering(const NetworkLayout& layout, const FlocParams& params, std::uint64_t seed,
                                 std::vector<TraceEvent>* trace) {
    FlocEngine engine(params, seed);
    Rng arrivals(derive_seed(seed, {0xa441}));
    const auto window = static_cast<double>(params.arrival_window.count());
    for (const auto& bs : layout.stations)
        engine.add_station(bs, VirtualTime(static_cast<std::int64_t>(uniform01(arrivals) * window)));
    engine.run();
    if (trace) *trace = engine.trace();
    return engine.assignment();
}

ClusterAssignment add_node(const ClusterAssignment& assignment, std::span<const BaseStation> stations,
                           const BaseStation& new_bs, const FlocParams& params, std::uint64_t seed) {
    if (assignment.head_of(new_bs.id) >= 0)
        throw ConfigError("floc: station " + std::to_string(new_bs.id) + " is already clustered");
    FlocEngine engine(params, derive_seed(seed, {0xadd, static_cast<std::uint64_t>(new_bs.id)}));
    engine.load(assignment, stations);
    engine.add_station(new_bs, VirtualTime{0});
    engine.run();
    return engine.assignment();
}

ClusterAssignment remove_node(const ClusterAssignment& assignment, std::span<const BaseStation> stations,
                              int bs_id, const FlocParams& params, std::uint64_t seed) {
    if (assignment.head_of(bs_id) < 0) throw ConfigError("floc: unknown station " + std::to_string(bs_id));
    FlocEngine engine(params, derive_seed(seed, {0xde1, static_cast<std::uint64_t>(bs_id)}));
    engine.load(assignment, stations);
    engine.remove_station(bs_id);
    engine.run();
    return engine.assignment();
}

// ---------------------------------------------------------------------------
// Verification

std::vector<Violation> verify_assignment(const ClusterAssignment& assignment, std::span<const BaseStation> stations,
                                         double unit_distance_m, double outband_distance_m) {
    std::vector<Violation> out;
    std::unordered_map<int, Point2D> where;
    for (const auto& bs : stations) where[bs.id] = bs.position;

    std::unordered_map<int, int> seen;
    for (const auto& c : assignment.clusters)
        for (int id : c.node_ids()) ++seen[id];
    for (const auto& [id, count] : seen) {
        if (!where.count(id)) out.push_back({"unknown-node", {id}, "node is not in the layout"});
        if (count > 1) out.push_back({"duplicate-node", {id}, "node appears in " + std::to_string(count) + " clusters"});
    }
    for (const auto& bs : stations)
        if (!seen.count(bs.id)) out.push_back({"missing-node", {bs.id}, "node belongs to no cluster"});
    for (int id : assignment.unclustered) out.push_back({"unclustered", {id}, "node never settled"});

    auto dist = [&](int a, int b) { return distance(where.at(a), where.at(b)); };
    auto known = [&](int id) { return where.count(id) != 0; };

    for (const auto& c : assignment.clusters) {
        if (!known(c.head)) continue;
        for (const auto& m : c.members) {
            if (!known(m.id)) continue;
            const double d = dist(m.id, c.head);
            const double limit = m.band == Band::InBand ? unit_distance_m : outband_distance_m;
            if (d > limit) {
                std::ostringstream os;
                os << to_string(m.band) << " member " << m.id << " is " << d << " m from head " << c.head
                   << " (limit " << limit << " m)";
                out.push_back({"out-of-range-member", {m.id, c.head}, os.str()});
            }
            if (m.band == Band::OutBand) {
                for (const auto& other : assignment.clusters) {
                    if (other.head == c.head || !known(other.head)) continue;
                    if (dist(m.id, other.head) <= unit_distance_m) {
                        std::ostringstream os;
                        os << "OB member " << m.id << " of " << c.head << " is in band of head " << other.head;
                        out.push_back({"ob-in-band-of-other-head", {m.id, other.head}, os.str()});
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < assignment.clusters.size(); ++i) {
        for (std::size_t j = i + 1; j < assignment.clusters.size(); ++j) {
            const int a = assignment.clusters[i].head, b = assignment.clusters[j].head;
            if (!known(a) || !known(b)) continue;
            if (dist(a, b) <= unit_distance_m) {
                std::ostringstream os;
                os << "heads " << a << " and " << b << " are " << dist(a, b) << " m apart";
                out.push_back({"heads-too-close", {a, b}, os.str()});
            }
        }
    }
    return out;
}

std::vector<Violation> verify_assignment(const ClusterAssignment& assignment, const NetworkLayout& layout,
                                         double unit_distance_m, double outband_distance_m) {
    return verify_assignment(assignment, std::span<const BaseStation>(layout.stations), unit_distance_m,
                             outband_distance_m);
}

}  // namespace mmson
