#pragma once

// Randomized multi-client scripts run against room_step with simulated
// in-flight queues in both directions. Clients act only on what their own
// replica has seen, so ownership races and stale sends arise naturally.

#include <deque>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "openverse/protocol/admission.hpp"
#include "openverse/protocol/replica.hpp"
#include "openverse/server/room.hpp"
#include "replay_oracle.hpp"

namespace sim {

using namespace openverse;

struct Client {
    SessionId session;
    Replica replica;
    std::deque<WireMessage> up;
    std::deque<WireMessage> down;
    int updates_left = 0;
    int created = 0;
    bool gone = false;
    bool bye_sent = false;
};

struct ScriptOutcome {
    std::string oracle;
    std::string server;
    /// Canonical view of every client still connected at the end.
    std::map<SessionId, std::string> observers;
    std::size_t messages = 0;
    std::size_t ticks = 0;
    std::vector<std::string> invariant_failures;
    /// (session, entity, seq) orderings that went backwards at an observer.
    std::size_t order_violations = 0;
};

class ScriptRunner {
public:
    ScriptRunner(std::uint64_t seed, int sessions, int max_updates, std::shared_ptr<const WorldDescription> world)
        : rng_(seed), target_sessions_(sessions), max_updates_(max_updates) {
        room_ = make_room(room_id_, std::move(world));
        oracle_ = oracle::ReplayOracle(room_.entities);
    }

    ScriptOutcome run() {
        join_one();
        while (!done()) {
            const int roll = static_cast<int>(rng_() % 100);
            if (roll < 8 && static_cast<int>(clients_.size()) < target_sessions_) {
                join_one();
            } else if (roll < 50) {
                client_act(pick_client());
            } else if (roll < 70) {
                admit_some();
            } else if (roll < 82) {
                tick();
            } else {
                deliver_some();
            }
        }
        quiesce();
        ScriptOutcome out;
        out.oracle = oracle_.canonical();
        for (const auto& [id, e] : room_.entities) {
            out.server += canonical_encoding(e);
            out.server += '\n';
        }
        for (auto& c : clients_) {
            if (!c->gone) out.observers[c->session] = c->replica.canonical();
        }
        out.messages = messages_;
        out.ticks = ticks_;
        out.invariant_failures = check_room_invariants(room_);
        out.order_violations = order_violations_;
        return out;
    }

private:
    bool done() const {
        if (static_cast<int>(clients_.size()) < target_sessions_) return false;
        for (const auto& c : clients_) {
            if (!c->gone && !c->bye_sent && c->updates_left > 0) return false;
        }
        return true;
    }

    Client* pick_client() {
        std::vector<Client*> live;
        for (auto& c : clients_) {
            if (!c->bye_sent) live.push_back(c.get());
        }
        if (live.empty()) return nullptr;
        return live[rng_() % live.size()];
    }

    void join_one() {
        WireMessage hello;
        hello.kind = MessageKind::Hello;
        hello.room = room_id_;
        hello.body = {{"version", kProtocolVersion}};
        const json snapshot = snapshot_body("sim", room_.entities);
        const WireMessage welcome = admit(hello, true, room_.sessions.size(), {}, ids_, snapshot);
        auto c = std::make_unique<Client>();
        c->session = welcome.body.at("session").get<std::string>();
        c->replica.apply(welcome);
        c->updates_left = 1 + static_cast<int>(rng_() % max_updates_);
        auto joined = join_session(std::move(room_), c->session, 0);
        room_ = std::move(joined.state);
        oracle_.join(c->session);
        clients_.push_back(std::move(c));
        route(joined.plan);
    }

    json random_transform() {
        std::uniform_real_distribution<double> d(-50, 50);
        std::uniform_real_distribution<double> angle(-720, 720);
        std::uniform_real_distribution<double> s(0.5, 2);
        return {{"px", d(rng_)}, {"py", d(rng_)}, {"pz", d(rng_)}, {"rx", angle(rng_)}, {"ry", angle(rng_)},
                {"rz", angle(rng_)}, {"sx", s(rng_)}, {"sy", s(rng_)}, {"sz", s(rng_)}};
    }

    WireMessage base(Client& c, MessageKind kind, const std::string& entity = {}, std::uint64_t seq = 0) {
        WireMessage m;
        m.kind = kind;
        m.room = room_id_;
        m.sender = c.session;
        m.entity = entity;
        m.seq = seq;
        return m;
    }

    void send(Client& c, WireMessage m, bool local) {
        if (local) c.replica.apply_local(m);
        c.up.push_back(std::move(m));
        ++messages_;
    }

    void client_act(Client* c) {
        if (!c) return;
        std::vector<const EntityRecord*> mine, theirs;
        for (const auto& [id, e] : c->replica.entities()) {
            if (e.owner == c->session) mine.push_back(&e);
            else if (!c->replica.ownership_pending(id)) theirs.push_back(&e);
        }
        const int roll = static_cast<int>(rng_() % 100);
        if (c->updates_left <= 0 && roll < 50) {
            if (!c->bye_sent && rng_() % 3 == 0 && live_count() > 1) {
                send(*c, base(*c, MessageKind::Bye), false);
                c->bye_sent = true;
            }
            return;
        }
        if ((mine.empty() || roll < 8) && c->created < 3) {
            const std::string id = c->session + "-e" + std::to_string(c->created++);
            WireMessage m = base(*c, MessageKind::EntityCreate, id, 1);
            m.body = {{"persistent", rng_() % 3 == 0}, {"components", {{"transform", random_transform()}}}};
            if (rng_() % 2) m.body["components"]["label"] = {{"text", id}};
            send(*c, std::move(m), true);
            return;
        }
        if (roll < 18 && !theirs.empty()) {
            const EntityRecord* e = theirs[rng_() % theirs.size()];
            send(*c, base(*c, MessageKind::OwnershipRequest, e->entity_id), true);
            return;
        }
        if (mine.empty()) {
            --c->updates_left;
            return;
        }
        const EntityRecord* e = mine[rng_() % mine.size()];
        --c->updates_left;
        if (roll < 21) {
            send(*c, base(*c, MessageKind::EntityDelete, e->entity_id, e->seq + 1), true);
            return;
        }
        // Mostly next seq, sometimes a gap, sometimes a stale resend.
        std::uint64_t seq = e->seq + 1;
        const int s = static_cast<int>(rng_() % 10);
        if (s == 0) seq = e->seq;
        else if (s == 1 && e->seq > 1) seq = e->seq - 1;
        else if (s == 2) seq = e->seq + 2 + rng_() % 3;
        WireMessage m = base(*c, MessageKind::EntityUpdate, e->entity_id, seq);
        if (roll < 35) {
            m.body = {{"component", "color"}, {"value", "c" + std::to_string(rng_() % 100)}, {"alpha", 0.5}};
        } else {
            m.body = random_transform();
            if (rng_() % 4 == 0) m.body["tint"] = "red";
        }
        send(*c, std::move(m), true);
    }

    std::size_t live_count() const {
        std::size_t n = 0;
        for (const auto& c : clients_) n += c->bye_sent ? 0 : 1;
        return n;
    }

    void admit_some() {
        Client* c = clients_[rng_() % clients_.size()].get();
        const int n = 1 + static_cast<int>(rng_() % 3);
        for (int i = 0; i < n && !c->up.empty(); ++i) {
            inbox_.push_back({c->session, std::move(c->up.front()), 0});
            c->up.pop_front();
        }
    }

    void tick() {
        for (const auto& in : inbox_) oracle_.apply(in.from, in.msg);
        StepResult r = room_step(std::move(room_), inbox_);
        inbox_.clear();
        room_ = std::move(r.state);
        route(r.plan);
        for (const auto& s : r.departed) {
            for (auto& c : clients_) {
                if (c->session == s) c->gone = true;
            }
        }
        ++ticks_;
    }

    void route(const FanoutPlan& plan) {
        for (const auto& d : plan) {
            for (const auto& to : d.recipients) {
                for (auto& c : clients_) {
                    if (c->session == to) c->down.push_back(d.msg);
                }
            }
        }
    }

    void deliver(Client& c, const WireMessage& m) {
        if (m.kind == MessageKind::EntityUpdate || m.kind == MessageKind::EntityDelete) {
            auto& last = last_seen_[c.session][m.entity];
            if (m.seq <= last) ++order_violations_;
            last = m.seq;
        } else if (m.kind == MessageKind::OwnershipGrant || m.kind == MessageKind::EntityCreate) {
            last_seen_[c.session][m.entity] = m.kind == MessageKind::EntityCreate
                                                  ? m.seq
                                                  : m.body.at("entity").at("seq").get<std::uint64_t>();
        }
        c.replica.apply(m);
    }

    void deliver_some() {
        Client* c = clients_[rng_() % clients_.size()].get();
        const int n = 1 + static_cast<int>(rng_() % 4);
        for (int i = 0; i < n && !c->down.empty(); ++i) {
            deliver(*c, c->down.front());
            c->down.pop_front();
        }
    }

    void quiesce() {
        for (int round = 0; round < 4; ++round) {
            for (auto& c : clients_) {
                while (!c->up.empty()) {
                    inbox_.push_back({c->session, std::move(c->up.front()), 0});
                    c->up.pop_front();
                }
            }
            tick();
            for (auto& c : clients_) {
                while (!c->down.empty()) {
                    deliver(*c, c->down.front());
                    c->down.pop_front();
                }
            }
        }
    }

    std::mt19937_64 rng_;
    int target_sessions_;
    int max_updates_;
    std::string room_id_ = "sim";
    RoomState room_;
    oracle::ReplayOracle oracle_;
    SessionIdAllocator ids_{"sim"};
    std::vector<std::unique_ptr<Client>> clients_;
    std::vector<Inbound> inbox_;
    std::map<SessionId, std::map<std::string, std::uint64_t>> last_seen_;
    std::size_t messages_ = 0;
    std::size_t ticks_ = 0;
    std::size_t order_violations_ = 0;
};

}  // namespace sim
