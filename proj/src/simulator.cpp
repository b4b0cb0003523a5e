#include "linereconf/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "json_util.hpp"
#include "linereconf/error.hpp"

namespace linereconf {

std::string_view to_string(EventKind kind) {
    switch (kind) {
    case EventKind::PartEnter: return "PartEnter";
    case EventKind::OpStart: return "OpStart";
    case EventKind::OpFinish: return "OpFinish";
    case EventKind::PartDepart: return "PartDepart";
    case EventKind::BufferFull: return "BufferFull";
    case EventKind::BufferFree: return "BufferFree";
    }
    return "?";
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Each stream depends only on the master seed and its own key, so adding or
// removing a station leaves every other stream's draws unchanged.
std::mt19937_64 stream(std::uint64_t seed, std::string_view key) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(fnv1a(key))));
}

double percentile(std::vector<double> xs, double q) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

MetricSummary summarize(const std::vector<double>& xs) {
    MetricSummary s;
    if (xs.empty()) return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (const double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

// The line is run as a chain of cells. Consecutive unshared operations of a
// station form one cell holding one part. A shared operation is a cell of its
// own with one lane per executing agent, so the agents can work on different
// parts at once. A part's lane is drawn before it enters and it waits upstream
// until that lane is free.
class Runner {
public:
    explicit Runner(const SimModel& m) : m_(m) {
        const auto& c = m.config;
        for (const auto& [key, model] : m.times) {
            if (!agent_index_.count(key.first)) {
                agent_index_[key.first] = agents_.size();
                agents_.push_back({key.first, false, {}});
            }
        }
        ops_.resize(c.size());
        for (std::size_t j = 0; j < c.size(); ++j) {
            auto& op = ops_[j];
            const auto station = *m.view.station_of_op(j);
            const std::string& primary = m.view.stations[station].agent;
            // The station's own agent first, then recipients in share order.
            std::vector<Share> shares = c.shares(j);
            std::stable_partition(shares.begin(), shares.end(),
                                  [&](const Share& s) { return s.agent == primary; });
            double cum = 0.0;
            for (const auto& s : shares) {
                const auto a = agent_index_.at(s.agent);
                cum += s.fraction;
                op.executors.push_back({a, cum, &m.times.at({s.agent, c.operations()[j]}),
                                        stream(m.seed, s.agent + '\x1f' + c.operations()[j]),
                                        multiplier_rules(s.agent, c.operations()[j])});
            }
            if (op.executors.size() > 1) op.route = stream(m.seed, "route\x1f" + c.operations()[j]);
        }
        for (std::size_t st = 0; st < m.view.stations.size(); ++st) {
            const auto& info = m.view.stations[st];
            const std::size_t first_cell = cells_.size();
            for (std::size_t j = info.first_op; j <= info.last_op; ++j) {
                const bool shared = ops_[j].executors.size() > 1;
                const bool extend = cells_.size() > first_cell && !shared &&
                                    ops_[cells_.back().last_op].executors.size() == 1;
                if (extend) {
                    cells_.back().last_op = j;
                } else {
                    CellState cell;
                    cell.station = st;
                    cell.first_op = cell.last_op = j;
                    cell.lanes.resize(ops_[j].executors.size());
                    cells_.push_back(cell);
                }
            }
            cells_[first_cell].enters_station = true;
            cells_.back().leaves_station = true;
        }
        for (std::size_t i = 0; i + 1 < cells_.size(); ++i) {
            const auto& cell = cells_[i];
            const int capacity = cell.leaves_station ? m.view.buffer_capacities.at(cell.station)
                                                     : c.default_buffer_capacity();
            buffers_.push_back({capacity, cell.leaves_station, cell.station, {}, 0.0, 0.0, 0});
        }
        station_stats_.resize(m.view.stations.size());
        for (std::size_t st = m.view.stations.size(); st-- > 0;)
            home_[agent_index_.at(m.view.stations[st].agent)] = st;
        op_time_sum_.assign(c.size(), 0.0);
        op_count_.assign(c.size(), 0);
        exec_count_.resize(c.size());
        for (auto& e : exec_count_) e.assign(agents_.size(), 0);
    }

    SimReport operator()() {
        now_ = 0.0;
        pull(0);
        while (!heap_.empty() && heap_.top().time <= m_.horizon) {
            const auto e = heap_.top();
            heap_.pop();
            now_ = e.time;
            finish(e.cell, e.lane);
        }
        now_ = m_.horizon;
        for (auto& b : buffers_) touch(b);
        return report();
    }

private:
    struct MultiplierRule {
        double onset;
        double factor;
    };
    struct Executor {
        std::size_t agent;
        double cum;
        const TimeModel* model;
        std::mt19937_64 rng;
        std::vector<MultiplierRule> rules;
    };
    struct OpState {
        std::vector<Executor> executors;
        std::mt19937_64 route;
    };
    enum class State { Idle, Working, Blocked };
    struct Lane {
        State state = State::Idle;
        long part = -1;
        std::size_t op = 0;
    };
    struct CellState {
        std::size_t station = 0;
        std::size_t first_op = 0;
        std::size_t last_op = 0;
        bool enters_station = false;
        bool leaves_station = false;
        std::vector<Lane> lanes;
        std::optional<std::size_t> next_lane;  // drawn for the part waiting to enter
        std::deque<std::size_t> blocked;       // lanes waiting for downstream space
    };
    using Slot = std::pair<std::size_t, std::size_t>;  // cell, lane
    struct BufferState {
        int capacity;
        bool between_stations;
        std::size_t slot;  // upstream station
        std::deque<long> parts;
        double area = 0.0;
        double last = 0.0;
        int max = 0;
    };
    struct AgentState {
        std::string name;
        bool busy = false;
        std::deque<Slot> waiting;  // in request order
    };
    struct PartState {
        double entered = 0.0;
        std::vector<double> station_time;  // work charged to each station
    };
    struct Pending {
        double time;
        std::uint64_t seq;
        std::size_t cell;
        std::size_t lane;
        bool operator>(const Pending& o) const { return time != o.time ? time > o.time : seq > o.seq; }
    };
    struct Acc {
        std::size_t n = 0;
        double sum = 0.0;
        double max = 0.0;
    };

    std::vector<MultiplierRule> multiplier_rules(const std::string& agent, const std::string& op) const {
        std::vector<MultiplierRule> out;
        for (const auto& s : m_.scenarios) {
            if (s.agent != agent) continue;
            if (!s.affected_ops.empty() &&
                std::find(s.affected_ops.begin(), s.affected_ops.end(), op) == s.affected_ops.end())
                continue;
            out.push_back({s.onset, s.time_multiplier});
        }
        return out;
    }

    void log(EventKind kind, std::size_t station, long part, const std::string& agent) {
        if (m_.record_trace) trace_.push_back({now_, kind, station, part, agent});
    }

    // Work is charged to the executing agent's first station, so a station's
    // time is its agent's load per part and a shared operation counts toward
    // the recipient. An agent without a station of its own charges the
    // station the operation belongs to.
    std::size_t charged_station(std::size_t op_station, std::size_t agent) const {
        const auto it = home_.find(agent);
        return it == home_.end() ? op_station : it->second;
    }

    const std::string& station_agent(std::size_t cell) const {
        return m_.view.stations[cells_[cell].station].agent;
    }

    void touch(BufferState& b) {
        b.area += static_cast<double>(b.parts.size()) * (now_ - b.last);
        b.last = now_;
    }

    // Lane of the executor for the next part, drawn once per part.
    std::size_t draw_lane(CellState& cell) {
        if (!cell.next_lane) {
            auto& op = ops_[cell.first_op];
            std::size_t l = 0;
            if (cell.lanes.size() > 1) {
                const double u = std::uniform_real_distribution<double>(0.0, 1.0)(op.route);
                while (l + 1 < op.executors.size() && u >= op.executors[l].cum) ++l;
            }
            cell.next_lane = l;
        }
        return *cell.next_lane;
    }

    std::size_t executor_of(const CellState& cell, std::size_t lane) const {
        return cell.lanes.size() > 1 ? lane : 0;
    }

    void pull(std::size_t i) {
        auto& cell = cells_[i];
        while (true) {
            if (i > 0 && buffers_[i - 1].parts.empty()) return;
            const std::size_t l = draw_lane(cell);
            if (cell.lanes[l].state != State::Idle) return;
            cell.next_lane.reset();
            long part;
            if (i == 0) {
                part = static_cast<long>(parts_.size());
                parts_.push_back({now_, std::vector<double>(m_.view.stations.size(), 0.0)});
            } else {
                auto& b = buffers_[i - 1];
                touch(b);
                const bool was_full = static_cast<int>(b.parts.size()) == b.capacity;
                part = b.parts.front();
                b.parts.pop_front();
                if (was_full && b.between_stations) log(EventKind::BufferFree, b.slot, part, "");
                auto& up = cells_[i - 1];
                if (!up.blocked.empty()) {
                    const auto ul = up.blocked.front();
                    up.blocked.pop_front();
                    push(i - 1, up.lanes[ul].part);
                    up.lanes[ul] = Lane{};
                    pull(i - 1);
                }
            }
            auto& lane = cells_[i].lanes[l];
            lane.state = State::Working;
            lane.part = part;
            lane.op = cells_[i].first_op;
            if (cells_[i].enters_station) {
                log(EventKind::PartEnter, cells_[i].station, part, station_agent(i));
            }
            begin_op(i, l);
        }
    }

    void push(std::size_t i, long part) {
        auto& b = buffers_[i];
        const auto& cell = cells_[i];
        touch(b);
        b.parts.push_back(part);
        b.max = std::max(b.max, static_cast<int>(b.parts.size()));
        if (cell.leaves_station) log(EventKind::PartDepart, cell.station, part, station_agent(i));
        if (b.between_stations && static_cast<int>(b.parts.size()) == b.capacity)
            log(EventKind::BufferFull, b.slot, part, "");
    }

    void begin_op(std::size_t i, std::size_t l) {
        const auto& cell = cells_[i];
        auto& agent = agents_[ops_[cell.lanes[l].op].executors[executor_of(cell, l)].agent];
        if (agent.busy) {
            agent.waiting.push_back({i, l});
        } else {
            start(i, l);
        }
    }

    void start(std::size_t i, std::size_t l) {
        const auto& cell = cells_[i];
        const auto& lane = cell.lanes[l];
        auto& ex = ops_[lane.op].executors[executor_of(cell, l)];
        agents_[ex.agent].busy = true;
        double d = ex.model->sample(ex.rng);
        for (const auto& r : ex.rules)
            if (now_ >= r.onset) d *= r.factor;
        parts_[lane.part].station_time[charged_station(cell.station, ex.agent)] += d;
        op_time_sum_[lane.op] += d;
        ++op_count_[lane.op];
        ++exec_count_[lane.op][ex.agent];
        log(EventKind::OpStart, cell.station, lane.part, agents_[ex.agent].name);
        heap_.push({now_ + d, seq_++, i, l});
    }

    void finish(std::size_t i, std::size_t l) {
        auto& cell = cells_[i];
        auto& lane = cell.lanes[l];
        auto& agent = agents_[ops_[lane.op].executors[executor_of(cell, l)].agent];
        log(EventKind::OpFinish, cell.station, lane.part, agent.name);
        // Requests already waiting for this agent are served before the
        // finishing cell asks again.
        agent.busy = false;
        if (!agent.waiting.empty()) {
            const auto [wi, wl] = agent.waiting.front();
            agent.waiting.pop_front();
            start(wi, wl);
        }
        if (lane.op < cell.last_op) {
            ++lane.op;
            begin_op(i, l);
        } else {
            complete(i, l);
        }
    }

    void complete(std::size_t i, std::size_t l) {
        auto& cell = cells_[i];
        const long part = cell.lanes[l].part;
        if (i + 1 == cells_.size()) {
            for (std::size_t st = 0; st < station_stats_.size(); ++st) {
                auto& acc = station_stats_[st];
                const double t = parts_[part].station_time[st];
                ++acc.n;
                acc.sum += t;
                acc.max = std::max(acc.max, t);
            }
            log(EventKind::PartDepart, cell.station, part, station_agent(i));
            departures_.push_back(now_);
            lead_times_.push_back(now_ - parts_[part].entered);
            cell.lanes[l] = Lane{};
            pull(i);
            return;
        }
        auto& b = buffers_[i];
        if (static_cast<int>(b.parts.size()) >= b.capacity) {
            cell.lanes[l].state = State::Blocked;
            cell.blocked.push_back(l);
            return;
        }
        push(i, part);
        cell.lanes[l] = Lane{};
        pull(i + 1);
        pull(i);
    }

    SimReport report() const {
        SimReport r;
        r.seed = m_.seed;
        r.horizon = m_.horizon;
        r.parts_entered = parts_.size();
        r.parts_departed = departures_.size();
        r.work_in_process = r.parts_entered - r.parts_departed;
        r.throughput = departures_.empty() ? 0 : departures_.size() - 1;
        for (std::size_t s = 0; s < m_.view.stations.size(); ++s) {
            const auto& acc = station_stats_[s];
            const auto& info = m_.view.stations[s];
            StationStats out{info.agent, info.first_op, info.last_op, acc.n,
                             acc.n ? acc.sum / static_cast<double>(acc.n) : 0.0, acc.max};
            r.bottleneck = std::max(r.bottleneck, out.mean_time);
            r.stations.push_back(std::move(out));
        }
        for (const auto& b : buffers_)
            if (b.between_stations)
                r.buffers.push_back({b.capacity, m_.horizon > 0.0 ? b.area / m_.horizon : 0.0, b.max});
        const auto& names = m_.config.operations();
        for (std::size_t j = 0; j < names.size(); ++j) {
            if (op_count_[j]) r.op_mean_times[names[j]] = op_time_sum_[j] / static_cast<double>(op_count_[j]);
            for (std::size_t a = 0; a < agents_.size(); ++a)
                if (exec_count_[j][a]) r.op_executions[names[j]][agents_[a].name] = exec_count_[j][a];
        }
        for (std::size_t k = 1; k < departures_.size(); ++k)
            r.cycle_times.push_back(departures_[k] - departures_[k - 1]);
        r.cycle_time_mean = summarize(r.cycle_times).mean;
        r.cycle_time_p95 = percentile(r.cycle_times, 0.95);
        r.lead_time_mean = summarize(lead_times_).mean;
        r.trace = trace_;
        return r;
    }

    const SimModel& m_;
    std::map<std::string, std::size_t> agent_index_;
    std::vector<AgentState> agents_;
    std::vector<OpState> ops_;
    std::vector<CellState> cells_;
    std::vector<BufferState> buffers_;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> heap_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;

    std::vector<PartState> parts_;
    std::vector<double> departures_;
    std::vector<double> lead_times_;
    std::vector<Acc> station_stats_;
    std::map<std::size_t, std::size_t> home_;  // agent -> its first station
    std::vector<double> op_time_sum_;
    std::vector<std::size_t> op_count_;
    std::vector<std::vector<std::size_t>> exec_count_;
    std::vector<Event> trace_;
};

}  // namespace

SimModel build_sim(const LineConfiguration& c, const CapabilityGraph& g,
                   const std::vector<DisturbanceScenario>& scenarios, double horizon, std::uint64_t seed) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw Error(ErrorKind::InvalidArgument, "simulation horizon must be > 0");
    const auto violations = validate(c, g);
    if (!violations.empty()) {
        std::string msg = "configuration is not valid";
        for (const auto& v : violations) msg += "; " + v.message;
        throw Error(ErrorKind::InvalidConfiguration, msg);
    }
    SimModel m;
    m.config = c;
    m.view = derive_stations(c);
    m.horizon = horizon;
    m.seed = seed;
    for (std::size_t j = 0; j < c.size(); ++j) {
        const auto& op = c.operations()[j];
        for (const auto& s : c.shares(j))
            m.times.emplace(std::make_pair(s.agent, op),
                            g.operation_time(EntityId::agent(s.agent), EntityId::operation(op)));
        if (c.shares(j).size() < 2) continue;
        const auto& donor = m.view.stations[*m.view.station_of_op(j)].agent;
        for (const auto& s : c.shares(j))
            if (s.agent != donor) m.routes.push_back({j, donor, s.agent, s.fraction});
    }
    for (const auto& s : scenarios) {
        if (!(s.time_multiplier > 0.0) || !std::isfinite(s.time_multiplier))
            throw Error(ErrorKind::InvalidConfiguration, "disturbance multiplier must be > 0");
        if (!g.contains(EntityId::agent(s.agent)))
            throw Error(ErrorKind::InvalidConfiguration, "disturbance names unknown agent " + s.agent);
        for (const auto& op : s.affected_ops)
            if (!c.op_index(op))
                throw Error(ErrorKind::InvalidConfiguration, "disturbance names unknown operation " + op);
        if (s.onset < 0.0) throw Error(ErrorKind::InvalidConfiguration, "disturbance onset must be >= 0");
    }
    m.scenarios = scenarios;
    return m;
}

SimReport run(const SimModel& m) {
    Runner runner(m);
    auto r = runner();
    assert(r.parts_entered == r.parts_departed + r.work_in_process);
    return r;
}

Replication replicate(const SimModel& m, std::size_t n, std::uint64_t base_seed, unsigned threads) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "replicate needs at least one run");
    Replication out;
    out.runs.resize(n);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            SimModel copy = m;
            copy.seed = base_seed + i;
            out.runs[i] = run(copy);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<double> tp, bn, ct;
    for (const auto& r : out.runs) {
        tp.push_back(static_cast<double>(r.throughput));
        bn.push_back(r.bottleneck);
        ct.push_back(r.cycle_time_mean);
    }
    out.throughput = summarize(tp);
    out.bottleneck = summarize(bn);
    out.cycle_time = summarize(ct);
    return out;
}

Comparison welch_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw Error(ErrorKind::InsufficientSamples, "Welch test needs at least two samples per side");
    const auto sa = summarize(a), sb = summarize(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = sa.sd * sa.sd / na, vb = sb.sd * sb.sd / nb;
    Comparison c;
    c.mean_difference = sa.mean - sb.mean;
    if (va + vb == 0.0) {
        c.dof = na + nb - 2.0;
        if (c.mean_difference == 0.0) {
            c.t = 0.0;
            c.p_value = 1.0;
        } else {
            c.t = std::copysign(std::numeric_limits<double>::infinity(), c.mean_difference);
            c.p_value = 0.0;
        }
        return c;
    }
    c.t = c.mean_difference / std::sqrt(va + vb);
    c.dof = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    const boost::math::students_t dist(c.dof);
    c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(c.t)));
    return c;
}

Comparison compare_reports(const SimReport& a, const SimReport& b) {
    return welch_test(a.cycle_times, b.cycle_times);
}

std::string report_to_json(const SimReport& r) {
    using detail::json;
    json doc;
    doc["seed"] = r.seed;
    doc["horizon_s"] = r.horizon;
    doc["throughput"] = r.throughput;
    doc["parts_entered"] = r.parts_entered;
    doc["parts_departed"] = r.parts_departed;
    doc["work_in_process"] = r.work_in_process;
    doc["bottleneck_s"] = r.bottleneck;
    doc["cycle_time"] = {{"mean", r.cycle_time_mean}, {"p95", r.cycle_time_p95}, {"samples", r.cycle_times}};
    doc["lead_time_mean_s"] = r.lead_time_mean;
    doc["stations"] = json::array();
    for (const auto& s : r.stations)
        doc["stations"].push_back({{"agent", s.agent},
                                   {"first_op", s.first_op},
                                   {"last_op", s.last_op},
                                   {"parts", s.parts},
                                   {"mean_time_s", s.mean_time},
                                   {"max_time_s", s.max_time}});
    doc["buffers"] = json::array();
    for (const auto& b : r.buffers)
        doc["buffers"].push_back(
            {{"capacity", b.capacity}, {"mean_occupancy", b.mean_occupancy}, {"max_occupancy", b.max_occupancy}});
    doc["op_mean_times_s"] = r.op_mean_times;
    doc["op_executions"] = r.op_executions;
    return doc.dump(1) + "\n";
}

std::string trace_to_csv(const std::vector<Event>& trace) {
    std::ostringstream out;
    out.precision(17);
    out << "time,kind,station,part,agent\n";
    for (const auto& e : trace)
        out << e.time << ',' << to_string(e.kind) << ',' << e.station << ',' << e.part << ',' << e.agent << '\n';
    return out.str();
}

}  // namespace linereconf
