#pragma once

// Event-driven simulation of the long-jump exclusion process on a ring.

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"
#include "random.hpp"

namespace lrex {

struct LatticeState {
  Site ring_size = 0;
  std::int64_t n = 1;
  double rho = 0.5;
  std::vector<std::uint8_t> occupancy;
  std::vector<Site> particles;  // positions; order is irrelevant
  double micro_time = 0.0;
  std::uint64_t attempts = 0;
  std::uint64_t moves = 0;

  std::size_t particle_count() const { return particles.size(); }
  bool occupied(Site x) const { return occupancy[static_cast<std::size_t>(wrap(x))] != 0; }
  /// eta(x) - rho.
  double centered(Site x) const { return static_cast<double>(occupancy[static_cast<std::size_t>(wrap(x))]) - rho; }
  Site wrap(Site x) const {
    x %= ring_size;
    return x < 0 ? x + ring_size : x;
  }
};

/// Bernoulli(rho) product configuration on N sites.
inline LatticeState init_state(Site ring_size, double rho, Rng& rng, std::int64_t n = 1) {
  detail::require(ring_size >= 4, "init_state: N must be at least 4");
  detail::require(rho > 0.0 && rho < 1.0, "init_state: rho must lie in (0, 1)");
  LatticeState s;
  s.ring_size = ring_size;
  s.n = n;
  s.rho = rho;
  s.occupancy.assign(static_cast<std::size_t>(ring_size), 0);
  for (Site x = 0; x < ring_size; ++x) {
    if (rng.uniform() < rho) {
      s.occupancy[static_cast<std::size_t>(x)] = 1;
      s.particles.push_back(x);
    }
  }
  return s;
}

/// Builds a state from an explicit occupancy pattern.
inline LatticeState make_state(const std::vector<std::uint8_t>& occupancy, double rho, std::int64_t n = 1) {
  detail::require(occupancy.size() >= 4, "make_state: N must be at least 4");
  LatticeState s;
  s.ring_size = static_cast<Site>(occupancy.size());
  s.n = n;
  s.rho = rho;
  s.occupancy = occupancy;
  for (Site x = 0; x < s.ring_size; ++x)
    if (occupancy[static_cast<std::size_t>(x)]) s.particles.push_back(x);
  return s;
}

struct Event {
  double micro_time;
  Site source;
  Site destination;
  bool accepted;
};

/// Optional append-only record of events.
struct EventLog {
  std::vector<Event> events;
  void record(const Event& e) { events.push_back(e); }
};

namespace detail {

struct Proposal {
  double micro_time;
  std::size_t index;
  Site source;
  Site destination;
  bool accepted;
};

inline Proposal propose(const LatticeState& s, const RingKernel& ring, Rng& rng) {
  const auto count = s.particles.size();
  const double dt = rng.exponential() / (static_cast<double>(count) * ring.q_star());
  const auto i = static_cast<std::size_t>(rng.below(count));
  const Site from = s.particles[i];
  Site to = from + ring.sample_displacement(rng);
  if (to >= s.ring_size) to -= s.ring_size;
  return {s.micro_time + dt, i, from, to, s.occupancy[static_cast<std::size_t>(to)] == 0};
}

inline void commit(LatticeState& s, const Proposal& p) {
  s.micro_time = p.micro_time;
  ++s.attempts;
  if (!p.accepted) return;
  s.occupancy[static_cast<std::size_t>(p.destination)] = 1;
  s.occupancy[static_cast<std::size_t>(p.source)] = 0;
  s.particles[p.index] = p.destination;
  ++s.moves;
}

}  // namespace detail

/// One attempted jump: clock advance, uniform particle, displacement from the
/// periodized kernel, move iff the target is empty.
inline Event step(LatticeState& s, const RingKernel& ring, Rng& rng) {
  const auto count = s.particles.size();
  detail::require(count > 0 && count < static_cast<std::size_t>(s.ring_size), "step: need a particle and a hole");
  detail::require(ring.ring_size() == s.ring_size, "step: kernel folded onto a different ring");
  const auto p = detail::propose(s, ring, rng);
  detail::commit(s, p);
  return {p.micro_time, p.source, p.destination, p.accepted};
}

/// Receives the trajectory. Mesh observers are called at every multiple of
/// their time step (macroscopic units) with the state valid at that instant;
/// move observers additionally see every accepted jump.
class Observer {
 public:
  virtual ~Observer() = default;
  virtual std::string id() const = 0;
  /// Mesh spacing in macroscopic time.
  virtual double dt() const = 0;
  virtual bool wants_moves() const { return false; }
  virtual void begin(const LatticeState&) {}
  /// Called after an accepted move from -> to at macroscopic time t.
  virtual void on_move(const LatticeState&, Site, Site, double) {}
  virtual void on_mesh(const LatticeState& state, double t) = 0;
};

struct Series {
  std::string observer_id;
  std::vector<double> times;
  std::vector<double> values;
};

/// Time-stamped observations of one run.
struct FieldTrajectory {
  std::vector<Series> series;

  const Series& get(const std::string& id) const {
    for (const auto& s : series)
      if (s.observer_id == id) return s;
    throw InvalidArgument("trajectory has no observer '" + id + "'");
  }
};

/// Observer that stores the values of a scalar functional on its mesh.
class MeshObserver : public Observer {
 public:
  MeshObserver(std::string id, double dt) : id_(std::move(id)), dt_(dt) {
    detail::require(dt > 0.0, "observer: dt must be positive");
  }
  std::string id() const override { return id_; }
  double dt() const override { return dt_; }
  void on_mesh(const LatticeState& state, double t) override {
    series_.times.push_back(t);
    series_.values.push_back(value(state, t));
  }
  virtual double value(const LatticeState& state, double t) = 0;
  Series& series() { return series_; }

 private:
  std::string id_;
  double dt_;
  Series series_;
};

namespace detail {
inline std::int64_t mesh_count(double t_end, double dt) {
  // tolerate representation error in t_end / dt
  return static_cast<std::int64_t>(std::floor(t_end / dt * (1.0 + 1e-12) + 1e-9));
}
}  // namespace detail

/// Advances `state` by t_end macroscopic time units (t_end n^a micro time).
/// Observers see mesh times measured from the current state time.
inline void run(LatticeState& state, const RingKernel& ring, double alpha, double t_end,
                const std::vector<Observer*>& observers, Rng& rng, EventLog* log = nullptr) {
  detail::require(t_end >= 0.0, "run: t_end must be nonnegative");
  detail::require(ring.ring_size() == state.ring_size, "run: kernel folded onto a different ring");
  const double scale = std::pow(static_cast<double>(state.n), alpha);
  const double start = state.micro_time;
  const double t0 = start / scale;
  const double end_micro = start + t_end * scale;

  struct Mesh {
    Observer* obs;
    std::int64_t next;
    std::int64_t last;
  };
  std::vector<Mesh> meshes;
  std::vector<Observer*> movers;
  for (auto* o : observers) {
    o->begin(state);
    if (o->wants_moves()) movers.push_back(o);
    meshes.push_back({o, 0, detail::mesh_count(t_end, o->dt())});
  }
  auto mesh_micro = [&](const Mesh& m) { return start + static_cast<double>(m.next) * m.obs->dt() * scale; };
  // earliest pending mesh time, or +inf
  auto next_due = [&] {
    double due = std::numeric_limits<double>::infinity();
    for (const auto& m : meshes)
      if (m.next <= m.last) due = std::min(due, mesh_micro(m));
    return due;
  };
  // emits every mesh point at or before `micro` against the current state
  auto flush = [&](double micro, bool inclusive) {
    for (auto& m : meshes)
      while (m.next <= m.last && (inclusive ? mesh_micro(m) <= micro : mesh_micro(m) < micro)) {
        m.obs->on_mesh(state, t0 + static_cast<double>(m.next) * m.obs->dt());
        ++m.next;
      }
  };

  double due = next_due();
  const auto count = state.particles.size();
  if (count > 0 && count < static_cast<std::size_t>(state.ring_size)) {
    for (;;) {
      const auto p = detail::propose(state, ring, rng);
      // memoryless clock: an attempt past the horizon is simply discarded
      if (p.micro_time > end_micro) break;
      if (p.accepted && p.micro_time >= due) {
        flush(p.micro_time, false);
        due = next_due();
      }
      detail::commit(state, p);
      if (log) log->record({p.micro_time, p.source, p.destination, p.accepted});
      if (p.accepted)
        for (auto* o : movers) o->on_move(state, p.source, p.destination, p.micro_time / scale);
    }
  }
  state.micro_time = end_micro;
  flush(std::numeric_limits<double>::infinity(), true);
}

}  // namespace lrex
