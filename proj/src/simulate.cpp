#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <sstream>

#include "prunetree/annihilation.hpp"

namespace prunetree {

TrajectoryPoint SinkRecord::at(double t) const {
  if (path.empty()) return {t, 0.0, 0.0};
  if (t <= path.front().t) return path.front();
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (t <= path[i].t) {
      const TrajectoryPoint &p = path[i - 1], &q = path[i];
      double s = q.t > p.t ? (t - p.t) / (q.t - p.t) : 1.0;
      return {t, p.x + s * (q.x - p.x), p.mass + s * (q.mass - p.mass)};
    }
  }
  TrajectoryPoint last = path.back();
  last.t = t;
  return last;
}

double SinkRecord::rest_until() const {
  for (std::size_t i = 1; i < path.size(); ++i)
    if (path[i].x != path[i - 1].x) return path[i - 1].t;
  return t_end;
}

std::pair<int, double> Simulation::fate(double x) const {
  for (const Absorption& a : absorptions) {
    // Lagrangian range of the particles this record swallowed.
    double lo = a.u > 0 ? a.x - a.t1 : a.x + a.t0;
    double hi = a.u > 0 ? a.x - a.t0 : a.x + a.t1;
    if (x >= lo && x <= hi) return {a.sink, a.u > 0 ? a.x - x : x - a.x};
  }
  return {-1, std::numeric_limits<double>::infinity()};
}

namespace {

// Extended precision keeps event times and positions from drifting on
// potentials with many thousands of extrema.
using Real = long double;

double d(Real x) { return static_cast<double>(x); }

struct Elem {
  bool sink = false;
  bool alive = true;
  int prev = -1, next = -1;
  unsigned version = 0;
  // block: particles with velocity u; the trailing end never meets a sink
  int u = 0;
  Real p_trail = 0.0, p_head = 0.0;
  Real psi_trail = 0.0;  // initial potential at the trailing particle
  bool head_contact = false;
  // sink: X(t) = x0 + w (t - t0), m(t) = m0 + rate (t - t0)
  int rec = -1;
  Real x0 = 0.0, t0 = 0.0, w = 0.0, m0 = 0.0, rate = 0.0;
  int open_left = -1, open_right = -1;  // absorption records in progress
};

enum class Kind { Exhaust, Close };

struct Event {
  Real t;
  long seq;
  Kind kind;
  int elem;
  unsigned version;
  bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
};

class Simulator {
 public:
  Simulator(const Potential& p, Real t_end) : t_end_(t_end) {
    const auto& e = p.extrema;
    std::vector<Real> xs(e.size(), p.a);
    for (std::size_t k = 1; k < e.size(); ++k)
      xs[k] = xs[k - 1] + std::abs(static_cast<Real>(e[k]) - static_cast<Real>(e[k - 1]));
    scale_ = std::max<Real>(1.0, xs.back() - xs.front());
    // Blocks between consecutive extrema; sinks at the minima.
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
      bool rising = e[k + 1] > e[k];
      if (k % 2 == 1) push_sink(xs[k], 0.0);
      Elem b;
      b.u = rising ? -1 : 1;
      b.p_trail = rising ? xs[k + 1] : xs[k];
      b.p_head = rising ? xs[k] : xs[k + 1];
      b.psi_trail = rising ? e[k + 1] : e[k];
      b.head_contact = true;
      push(b);
    }
    for (std::size_t i = 0; i < elems_.size(); ++i)
      if (elems_[i].sink) update_sink(static_cast<int>(i), 0.0, true);
    for (std::size_t i = 0; i < elems_.size(); ++i) schedule(static_cast<int>(i), 0.0);
  }

  Simulation run() {
    const Real horizon = t_end_ + 1e-12 * scale_;
    while (!queue_.empty()) {
      Event ev = queue_.top();
      if (ev.t > horizon) break;
      queue_.pop();
      const Elem& el = elems_[ev.elem];
      if (!el.alive || el.version != ev.version) continue;
      Real t = std::max(ev.t, now_);
      now_ = t;
      if (ev.kind == Kind::Exhaust) exhaust(ev.elem, t);
      else close(ev.elem, t);
    }
    return finish();
  }

 private:
  Real t_end_;
  Real scale_ = 1.0;
  Real now_ = 0.0;
  long seq_ = 0;
  int head_ = -1;
  std::vector<Elem> elems_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  Simulation out_;

  int push(const Elem& e) {
    int id = static_cast<int>(elems_.size());
    elems_.push_back(e);
    if (id > 0) {
      elems_[id].prev = id - 1;
      elems_[id - 1].next = id;
    } else {
      head_ = 0;
    }
    return id;
  }

  int new_record(Real t, Real x, Real m) {
    SinkRecord r;
    r.id = static_cast<int>(out_.sinks.size());
    r.t_created = t;
    r.path.push_back({d(t), d(x), d(m)});
    out_.sinks.push_back(r);
    return r.id;
  }

  void push_sink(Real x, Real t) {
    Elem s;
    s.sink = true;
    s.x0 = x;
    s.t0 = t;
    s.rec = new_record(t, x, 0.0);
    push(s);
  }

  Real sink_x(const Elem& s, Real t) const { return s.x0 + s.w * (t - s.t0); }
  Real sink_m(const Elem& s, Real t) const { return s.m0 + s.rate * (t - s.t0); }

  int head_side(const Elem& b) const { return b.u > 0 ? b.next : b.prev; }

  Real head_pos(const Elem& b, Real t) const {
    if (b.head_contact) return sink_x(elems_[head_side(b)], t);
    return b.p_head + b.u * t;
  }
  Real head_vel(const Elem& b) const { return b.head_contact ? elems_[head_side(b)].w : b.u; }

  Real left_pos(const Elem& e, Real t) const {
    if (e.sink) return sink_x(e, t);
    return e.u > 0 ? e.p_trail + t : head_pos(e, t);
  }
  Real right_pos(const Elem& e, Real t) const {
    if (e.sink) return sink_x(e, t);
    return e.u > 0 ? head_pos(e, t) : e.p_trail - t;
  }
  Real left_vel(const Elem& e) const {
    if (e.sink) return e.w;
    return e.u > 0 ? 1.0 : head_vel(e);
  }
  Real right_vel(const Elem& e) const {
    if (e.sink) return e.w;
    return e.u > 0 ? head_vel(e) : -1.0;
  }

  bool feeds(int b, int s) const {
    if (b < 0) return false;
    const Elem& e = elems_[b];
    return !e.sink && e.head_contact && head_side(e) == s;
  }

  void open_absorption(Elem& s, int u, Real t) {
    int& slot = u > 0 ? s.open_left : s.open_right;
    if (slot >= 0) return;
    slot = static_cast<int>(out_.absorptions.size());
    out_.absorptions.push_back({s.rec, d(t), d(t), d(sink_x(s, t)), u});
  }
  void close_absorption(Elem& s, Real t) {
    for (int* slot : {&s.open_left, &s.open_right}) {
      if (*slot < 0) continue;
      out_.absorptions[*slot].t1 = d(t);
      *slot = -1;
    }
  }

  // Sets velocity and accumulation rate from the current contacts.
  void update_sink(int id, Real t, bool initial = false) {
    Elem& s = elems_[id];
    bool l = feeds(s.prev, id), r = feeds(s.next, id);
    Real w = l == r ? 0.0 : (l ? 1.0 : -1.0);
    Real rate = l && r ? 2.0 : 0.0;
    if (!initial && w == s.w && rate == s.rate) return;
    // A switch within rounding of the end time is an artefact of the order
    // in which simultaneous final events were processed.
    if (!initial && t >= t_end_ - 1e-12 * scale_) return;
    Real x = sink_x(s, t), m = sink_m(s, t);
    s.x0 = x;
    s.m0 = m;
    s.t0 = t;
    s.w = w;
    s.rate = rate;
    auto& path = out_.sinks[s.rec].path;
    if (path.back().t < t) path.push_back({d(t), d(x), d(m)});
    if (rate > 0.0) {
      open_absorption(s, 1, t);
      open_absorption(s, -1, t);
    } else {
      close_absorption(s, t);
    }
  }

  void end_sink(Elem& s, Real t) {
    close_absorption(s, t);
    auto& r = out_.sinks[s.rec];
    Real x = sink_x(s, t), m = sink_m(s, t);
    if (r.path.back().t < t) r.path.push_back({d(t), d(x), d(m)});
    else r.path.back() = {r.path.back().t, d(x), d(m)};
    r.t_end = d(t);
  }

  void unlink(int id) {
    Elem& e = elems_[id];
    e.alive = false;
    if (e.prev >= 0) elems_[e.prev].next = e.next;
    else head_ = e.next;
    if (e.next >= 0) elems_[e.next].prev = e.prev;
  }

  void schedule(int id, Real t) {
    Elem& e = elems_[id];
    if (!e.alive) return;
    ++e.version;
    if (!e.sink && e.head_contact) {
      const Elem& s = elems_[head_side(e)];
      Real rate = 1.0 - e.u * s.w;
      if (rate > 0.0) {
        Real len = e.u * (head_pos(e, t) - (e.p_trail + e.u * t));
        queue_.push({t + std::max<Real>(0.0, len) / rate, seq_++, Kind::Exhaust, id, e.version});
      }
    }
    if (e.next >= 0) {
      const Elem& n = elems_[e.next];
      bool touching = (e.sink || (e.u > 0 && !e.head_contact)) && (n.sink || (n.u < 0 && !n.head_contact));
      if (touching) {
        Real gap = left_pos(n, t) - right_pos(e, t);
        Real speed = right_vel(e) - left_vel(n);
        if (gap <= 1e-15 * scale_) queue_.push({t, seq_++, Kind::Close, id, e.version});
        else if (speed > 0.0) queue_.push({t + gap / speed, seq_++, Kind::Close, id, e.version});
      }
    }
  }

  void reschedule_around(int id, Real t) {
    int lo = id;
    for (int k = 0; k < 2 && elems_[lo].prev >= 0; ++k) lo = elems_[lo].prev;
    int cur = lo;
    for (int k = 0; k < 5 && cur >= 0; ++k) {
      schedule(cur, t);
      cur = elems_[cur].next;
    }
  }

  void exhaust(int b, Real t) {
    int s = head_side(elems_[b]);
    int other = elems_[b].u > 0 ? elems_[b].prev : elems_[b].next;
    // Freeze the sink at its old velocity before the contact disappears.
    Elem& sk = elems_[s];
    Real x = sink_x(sk, t), m = sink_m(sk, t);
    sk.x0 = x;
    sk.m0 = m;
    sk.t0 = t;
    unlink(b);
    update_sink(s, t);
    reschedule_around(s, t);
    if (other >= 0) reschedule_around(other, t);
  }

  void close(int id, Real t) {
    int nid = elems_[id].next;
    Elem& e = elems_[id];
    Elem& n = elems_[nid];
    if (e.sink && n.sink) {
      Real x = 0.5 * (sink_x(e, t) + sink_x(n, t));
      Real m = sink_m(e, t) + sink_m(n, t);
      end_sink(e, t);
      end_sink(n, t);
      int rec = new_record(t, x, m);
      out_.sinks[elems_[id].rec].merged_into = rec;
      out_.sinks[elems_[nid].rec].merged_into = rec;
      out_.sinks[rec].left_child = elems_[id].rec;
      out_.sinks[rec].right_child = elems_[nid].rec;
      Elem& keep = elems_[id];
      keep.rec = rec;
      keep.x0 = x;
      keep.m0 = m;
      keep.t0 = t;
      keep.w = 0.0;
      keep.rate = 0.0;
      keep.open_left = keep.open_right = -1;
      unlink(nid);
      update_sink(id, t, true);
      reschedule_around(id, t);
      return;
    }
    if (!e.sink && !n.sink) {
      // Two free heads meet: a fresh sink forms between them.
      Real x = 0.5 * (right_pos(e, t) + left_pos(n, t));
      Elem s;
      s.sink = true;
      s.x0 = x;
      s.t0 = t;
      s.rec = new_record(t, x, 0.0);
      int sid = static_cast<int>(elems_.size());
      elems_.push_back(s);
      elems_[sid].prev = id;
      elems_[sid].next = nid;
      elems_[id].next = sid;
      elems_[nid].prev = sid;
      elems_[id].head_contact = true;
      elems_[nid].head_contact = true;
      update_sink(sid, t, true);
      reschedule_around(sid, t);
      return;
    }
    int blk = e.sink ? nid : id;
    int sk = e.sink ? id : nid;
    Elem& s = elems_[sk];
    Real x = sink_x(s, t), m = sink_m(s, t);
    s.x0 = x;
    s.m0 = m;
    s.t0 = t;
    elems_[blk].head_contact = true;
    update_sink(sk, t);
    reschedule_around(sk, t);
  }

  Simulation finish() {
    const Real t = t_end_;
    out_.t_end = t_end_;
    for (std::size_t i = 0; i < elems_.size(); ++i)
      if (elems_[i].alive && elems_[i].sink) end_sink(elems_[i], t);
    EvolvedPotential& snap = out_.snapshot;
    snap.t = t_end_;
    const Real tol = 1e-12 * scale_;
    // A surviving particle keeps its initial potential value, so each block
    // end is read off directly instead of being summed along the line.
    Real x = 0.0, psi = 0.0;
    bool started = false;
    for (int id = head_; id >= 0; id = elems_[id].next) {
      const Elem& e = elems_[id];
      Real l = left_pos(e, t), r = right_pos(e, t);
      if (!e.sink && r - l <= tol) continue;
      if (!started) {
        x = l;
        psi = e.sink || e.u > 0 ? e.psi_trail : e.psi_trail - (r - l);
        if (e.sink) psi = 0.0;
        snap.points.emplace_back(d(x), d(psi));
        started = true;
      }
      if (l - x > tol) {
        snap.plateaus.push_back({d(x), d(l - x)});
        x = l;
        snap.points.emplace_back(d(x), d(psi));
      }
      if (e.sink) {
        snap.sinks.push_back({d(sink_x(e, t)), d(sink_m(e, t))});
      } else {
        psi = e.u > 0 ? e.psi_trail - (r - l) : e.psi_trail;
        x = r;
        snap.points.emplace_back(d(x), d(psi));
      }
    }
    if (snap.points.size() > 1) snap.points.back().second = 0.0;
    canonicalize(snap);
    return std::move(out_);
  }
};

}  // namespace

Simulation simulate_sinks(const Potential& p, double t_end) {
  check_genericity(p);
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("time must be non-negative");
  return Simulator(p, t_end).run();
}

std::string trajectories_csv(const Simulation& s) {
  std::ostringstream os;
  os << "sink_id,t,x,mass\n";
  char buf[128];
  for (const SinkRecord& r : s.sinks)
    for (const TrajectoryPoint& q : r.path) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.id, q.t, q.x, q.mass);
      os << buf;
    }
  return os.str();
}

}  // namespace prunetree
