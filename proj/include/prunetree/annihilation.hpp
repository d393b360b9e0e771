#pragma once

#include <string>
#include <utility>
#include <vector>

#include "prunetree/harris.hpp"
#include "prunetree/pruning.hpp"
#include "prunetree/tree.hpp"

namespace prunetree {

// Initial potential for unit-density particles with velocities +-1: a
// continuous, piecewise-linear negative excursion on [a, b] with slopes +-1,
// starting downwards. Stored through its extrema values, endpoints included.
struct Potential {
  double a = 0.0;
  std::vector<double> extrema;  // 0, m_1, M_1, ..., m_n, 0

  double b() const;
  double t_max() const { return 0.5 * (b() - a); }
  std::vector<double> positions() const;
  double value_at(double x) const;
  std::size_t num_minima() const { return extrema.size() / 2; }
};

void validate_potential(const Potential& p);
// Rejects equal local-minimum values and equal basin lengths.
void check_genericity(const Potential& p);

// -H_T shifted to start at `a`.
Potential potential_from_tree(const PlaneTree& t, double a = 0.0);
Excursion negated(const Potential& p);

// Shock tree built by unfolding basins from the shortest one up.
struct ShockVertex {
  std::size_t extremum = 0;  // index into Potential::extrema
  bool is_minimum = true;
  double x = 0.0;       // position of the extremum
  double level = 0.0;   // potential value at the extremum
  double v = 0.0;       // time at rest
  double h = 0.0;       // time in motion
  double center = 0.0;  // sink position while at rest
  double basin_left = 0.0, basin_right = 0.0;  // maxima only
  double t_start = 0.0;  // when the sink forms
};

struct ShockTree {
  PlaneTree tree;                    // edge lengths v + h
  std::vector<ShockVertex> vertex;   // indexed by node id; entry 0 is the root
};

ShockTree shock_tree(const Potential& p);
// Same combinatorics with edge lengths v only.
PlaneTree vertical_tree(const ShockTree& s);
std::string shock_tree_svg(const Potential& p, const ShockTree& s);

// Potential at time t > 0 on the Eulerian domain. Slopes are +-1 on occupied
// intervals and 0 on empty ones (plateaus). Sinks are point masses.
struct Plateau {
  double x0 = 0.0;
  double len = 0.0;
};

struct SinkState {
  double x = 0.0;
  double mass = 0.0;
  bool paired = false;  // one of the two sinks bounding a double-mass plateau
  double mass_left = 0.0, mass_right = 0.0;
};

struct EvolvedPotential {
  double t = 0.0;
  std::vector<std::pair<double, double>> points;  // breakpoints (x, psi)
  std::vector<Plateau> plateaus;
  std::vector<SinkState> sinks;
};

// Merges collinear pieces and drops zero-length ones.
void canonicalize(EvolvedPotential& p, double tol = 1e-12);
// Largest absolute discrepancy between two evolved potentials, or +inf if
// their combinatorics differ.
double potential_distance(const EvolvedPotential& a, const EvolvedPotential& b);

// Harris path of the mass tree with plateaus: 2t at internal vertices, m at
// interior masses on the side given by their orientation, mL + mR - 2t at
// double-mass leaves. The result starts at x_start.
EvolvedPotential mass_tree_to_potential(const MassTree& m, double x_start);
// Inverse of the above. Double masses with no sink annotations are split
// equally.
MassTree potential_to_mass_tree(const EvolvedPotential& p, double tol = 1e-9);

// Potential at time t through length pruning of the level-set tree of -Psi0.
EvolvedPotential evolve(const Potential& p, double t);

// Exact event-driven simulation.
struct TrajectoryPoint {
  double t = 0.0;
  double x = 0.0;
  double mass = 0.0;
};

struct SinkRecord {
  int id = 0;
  int left_child = -1, right_child = -1;  // sinks merged to form this one
  int merged_into = -1;
  double t_created = 0.0;
  double t_end = 0.0;
  std::vector<TrajectoryPoint> path;  // breakpoints of a piecewise-linear path

  TrajectoryPoint at(double t) const;
  // Time of the first switch from rest to motion, or t_end if none.
  double rest_until() const;
};

// A sink at rest at position x absorbing particles of velocity u during [t0, t1].
struct Absorption {
  int sink = -1;
  double t0 = 0.0, t1 = 0.0;
  double x = 0.0;
  int u = 0;
};

struct Simulation {
  double t_end = 0.0;
  std::vector<SinkRecord> sinks;  // initial sinks first, in x order
  std::vector<Absorption> absorptions;
  EvolvedPotential snapshot;

  // Sink that absorbed the particle starting at x, with the absorption time.
  // Returns {-1, inf} if it survives past t_end.
  std::pair<int, double> fate(double x) const;
};

Simulation simulate_sinks(const Potential& p, double t_end);

// CSV "sink_id,t,x,mass".
std::string trajectories_csv(const Simulation& s);

// Collision time of particles starting at x and y: half the length of the
// smallest basin containing both.
double collision_time(const Potential& p, double x, double y);
// 2 sup_[x,y] Psi0 - Psi0(x) - Psi0(y).
double tree_distance(const Potential& p, double x, double y);

}  // namespace prunetree
