#pragma once

#include <string>
#include <vector>

#include "trv/family.hpp"

namespace trv {

// Critical relation of a marked orbit: either the q-th iterate of critical
// point j lands on critical point mu, or it returns onto its own l-th
// iterate (1 <= l < q).
struct critical_relation {
    int j = 0;                        // critical index, 0-based
    bool periodic_to_critical = true; // kind discriminator
    int q = 1;
    int mu = 0;                       // target critical index (periodic_to_critical)
    int l = 0;                        // pre-period (preperiodic)
    bool near_parabolic = false;      // |Dg^{q-l}(c_l) - 1| < 1e-6
};

// Finite forward-invariant marked set: per critical point j the orbit
// segment c_{0,j}..c_{q_j,j} with spatial derivatives D, parameter
// derivatives L, and the deduplicated image set g(P).
struct marked_orbit {
    family_spec spec;
    std::vector<double> w;                       // parameter vector
    std::vector<std::vector<double>> pts;        // pts[j][i] = c_{i,j}, i = 0..q_j
    std::vector<std::vector<double>> D;          // D[j][i] = Dg(c_{i,j}), valid for i >= 1
    std::vector<std::vector<std::vector<double>>> L; // L[j][i][k] = L_k(c_{i,j})
    std::vector<double> gP;                      // deduplicated g(P), ascending
    std::vector<std::vector<int>> set_index;     // label (i,j) -> index into gP; -1 for i=0 if absent
    double orbit_tol = 0;
    double dedup_tol = 0;
    double scale = 1;

    int q_of(int j) const { return static_cast<int>(pts[j].size()) - 1; }
};

// Iterates every critical point until its orbit closes up (returns onto a
// critical point or onto an earlier iterate of itself).  orbit_tol <= 0
// selects the default 1e-10 * scale.
marked_orbit critical_orbit(const family_spec& spec, const std::vector<double>& w,
                            int max_iter, double orbit_tol = 0);

// One relation per critical point, PeriodicToCritical entries first.
std::vector<critical_relation> detect_relations(const marked_orbit& orbit, double orbit_tol = 0);

// Solves f_c^q(x0) = 0-offset (returns c*) inside a sign-changing bracket
// by bisection plus a Newton polish with forward-accumulated parameter
// derivative; rejects roots of lower minimal period.
double solve_superstable(const family_spec& spec, int q, double c_lo, double c_hi);

struct superstable_hit {
    int q = 0;
    double c = 0;
    double residual = 0;
};

struct enumerate_result {
    std::vector<superstable_hit> hits;   // sorted by c
    std::vector<std::string> warnings;   // skipped brackets
};

// All sign-change-isolated superstable parameters of minimal period
// q <= q_max in [c_lo, c_hi].
enumerate_result enumerate_superstable(const family_spec& spec, double c_lo, double c_hi,
                                       int q_max);

// Turning point of a unimodal (nu = 1) family.
double turning_point(const family_spec& spec);

// f_c^q(x0) together with the forward-accumulated derivative d/dc f_c^q(x0).
std::pair<double, double> superstable_objective(const family_spec& spec, double c, int q);

} // namespace trv
