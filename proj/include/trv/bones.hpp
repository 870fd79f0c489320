#pragma once

#include <array>
#include <string>
#include <vector>

#include "trv/family.hpp"

namespace trv {

// Two-parameter continuation of the cubic critical-relation curves
// ("bones"): connected components of {(a,b) : f^q_{a,b}(a) = a} for
// f_{a,b}(x) = x^3 - 3a^2 x + b, together with the oriented tangent frame
// in critical-value coordinates, crossing detection for the second
// critical point, the directional transversality quotient, and lap-number
// entropy estimates along the curve.

using vec2 = std::array<double, 2>;

// A marked event along a traced curve.  `crossing` events record the
// iterate i with f^i_{a,b}(a) = -a at the refined location; the remaining
// events flag near-singular (near-parabolic) curve points where the
// gradient of the defect almost vanishes.
struct bone_event {
    int index = 0;        // curve-point index the event was detected at
    bool crossing = true; // false marks a near-parabolic flag
    int i = 0;            // iterate hitting the second critical point
    double a = 0;         // refined location (crossings) or the stored
    double b = 0;         // curve point (near-parabolic flags)
};

struct bone_curve {
    int q = 1;
    std::vector<vec2> points;   // ordered (a, b) samples on the curve
    std::vector<vec2> tangents; // unit marching tangents, (a,b) coordinates
    std::vector<bone_event> events;  // typically filled from detect_crossings
    std::vector<double> lap_entropy; // per-point estimate; NaN where escaped
    // Indices where the ordering of the periodic orbit points changed; the
    // continuation arguments assume this stays empty and we verify rather
    // than assume it.
    std::vector<int> ordering_flips;
};

// Defect of the bone equation, R(a,b) = f^q_{a,b}(a) - a, and its exact
// (a,b)-gradient by forward accumulation through the orbit.
double bone_residual(int q, double a, double b);
void bone_gradient(int q, double a, double b, double& da, double& db);

// Pseudo-arclength predictor-corrector on R = 0 from a seed in the Newton
// basin of the curve.  |step| is the arclength increment (halved on
// corrector failure); its sign selects the initial marching direction.
// The trace stops at n_steps, when a reaches 0, or when the corrector
// fails at the minimal step; a failure on the very first step raises
// step_failure with the last good point in the message.
bone_curve trace_bone(int q, vec2 seed, double step, int n_steps);

// Oriented tangent frame at a curve point in critical-value coordinates:
// the column is grad_w R / DG^{q-1}_w(w1) and E is the unit vector
// orthogonal to it with det[column, E] > 0.
struct tangent_frame {
    vec2 E{};        // unit tangent in (w1, w2)
    vec2 grad_w{};   // gradient of the defect in (w1, w2)
    double denom = 1; // DG^{q-1}_w(w1)
};
tangent_frame tangent_orientation(const family_spec& spec, int q, vec2 ab);

// Sign changes of s_i(a,b) = f^i_{a,b}(a) + a, 0 < i <= q, along the
// traced polyline, refined by on-curve bisection along arclength.  "At
// most one crossing per component" is a property for the caller to check;
// every located event is reported.
std::vector<bone_event> detect_crossings(const family_spec& spec,
                                         const bone_curve& curve);

// Directional transversality at a crossing: the derivative of the second
// relation R2(w) = G_w^{q2-1}(w2) - p1(w), q2 = q - i, along the oriented
// tangent of the standing relation G_w^{i-1}(w1) = p2(w), divided by
// Dg^{q2-1}(c_{1,2}).  Positive at transversal crossings; the q2 = 1 case
// has an empty denominator.
double directional_transversality(const family_spec& spec,
                                  const bone_curve& curve,
                                  const bone_event& event);

// Lap-number entropy along the curve: bimodal lap counting of f^n on the
// invariant hull of the two critical orbits, least-squares slope of the
// log lap counts over the upper half of the table.  Escaping points are
// recorded and skipped by the monotonicity classification.
struct entropy_report {
    std::vector<double> entropy; // per point; quiet NaN where escaped
    std::vector<int> escaped;    // indices whose critical orbits escape
    bool monotone_ok = false;    // each half monotone in some direction
    bool opposite_ok = false;    // halves can take opposite directions
    double tolerance = 0.02;
};
entropy_report entropy_along(const family_spec& spec, const bone_curve& curve,
                             int n);

// b-values with f^q_{a,b}(a) = a of minimal period q on the vertical line
// {a = const}, located by sign-change bisection on a uniform grid.
std::vector<double> bone_seeds(int q, double a, double b_lo, double b_hi,
                               int grid);

// Curve exports: CSV (a, b, E_a, E_b, entropy, event_flag) and an SVG
// polyline plot with markers at the crossing events.
std::string bone_csv(const bone_curve& curve);
std::string bone_svg(const std::vector<bone_curve>& curves, int width = 640,
                     int height = 480);

} // namespace trv
