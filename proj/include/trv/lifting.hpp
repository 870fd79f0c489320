#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trv/transfer.hpp"

namespace trv {

// Sampled holomorphic motion of a finite real set over a disk of the given
// radius: samples[(ray*n_radii + s)*npts + m] holds h_lambda(base_set[m]) at
// lambda = radius*(s+1)/n_radii * exp(2*pi*i*ray/n_rays), and jet1[m] holds
// d h_lambda(base_set[m]) / d lambda at lambda = 0.  h_0 is the identity by
// construction and is not stored.
struct motion {
    std::vector<double> base_set;
    double radius = 0.0;
    int n_rays = 16;
    int n_radii = 12;
    std::vector<cplx> samples;
    std::vector<cplx> jet1;

    int npts() const { return static_cast<int>(base_set.size()); }
    cplx lambda_at(int ray, int s) const;
    cplx at(int ray, int s, int m) const {
        return samples[(static_cast<std::size_t>(ray) * n_radii + s) * base_set.size() + m];
    }
    cplx& at(int ray, int s, int m) {
        return samples[(static_cast<std::size_t>(ray) * n_radii + s) * base_set.size() + m];
    }
};

// Affine motion h_lambda(x) = x + lambda*v(x) sampled on the grid.  Fails with
// injectivity_violation when two base points collide inside the disk (exact
// collision radius |x-y| / |v(x)-v(y)|) or when two sampled values come closer
// than inj_floor.
motion make_motion(const std::vector<double>& base_set, const std::vector<cplx>& velocity,
                   double radius, int n_rays = 16, int n_radii = 12);

// Lift of a motion of g(P): at critical points the lifted value is the moved
// critical point p_j(c_1(lambda)); elsewhere it solves G_{c_1(lambda)}(y) =
// h_lambda(g(x)) on the branch through x, tracked by marching lambda outward
// along each ray in steps_per_ray Newton-corrected increments (0 picks one
// increment per grid radius).  A step is accepted only if the value moves by
// less than half the local spacing of g(P); otherwise the disk radius is
// halved (up to 8 times, re-interpolating the input motion) before the lift
// fails with branch_loss.  The returned radius records any shrinking; jet1 is
// transformed by the exact transfer-operator action.
motion lift_motion(const family_spec& spec, const marked_orbit& orbit,
                   const std::vector<critical_relation>& relations, const motion& m,
                   int steps_per_ray = 0);

// Closed-form lift for the additive even-exponent families, where the lift
// equation solves by principal roots: sign(a) * (h(f(a)) - h(f(0)))^(1/l).
// Cross-check for lift_motion on those families.
motion lift_by_roots(const family_spec& spec, const marked_orbit& orbit,
                     const std::vector<critical_relation>& relations, const motion& m);

struct lift_diagnostics {
    std::vector<double> sup_norm;  // M_k = max over samples of |h^k|
    std::vector<double> deviation; // d_k = max over samples of |h^k - x|
    std::vector<double> ratio;     // d_{k+1}/d_k where defined
    double rate = 0.0;             // geometric-mean contraction of the tail
    bool bounded = false;          // M_k <= M_0 + slack throughout
    double final_radius = 0.0;
    int iterations = 0;            // lifts completed
    int failed_at = -1;            // iterate index of a branch loss, or -1
    std::string failure;           // branch-loss message, empty on success

    std::string to_json() const;
};

// Iterates lift_motion from the seed up to k_max times (k_max <= 200),
// recording sup-norms and deviations from the base set.  A branch loss stops
// the iteration and is recorded in the diagnostics rather than thrown, so the
// growth data leading up to the failure survives.
lift_diagnostics iterate_lifts(const family_spec& spec, const marked_orbit& orbit,
                               const std::vector<critical_relation>& relations,
                               const motion& seed, int k_max);

struct phi_result {
    std::vector<cplx> value;    // Phi(Z), indexed like g(P)
    std::vector<cplx> jacobian; // row-major #gP x #gP, central differences
};

// One application of the lift map Phi at a point Z of C^{#g(P)} near the base
// point: G_{Z_1}(phi_x(Z)) = z_{g(x)} on the branch through x, phi at critical
// points given by the moved critical points of G_{Z_1}.  The Jacobian is
// computed by central differences with step 1e-6 (it approximates the
// transfer operator).
phi_result phi_and_derivative(const family_spec& spec, const marked_orbit& orbit,
                              const std::vector<critical_relation>& relations,
                              const std::vector<cplx>& Z);

struct geometry_report {
    double angle = 0.0; // angle 0-z-1 at the vertex z, in [0, pi]
    bool in_Dtheta = false;
    bool in_sector = false; // |arg z| < theta
};

// Angle geometry of one point: D_theta membership (angle 0z1 > pi - theta)
// and sector membership.  Fails with degenerate_point at z in {0, 1}.
geometry_report geometry(cplx z, double theta);

// Angle at the vertex o between the rays toward a and b, in [0, pi].
double angle_at(cplx o, cplx a, cplx b);

struct sector_report {
    double theta = 0.0;
    double ell = 1.0;
    std::vector<char> A1_ok;                // per base point (0-points skipped as true)
    std::vector<std::pair<int, int>> pairs; // admissible ordered pairs (|a|>|b|>0, ab>0)
    std::vector<char> A2_ok;                // per entry of `pairs`
    double worst_angle = 0.0;
    bool regular = false; // worst_angle < theta

    std::string to_json() const;
};

// Checks the two sector conditions over every sample of the motion: signed
// values stay in the sector of half-angle 4*theta/l around the real axis, and
// ratios h(b)/h(a) of same-sign points with |a| > |b| stay in D_theta.  The
// worst angle rescales the A1 margin by l/4 so both conditions compare
// directly against theta.
sector_report theta_regularity(const motion& m, double ell, double theta);

struct order_report {
    double slope = 0.0;         // least-squares slope of log dev vs log lambda
    bool unit_direction = false;// supplied v passed the eigenvalue-1 test
    double fit_error = 0.0;     // rms residual of the fit
};

// Scaling exponent of |h-hat - h| for the affine motion along v: slope 2 when
// v is fixed by the transfer operator (order-1 invariance), slope 1 otherwise.
// When v fails the eigenvalue-1 test within 1e-8 the check runs with the
// leading eigenvector instead, as a negative control.  v = 0 fails with
// degenerate_input.
order_report order_invariance_check(const family_spec& spec, const marked_orbit& orbit,
                                    const std::vector<critical_relation>& relations,
                                    const std::vector<cplx>& v,
                                    const std::vector<double>& lambda_list);

struct schwarz_report {
    long long checked = 0;       // accepted samples
    long long violations = 0;    // z^t outside D_theta
    long long a3_checked = 0;    // samples with angle 01z below delta*theta
    long long a3_violations = 0; // of those, angle 01z^t >= eps*theta
};

// Monte Carlo check that D_theta is preserved by z -> z^t for t in (0, 1):
// samples z in D_theta intersected with the annulus 0.01 < |z| < 100 (slit
// along the negative reals), deterministic per-sample streams keyed by seed.
// Also spot-checks the small-angle bound with (eps, delta) = (0.5, 0.01).
schwarz_report schwarz_sampling(double theta, int n_samples, std::uint64_t seed);

// CSV dump of a sampled motion (columns: ray, radius, point_label, re, im).
std::string motion_csv(const motion& m);

} // namespace trv
