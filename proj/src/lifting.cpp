#include "trv/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "trv/io.hpp"
#include "trv/rng.hpp"

namespace trv {

namespace {

const double k_pi = std::acos(-1.0);

double norm_inf(const std::vector<cplx>& v) {
    double n = 0.0;
    for (const cplx& z : v) n = std::max(n, std::abs(z));
    return n;
}

// Static geometry of the base set needed by every lift: which base index is a
// critical point, where g sends the others, where the critical values sit,
// and the local spacing used by the branch-acceptance test.
struct lift_frame {
    int npts = 0;
    std::vector<int> crit_of; // base index -> critical j, or -1
    std::vector<int> next_of; // base index -> index of g(x) in the base, or -1
    std::vector<int> c1_idx;  // j -> base index of c_{1,j}
    std::vector<double> spacing;
    double inj_floor = 0.0;
};

lift_frame build_frame(const family_spec& spec, const marked_orbit& orbit,
                       const std::vector<double>& base) {
    const std::vector<double>& gP = orbit.gP;
    if (base.size() != gP.size())
        fail(errc::domain_error, "motion base set does not match g(P) of the orbit");
    for (std::size_t m = 0; m < gP.size(); ++m)
        if (std::abs(base[m] - gP[m]) > orbit.dedup_tol)
            fail(errc::domain_error, "motion base set does not match g(P) of the orbit");

    lift_frame fr;
    fr.npts = static_cast<int>(gP.size());
    fr.crit_of.assign(gP.size(), -1);
    fr.next_of.assign(gP.size(), -1);
    const int nu = spec.nu();
    fr.c1_idx.resize(nu);
    for (int j = 0; j < nu; ++j) {
        fr.c1_idx[j] = orbit.set_index[j][1];
        if (orbit.set_index[j][0] >= 0) fr.crit_of[orbit.set_index[j][0]] = j;
    }
    for (int j = 0; j < nu; ++j)
        for (int i = 0; i + 1 < static_cast<int>(orbit.pts[j].size()); ++i) {
            int m = orbit.set_index[j][i];
            if (m >= 0 && fr.crit_of[m] < 0 && fr.next_of[m] < 0)
                fr.next_of[m] = orbit.set_index[j][i + 1];
        }
    for (std::size_t m = 0; m < gP.size(); ++m)
        if (fr.crit_of[m] < 0 && fr.next_of[m] < 0)
            fail(errc::domain_error, "marked set is not forward closed at a base point");

    double diam = gP.empty() ? 0.0 : gP.back() - gP.front();
    fr.spacing.assign(gP.size(), std::max(1.0, diam));
    for (std::size_t m = 0; m < gP.size(); ++m)
        for (std::size_t m2 = 0; m2 < gP.size(); ++m2)
            if (m2 != m) fr.spacing[m] = std::min(fr.spacing[m], std::abs(gP[m] - gP[m2]));
    fr.inj_floor = 1e-9 * (1.0 + diam);
    return fr;
}

// Newton on y |-> G_{Z1}(y) - target from the given seed; success requires a
// small residual, so stagnation and escape both report failure to the caller
// (which reacts by refining or shrinking, not by throwing).
bool newton_branch(const family_spec& spec, const std::vector<cplx>& Z1, cplx target,
                   cplx& y) {
    for (int it = 0; it < 80; ++it) {
        cplx F = eval(spec, Z1, y) - target;
        if (std::abs(F) <= 1e-13 * (1.0 + std::abs(target))) return true;
        cplx dF = deriv_z(spec, Z1, y);
        if (!(std::abs(dF) > 1e-300)) return false;
        cplx step = F / dF;
        y -= step;
        if (!std::isfinite(y.real()) || !std::isfinite(y.imag())) return false;
        if (std::abs(step) <= 1e-16 * (1.0 + std::abs(y)))
            return std::abs(eval(spec, Z1, y) - target) <= 1e-11 * (1.0 + std::abs(target));
    }
    return false;
}

// Input motion values along one ray at fractional grid position u (in units
// of the input radial spacing, u = 0 at the base): linear interpolation
// between stored checkpoints; exact at integer u.
std::vector<cplx> input_at_u(const motion& m, int ray, double u) {
    const int n = m.npts();
    auto node = [&](int k, int pt) -> cplx {
        if (k <= 0) return cplx(m.base_set[pt], 0.0);
        return m.at(ray, std::min(k, m.n_radii) - 1, pt);
    };
    int k0 = static_cast<int>(std::floor(u));
    double frac = u - k0;
    std::vector<cplx> h(n);
    for (int pt = 0; pt < n; ++pt)
        h[pt] = frac == 0.0 ? node(k0, pt)
                            : (1.0 - frac) * node(k0, pt) + frac * node(k0 + 1, pt);
    return h;
}

// One application of the lift map to the value vector h (indexed like the
// base set), branch-seeded by `cur`; returns false on any Newton failure,
// branch-acceptance violation, or sample collision.
bool apply_lift(const family_spec& spec, const lift_frame& fr, const std::vector<cplx>& h,
                std::vector<cplx>& cur, std::string& reason) {
    const int nu = spec.nu();
    std::vector<cplx> Z1(nu);
    for (int j = 0; j < nu; ++j) Z1[j] = h[fr.c1_idx[j]];
    std::vector<cplx> cps = critical_points(spec, Z1);
    std::vector<cplx> nxt(fr.npts);
    for (int m = 0; m < fr.npts; ++m) {
        if (fr.crit_of[m] >= 0) {
            nxt[m] = cps[fr.crit_of[m]];
            continue;
        }
        cplx y = cur[m];
        if (!newton_branch(spec, Z1, h[fr.next_of[m]], y)) {
            reason = "Newton correction failed at base point " + std::to_string(m);
            return false;
        }
        if (std::abs(y - cur[m]) >= 0.5 * fr.spacing[m]) {
            reason = "continuation step exceeded half the local spacing at base point " +
                     std::to_string(m);
            return false;
        }
        nxt[m] = y;
    }
    for (int a = 0; a < fr.npts; ++a)
        for (int b = a + 1; b < fr.npts; ++b)
            if (std::abs(nxt[a] - nxt[b]) <= fr.inj_floor) {
                reason = "lifted samples collide at base points " + std::to_string(a) +
                         " and " + std::to_string(b);
                return false;
            }
    cur = nxt;
    return true;
}

std::vector<cplx> jet_action(const transfer_matrix& A, const std::vector<cplx>& jet) {
    std::vector<cplx> out(jet.size(), cplx(0.0, 0.0));
    for (int r = 0; r < A.dim; ++r)
        for (int c = 0; c < A.dim; ++c) out[r] += A.at(r, c) * jet[c];
    return out;
}

void check_motion_grid(const motion& m) {
    if (m.base_set.empty()) fail(errc::degenerate_input, "motion has an empty base set");
    if (!(m.radius > 0.0)) fail(errc::domain_error, "motion radius must be positive");
    if (m.n_rays < 1 || m.n_radii < 1)
        fail(errc::domain_error, "motion grid needs at least one ray and one radius");
    std::size_t want = static_cast<std::size_t>(m.n_rays) * m.n_radii * m.base_set.size();
    if (m.samples.size() != want || m.jet1.size() != m.base_set.size())
        fail(errc::domain_error, "motion sample layout does not match its grid");
}

// Principal fractional power exp(log(z)/e); the closed-form lift is only
// valid off the branch cut.
cplx principal_root(cplx z, double e, bool& ok) {
    if (z.imag() == 0.0 && z.real() <= 0.0) {
        ok = false;
        return cplx(0.0, 0.0);
    }
    ok = true;
    return std::exp(std::log(z) / e);
}

std::vector<double> fit_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    // least squares y = a + b x; returns {b, rms residual}
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) fail(errc::degenerate_input, "slope fit needs distinct scales");
    double b = (n * sxy - sx * sy) / denom;
    double a = (sy - b * sx) / n;
    double rss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - (a + b * xs[i]);
        rss += r * r;
    }
    return {b, std::sqrt(rss / n)};
}

} // namespace

cplx motion::lambda_at(int ray, int s) const {
    double t = radius * (s + 1) / n_radii;
    return std::polar(t, 2.0 * k_pi * ray / n_rays);
}

motion make_motion(const std::vector<double>& base_set, const std::vector<cplx>& velocity,
                   double radius, int n_rays, int n_radii) {
    if (base_set.empty()) fail(errc::degenerate_input, "motion has an empty base set");
    if (velocity.size() != base_set.size())
        fail(errc::domain_error, "velocity must assign one value per base point");
    if (!(radius > 0.0)) fail(errc::domain_error, "motion radius must be positive");
    if (n_rays < 1 || n_radii < 1)
        fail(errc::domain_error, "motion grid needs at least one ray and one radius");

    const int n = static_cast<int>(base_set.size());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            double dx = std::abs(base_set[a] - base_set[b]);
            double dv = std::abs(velocity[a] - velocity[b]);
            if (dx == 0.0)
                fail(errc::injectivity_violation, "base points " + std::to_string(a) + " and " +
                                                      std::to_string(b) + " coincide");
            if (dv > 0.0 && dx / dv <= radius)
                fail(errc::injectivity_violation,
                     "points " + float17(base_set[a]) + " and " + float17(base_set[b]) +
                         " collide at |lambda| = " + float17(dx / dv) +
                         " inside the requested disk");
        }

    motion m;
    m.base_set = base_set;
    m.radius = radius;
    m.n_rays = n_rays;
    m.n_radii = n_radii;
    m.jet1 = velocity;
    m.samples.assign(static_cast<std::size_t>(n_rays) * n_radii * n, cplx(0.0, 0.0));
    double diam = *std::max_element(base_set.begin(), base_set.end()) -
                  *std::min_element(base_set.begin(), base_set.end());
    double floor = 1e-9 * (1.0 + diam);
    for (int ray = 0; ray < n_rays; ++ray)
        for (int s = 0; s < n_radii; ++s) {
            cplx lam = m.lambda_at(ray, s);
            for (int pt = 0; pt < n; ++pt) m.at(ray, s, pt) = base_set[pt] + lam * velocity[pt];
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    if (std::abs(m.at(ray, s, a) - m.at(ray, s, b)) <= floor)
                        fail(errc::injectivity_violation,
                             "sampled motion collides points " + std::to_string(a) + " and " +
                                 std::to_string(b) + " at lambda = " + float17(std::abs(lam)));
        }
    return m;
}

motion lift_motion(const family_spec& spec, const marked_orbit& orbit,
                   const std::vector<critical_relation>& relations, const motion& m,
                   int steps_per_ray) {
    check_motion_grid(m);
    lift_frame fr = build_frame(spec, orbit, m.base_set);
    int per_gap = 1;
    if (steps_per_ray > m.n_radii) per_gap = (steps_per_ray + m.n_radii - 1) / m.n_radii;

    transfer_matrix A = assemble_A(orbit, relations);
    motion out;
    out.base_set = m.base_set;
    out.n_rays = m.n_rays;
    out.n_radii = m.n_radii;
    out.jet1 = jet_action(A, m.jet1);
    out.samples.assign(m.samples.size(), cplx(0.0, 0.0));

    std::string reason = "no-op";
    for (int attempt = 0; attempt <= 8; ++attempt) {
        double factor = std::ldexp(1.0, -attempt); // output radius / input radius
        out.radius = m.radius * factor;
        bool ok = true;
        for (int ray = 0; ray < m.n_rays && ok; ++ray) {
            std::vector<cplx> cur(fr.npts);
            for (int pt = 0; pt < fr.npts; ++pt) cur[pt] = cplx(m.base_set[pt], 0.0);
            for (int s = 0; s < m.n_radii && ok; ++s) {
                for (int i = 1; i <= per_gap && ok; ++i) {
                    double u = factor * (s + static_cast<double>(i) / per_gap);
                    try {
                        ok = apply_lift(spec, fr, input_at_u(m, ray, u), cur, reason);
                    } catch (const error& e) {
                        reason = e.what();
                        ok = false;
                    }
                }
                if (ok)
                    for (int pt = 0; pt < fr.npts; ++pt) out.at(ray, s, pt) = cur[pt];
            }
        }
        if (ok) return out;
    }
    fail(errc::branch_loss, "lift failed after 8 radius halvings: " + reason);
}

motion lift_by_roots(const family_spec& spec, const marked_orbit& orbit,
                     const std::vector<critical_relation>& relations, const motion& m) {
    bool monic_even = spec.kind == family_kind::monic_additive && spec.d % 2 == 0;
    if (!monic_even && spec.kind != family_kind::power_additive)
        fail(errc::domain_error,
             "closed-form root lift is defined for the additive even-exponent families");
    check_motion_grid(m);
    lift_frame fr = build_frame(spec, orbit, m.base_set);

    motion out = m;
    out.jet1 = jet_action(assemble_A(orbit, relations), m.jet1);
    double ell_plus = monic_even ? spec.d : spec.ell_plus;
    double ell_minus = monic_even ? spec.d : spec.ell_minus;
    for (int ray = 0; ray < m.n_rays; ++ray)
        for (int s = 0; s < m.n_radii; ++s) {
            cplx w = m.at(ray, s, fr.c1_idx[0]);
            for (int pt = 0; pt < fr.npts; ++pt) {
                if (fr.crit_of[pt] >= 0) {
                    out.at(ray, s, pt) = cplx(0.0, 0.0);
                    continue;
                }
                cplx radicand = m.at(ray, s, fr.next_of[pt]) - w;
                bool ok = true;
                cplx root = m.base_set[pt] > 0.0 ? principal_root(radicand, ell_plus, ok)
                                                 : -principal_root(radicand, ell_minus, ok);
                if (!ok)
                    fail(errc::branch_loss, "root lift hit the branch cut at base point " +
                                                std::to_string(pt));
                if (root.real() * (m.base_set[pt] > 0.0 ? 1.0 : -1.0) <= 0.0)
                    fail(errc::branch_loss, "principal root left its half plane at base point " +
                                                std::to_string(pt));
                out.at(ray, s, pt) = root;
            }
        }
    return out;
}

lift_diagnostics iterate_lifts(const family_spec& spec, const marked_orbit& orbit,
                               const std::vector<critical_relation>& relations,
                               const motion& seed, int k_max) {
    if (k_max < 0 || k_max > 200) fail(errc::domain_error, "k_max must lie in [0, 200]");
    check_motion_grid(seed);

    lift_diagnostics diag;
    auto record = [&](const motion& mo) {
        double M = 0.0, d = 0.0;
        for (int ray = 0; ray < mo.n_rays; ++ray)
            for (int s = 0; s < mo.n_radii; ++s)
                for (int pt = 0; pt < mo.npts(); ++pt) {
                    cplx z = mo.at(ray, s, pt);
                    M = std::max(M, std::abs(z));
                    d = std::max(d, std::abs(z - mo.base_set[pt]));
                }
        diag.sup_norm.push_back(M);
        diag.deviation.push_back(d);
    };

    record(seed);
    motion cur = seed;
    for (int k = 1; k <= k_max; ++k) {
        try {
            cur = lift_motion(spec, orbit, relations, cur);
        } catch (const error& e) {
            diag.failed_at = k;
            diag.failure = e.what();
            break;
        }
        record(cur);
        diag.iterations = k;
    }
    diag.final_radius = cur.radius;

    for (std::size_t k = 0; k + 1 < diag.deviation.size(); ++k)
        if (diag.deviation[k] > 0.0)
            diag.ratio.push_back(diag.deviation[k + 1] / diag.deviation[k]);
    if (!diag.ratio.empty()) {
        std::size_t lo = diag.ratio.size() / 2;
        double acc = 0.0;
        int cnt = 0;
        for (std::size_t k = lo; k < diag.ratio.size(); ++k) {
            if (diag.ratio[k] > 0.0) {
                acc += std::log(diag.ratio[k]);
                ++cnt;
            }
        }
        if (cnt > 0) diag.rate = std::exp(acc / cnt);
    }
    double slack = 0.05 * (1.0 + diag.sup_norm.front());
    diag.bounded = true;
    for (double M : diag.sup_norm)
        if (M > diag.sup_norm.front() + slack) diag.bounded = false;
    return diag;
}

std::string lift_diagnostics::to_json() const {
    nlohmann::ordered_json j;
    j["sup_norm"] = sup_norm;
    j["deviation"] = deviation;
    j["ratio"] = ratio;
    j["rate"] = rate;
    j["bounded"] = bounded;
    j["final_radius"] = final_radius;
    j["iterations"] = iterations;
    j["failed_at"] = failed_at;
    j["failure"] = failure;
    return j.dump(2);
}

phi_result phi_and_derivative(const family_spec& spec, const marked_orbit& orbit,
                              const std::vector<critical_relation>& relations,
                              const std::vector<cplx>& Z) {
    (void)relations;
    lift_frame fr = build_frame(spec, orbit, orbit.gP);
    if (Z.size() != orbit.gP.size())
        fail(errc::domain_error, "lift-map argument must have one coordinate per point of g(P)");

    auto phi_value = [&](const std::vector<cplx>& zz) {
        const int nu = spec.nu();
        std::vector<cplx> Z1(nu);
        for (int j = 0; j < nu; ++j) Z1[j] = zz[fr.c1_idx[j]];
        std::vector<cplx> cps = critical_points(spec, Z1);
        std::vector<cplx> out(fr.npts);
        for (int m = 0; m < fr.npts; ++m) {
            if (fr.crit_of[m] >= 0) {
                out[m] = cps[fr.crit_of[m]];
                continue;
            }
            cplx y = cplx(orbit.gP[m], 0.0);
            if (!newton_branch(spec, Z1, zz[fr.next_of[m]], y))
                fail(errc::branch_loss,
                     "lift-map Newton failed at base point " + std::to_string(m));
            if (std::abs(y - orbit.gP[m]) >= 0.5 * fr.spacing[m])
                fail(errc::branch_loss,
                     "lift-map solution left the branch at base point " + std::to_string(m));
            out[m] = y;
        }
        return out;
    };

    phi_result res;
    res.value = phi_value(Z);
    const int n = fr.npts;
    res.jacobian.assign(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));
    const double h = 1e-6;
    for (int col = 0; col < n; ++col) {
        std::vector<cplx> zp = Z, zm = Z;
        zp[col] += h;
        zm[col] -= h;
        std::vector<cplx> fp = phi_value(zp);
        std::vector<cplx> fm = phi_value(zm);
        for (int row = 0; row < n; ++row)
            res.jacobian[static_cast<std::size_t>(row) * n + col] = (fp[row] - fm[row]) / (2.0 * h);
    }
    return res;
}

double angle_at(cplx o, cplx a, cplx b) {
    if (a == o || b == o) fail(errc::degenerate_point, "angle vertex coincides with an endpoint");
    return std::abs(std::arg((a - o) / (b - o)));
}

geometry_report geometry(cplx z, double theta) {
    if (z == cplx(0.0, 0.0) || z == cplx(1.0, 0.0))
        fail(errc::degenerate_point, "angle geometry is undefined at z = 0 and z = 1");
    geometry_report rep;
    rep.angle = angle_at(z, cplx(0.0, 0.0), cplx(1.0, 0.0));
    rep.in_Dtheta = rep.angle > k_pi - theta;
    rep.in_sector = std::abs(std::arg(z)) < theta;
    return rep;
}

sector_report theta_regularity(const motion& m, double ell, double theta) {
    if (!(ell > 0.0)) fail(errc::domain_error, "sector conditions need ell > 0");
    if (!(theta > 0.0) || !(theta < k_pi)) fail(errc::domain_error, "theta must lie in (0, pi)");
    check_motion_grid(m);

    const int n = m.npts();
    double zero_tol = 0.0;
    for (double x : m.base_set) zero_tol = std::max(zero_tol, std::abs(x));
    zero_tol = 1e-9 * std::max(1.0, zero_tol);

    sector_report rep;
    rep.theta = theta;
    rep.ell = ell;
    rep.A1_ok.assign(n, 1);
    double worst = 0.0;
    for (int pt = 0; pt < n; ++pt) {
        double a = m.base_set[pt];
        if (std::abs(a) <= zero_tol) continue; // fixed turning point carries no sign condition
        for (int ray = 0; ray < m.n_rays; ++ray)
            for (int s = 0; s < m.n_radii; ++s) {
                cplx z = m.at(ray, s, pt);
                if (z == cplx(0.0, 0.0))
                    fail(errc::degenerate_point, "motion sample vanished at a nonzero base point");
                double ang = std::abs(std::arg(a > 0.0 ? z : -z));
                worst = std::max(worst, ell * ang / 4.0);
                if (!(ang < 4.0 * theta / ell)) rep.A1_ok[pt] = 0;
            }
    }
    for (int pa = 0; pa < n; ++pa)
        for (int pb = 0; pb < n; ++pb) {
            double a = m.base_set[pa], b = m.base_set[pb];
            if (pa == pb || std::abs(a) <= zero_tol || std::abs(b) <= zero_tol) continue;
            if (!(std::abs(a) > std::abs(b)) || a * b <= 0.0) continue;
            char ok = 1;
            for (int ray = 0; ray < m.n_rays; ++ray)
                for (int s = 0; s < m.n_radii; ++s) {
                    cplx ratio = m.at(ray, s, pb) / m.at(ray, s, pa);
                    geometry_report g = geometry(ratio, theta);
                    worst = std::max(worst, k_pi - g.angle);
                    if (!g.in_Dtheta) ok = 0;
                }
            rep.pairs.emplace_back(pa, pb);
            rep.A2_ok.push_back(ok);
        }
    rep.worst_angle = worst;
    rep.regular = worst < theta;
    return rep;
}

std::string sector_report::to_json() const {
    nlohmann::ordered_json j;
    j["theta"] = theta;
    j["ell"] = ell;
    j["A1_ok"] = nlohmann::ordered_json::array();
    for (char c : A1_ok) j["A1_ok"].push_back(c != 0);
    j["pairs"] = nlohmann::ordered_json::array();
    for (const auto& p : pairs) j["pairs"].push_back(nlohmann::ordered_json::array({p.first, p.second}));
    j["A2_ok"] = nlohmann::ordered_json::array();
    for (char c : A2_ok) j["A2_ok"].push_back(c != 0);
    j["worst_angle"] = worst_angle;
    j["regular"] = regular;
    return j.dump(2);
}

order_report order_invariance_check(const family_spec& spec, const marked_orbit& orbit,
                                    const std::vector<critical_relation>& relations,
                                    const std::vector<cplx>& v,
                                    const std::vector<double>& lambda_list) {
    const std::size_t n = orbit.gP.size();
    if (v.size() != n) fail(errc::domain_error, "direction must have one entry per point of g(P)");
    if (lambda_list.size() < 2)
        fail(errc::domain_error, "scaling fit needs at least two lambda values");
    for (double lam : lambda_list)
        if (!(lam > 0.0)) fail(errc::domain_error, "lambda values must be positive");
    if (norm_inf(v) == 0.0)
        fail(errc::degenerate_input, "zero direction has no scaling exponent");

    transfer_matrix A = assemble_A(orbit, relations);
    auto apply_A = [&](const std::vector<cplx>& x) {
        std::vector<cplx> y(n, cplx(0.0, 0.0));
        for (int r = 0; r < A.dim; ++r)
            for (int c = 0; c < A.dim; ++c) y[r] += A.at(r, c) * x[c];
        return y;
    };

    order_report rep;
    std::vector<cplx> dir = v;
    {
        std::vector<cplx> Av = apply_A(v);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(Av[i] - v[i]));
        rep.unit_direction = res <= 1e-8 * norm_inf(v);
    }
    if (!rep.unit_direction) {
        // Negative control: run along the leading eigenvector instead.
        std::vector<cplx> x(n);
        rng g(7);
        for (std::size_t i = 0; i < n; ++i) x[i] = cplx(g.uniform(0.5, 1.5), 0.0);
        for (int it = 0; it < 400; ++it) {
            x = apply_A(x);
            double nx = norm_inf(x);
            if (nx < 1e-280)
                fail(errc::degenerate_input,
                     "transfer operator is nilpotent; no leading direction to test");
            for (cplx& z : x) z /= nx;
        }
        dir = x;
    }
    double nd = norm_inf(dir);
    for (cplx& z : dir) z /= nd;

    std::vector<double> xs, ys;
    for (double lam : lambda_list) {
        std::vector<cplx> Z(n);
        for (std::size_t i = 0; i < n; ++i) Z[i] = orbit.gP[i] + lam * dir[i];
        phi_result pr = phi_and_derivative(spec, orbit, relations, Z);
        double dev = 0.0;
        for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(pr.value[i] - Z[i]));
        if (dev <= 0.0) continue;
        xs.push_back(std::log(lam));
        ys.push_back(std::log(dev));
    }
    if (xs.size() < 2)
        fail(errc::degenerate_input, "deviation vanished; scaling exponent undefined");
    std::vector<double> fit = fit_log_slope(xs, ys);
    rep.slope = fit[0];
    rep.fit_error = fit[1];
    return rep;
}

schwarz_report schwarz_sampling(double theta, int n_samples, std::uint64_t seed) {
    if (!(theta > 0.0) || !(theta < k_pi)) fail(errc::domain_error, "theta must lie in (0, pi)");
    if (n_samples < 1) fail(errc::domain_error, "need at least one sample");

    // The defining arcs through 0 and 1 have radius R = 1/(2 sin theta) with
    // centers offset sqrt(R^2 - 1/4) from the chord midpoint, so D_theta sits
    // inside the disk about 1/2 of radius R + sqrt(R^2 - 1/4); uniform
    // rejection from that disk samples the region uniformly.
    const double arc_r = 0.5 / std::sin(theta);
    const double bound = arc_r + std::sqrt(std::max(arc_r * arc_r - 0.25, 0.0));
    schwarz_report rep;
    for (int i = 0; i < n_samples; ++i) {
        rng g(seed, static_cast<std::uint64_t>(i));
        cplx z;
        bool found = false;
        for (long tries = 0; tries < 2000000; ++tries) {
            double r = bound * std::sqrt(g.u01());
            double phi = g.uniform(-k_pi, k_pi);
            z = cplx(0.5, 0.0) + std::polar(r, phi);
            double az = std::abs(z);
            if (az <= 0.01 || az >= 100.0) continue;
            if (!(std::abs(std::arg(z)) < k_pi - 1e-6)) continue;
            if (z == cplx(1.0, 0.0)) continue;
            if (angle_at(z, cplx(0.0, 0.0), cplx(1.0, 0.0)) > k_pi - theta) {
                found = true;
                break;
            }
        }
        if (!found) fail(errc::non_convergence, "rejection sampling of D_theta stalled");
        double t;
        do {
            t = g.u01();
        } while (t == 0.0);
        cplx zt = std::exp(t * std::log(z));
        ++rep.checked;
        if (!(angle_at(zt, cplx(0.0, 0.0), cplx(1.0, 0.0)) > k_pi - theta)) ++rep.violations;

        // Small-angle spot check at the vertex 1: angle 01z below delta*theta
        // must stay below eps*theta after z -> z^t.
        if (angle_at(cplx(1.0, 0.0), cplx(0.0, 0.0), z) < 0.01 * theta) {
            ++rep.a3_checked;
            if (angle_at(cplx(1.0, 0.0), cplx(0.0, 0.0), zt) >= 0.5 * theta) ++rep.a3_violations;
        }
    }
    return rep;
}

std::string motion_csv(const motion& m) {
    std::string out = "ray,radius,point_label,re,im\n";
    for (int ray = 0; ray < m.n_rays; ++ray)
        for (int s = 0; s < m.n_radii; ++s) {
            double t = m.radius * (s + 1) / m.n_radii;
            for (int pt = 0; pt < m.npts(); ++pt) {
                cplx z = m.at(ray, s, pt);
                out += csv_row({std::to_string(ray), float17(t), float17(m.base_set[pt]),
                                float17(z.real()), float17(z.imag())});
            }
        }
    return out;
}

} // namespace trv
