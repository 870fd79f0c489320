#include "trv/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>

#include "json.hpp"
#include "trv/polyroots.hpp"
#include "trv/rng.hpp"

namespace trv {

namespace {

// Relation lookup by physical critical index.
std::vector<const critical_relation*> relation_table(
    const marked_orbit& orbit, const std::vector<critical_relation>& relations) {
    std::vector<const critical_relation*> table(orbit.pts.size(), nullptr);
    for (const auto& rel : relations) {
        if (rel.j < 0 || rel.j >= static_cast<int>(table.size()))
            fail(errc::domain_error, "relation index out of range");
        table[rel.j] = &rel;
    }
    for (const auto* rel : table)
        if (!rel) fail(errc::domain_error, "missing relation for a critical point");
    return table;
}

double norm1(const std::vector<cplx>& coeffs) {
    double s = 0;
    for (cplx c : coeffs) s += std::abs(c);
    return s;
}

// Derivative of g^n at c_{1,j}: product of the stored orbit derivatives.
double dg_pow(const marked_orbit& orbit, int j, int n_from, int n_to) {
    double p = 1.0;
    for (int i = n_from; i <= n_to; ++i) p *= orbit.D[j][i];
    return p;
}

bool analytic_in_w(const family_spec& spec) {
    auto integral = [](double x) { return std::abs(x - std::round(x)) < 1e-12; };
    switch (spec.kind) {
        case family_kind::monic_additive: return true;
        case family_kind::power_additive:
            return integral(spec.ell_minus) && integral(spec.ell_plus);
        case family_kind::flat_additive: return integral(spec.ell);
        case family_kind::multiplicative:
            return spec.base != mult_base::flat_unimodal || integral(spec.ell);
        case family_kind::cubic: return false;
    }
    return false;
}

// Defect of the j-th critical relation at the (complex) critical-value
// vector w: G^{q-1}(w_j) minus the marked target.
cplx defect_R(const family_spec& spec, const std::vector<cplx>& w,
              const critical_relation& rel) {
    cplx z = w[rel.j];
    for (int m = 1; m <= rel.q - 1; ++m) z = eval(spec, w, z);
    if (rel.periodic_to_critical) return z - critical_points(spec, w)[rel.mu];
    cplx y = w[rel.j];
    for (int m = 1; m <= rel.l - 1; ++m) y = eval(spec, w, y);
    return z - y;
}

} // namespace

transfer_matrix assemble_A(const marked_orbit& orbit,
                           const std::vector<critical_relation>& relations) {
    relation_table(orbit, relations); // validates coverage
    const int nu = static_cast<int>(orbit.pts.size());
    const int dim = static_cast<int>(orbit.gP.size());

    std::vector<cplx> wc(orbit.w.begin(), orbit.w.end());
    std::vector<cplx> critc = critical_points(orbit.spec, wc);

    transfer_matrix m;
    m.index = transfer_index::set_indexed;
    m.dim = dim;
    m.entries.assign(static_cast<std::size_t>(dim) * dim, cplx(0));
    m.set_points = orbit.gP;
    m.spec = orbit.spec;
    m.w = orbit.w;

    auto entry = [&](int r, int c) -> cplx& {
        return m.entries[static_cast<std::size_t>(r) * dim + c];
    };

    for (int r = 0; r < dim; ++r) {
        const double x = orbit.gP[r];
        // Critical points take priority: their image is pinned to the marked
        // point, so the row is the marked-point derivative row.
        int jc = -1;
        for (int j = 0; j < nu; ++j)
            if (std::abs(x - critc[j].real()) < orbit.dedup_tol) {
                jc = j;
                break;
            }
        if (jc >= 0) {
            for (int k = 0; k < nu; ++k)
                entry(r, orbit.set_index[k][1]) +=
                    marked_point_deriv(orbit.spec, wc, jc, k);
            continue;
        }
        // Otherwise locate an interior label (i, j), 1 <= i < q_j, for x and
        // divide the lifted displacement through by Dg(x).
        int jj = -1, ii = -1;
        for (int j = 0; j < nu && jj < 0; ++j)
            for (int i = 1; i < orbit.q_of(j); ++i)
                if (orbit.set_index[j][i] == r) {
                    jj = j;
                    ii = i;
                    break;
                }
        if (jj < 0) fail(errc::domain_error, "image point has no interior orbit label");
        const double dg = orbit.D[jj][ii];
        if (dg == 0.0) fail(errc::divide_by_zero, "Dg vanishes on the image set");
        entry(r, orbit.set_index[jj][ii + 1]) += 1.0 / dg;
        for (int k = 0; k < nu; ++k)
            entry(r, orbit.set_index[k][1]) -= orbit.L[jj][ii][k] / dg;
    }
    return m;
}

transfer_matrix assemble_AJ(const marked_orbit& orbit,
                            const std::vector<critical_relation>& relations) {
    const auto rel_of = relation_table(orbit, relations);
    const int nu = static_cast<int>(orbit.pts.size());

    std::vector<bool> mu_image(nu, false);
    for (const auto& rel : relations)
        if (rel.periodic_to_critical) mu_image[rel.mu] = true;

    transfer_matrix m;
    m.index = transfer_index::label_indexed;
    m.spec = orbit.spec;
    m.w = orbit.w;
    for (int j = 0; j < nu; ++j)
        for (int i = (mu_image[j] ? 0 : 1); i <= rel_of[j]->q - 1; ++i)
            m.labels.push_back({i, j});
    const int dim = static_cast<int>(m.labels.size());
    m.dim = dim;
    m.entries.assign(static_cast<std::size_t>(dim) * dim, cplx(0));

    auto col_of = [&](int i, int j) -> int {
        // Wrap the closing label back onto its marked target.
        if (i == rel_of[j]->q) {
            if (rel_of[j]->periodic_to_critical) {
                i = 0;
                j = rel_of[j]->mu;
            } else {
                i = rel_of[j]->l;
            }
        }
        for (int c = 0; c < dim; ++c)
            if (m.labels[c] == std::make_pair(i, j)) return c;
        fail(errc::domain_error, "label set does not close up");
    };
    auto entry = [&](int r, int c) -> cplx& {
        return m.entries[static_cast<std::size_t>(r) * dim + c];
    };

    std::vector<cplx> wc(orbit.w.begin(), orbit.w.end());
    for (int r = 0; r < dim; ++r) {
        const auto [i, j] = m.labels[r];
        if (i == 0) {
            for (int k = 0; k < nu; ++k)
                entry(r, col_of(1, k)) += marked_point_deriv(orbit.spec, wc, j, k);
            continue;
        }
        const double dg = orbit.D[j][i];
        if (dg == 0.0) fail(errc::divide_by_zero, "Dg vanishes on the labeled orbit");
        entry(r, col_of(i + 1, j)) += 1.0 / dg;
        for (int k = 0; k < nu; ++k) entry(r, col_of(1, k)) -= orbit.L[j][i][k] / dg;
    }
    return m;
}

std::vector<cplx> assemble_D(const marked_orbit& orbit,
                             const std::vector<critical_relation>& relations, cplx rho) {
    if (!std::isfinite(rho.real()) || !std::isfinite(rho.imag()))
        fail(errc::domain_error, "rho must be finite");
    const auto rel_of = relation_table(orbit, relations);
    const int nu = static_cast<int>(orbit.pts.size());
    std::vector<cplx> wc(orbit.w.begin(), orbit.w.end());

    // L^m_{j,k} = sum_{n=1}^m rho^n L_k(c_{n,j}) / Dg^n(c_{1,j}).
    auto L_sum = [&](int j, int k, int mmax) {
        cplx s = 0, rp = 1;
        double dg = 1;
        for (int n = 1; n <= mmax; ++n) {
            rp *= rho;
            dg *= orbit.D[j][n];
            s += rp * orbit.L[j][n][k] / dg;
        }
        return s;
    };

    std::vector<cplx> D(static_cast<std::size_t>(nu) * nu, cplx(0));
    for (int j = 0; j < nu; ++j) {
        const auto& rel = *rel_of[j];
        for (int k = 0; k < nu; ++k) {
            cplx v = (j == k) ? cplx(1) : cplx(0);
            v += L_sum(j, k, rel.q - 1);
            if (rel.periodic_to_critical) {
                v -= std::pow(rho, rel.q) * marked_point_deriv(orbit.spec, wc, rel.mu, k) /
                     dg_pow(orbit, j, 1, rel.q - 1);
            } else {
                const cplx head = std::pow(rho, rel.q - rel.l) /
                                  dg_pow(orbit, j, rel.l, rel.q - 1);
                v -= head * (L_sum(j, k, rel.l - 1) + ((j == k) ? cplx(1) : cplx(0)));
            }
            D[static_cast<std::size_t>(j) * nu + k] = v;
        }
    }
    return D;
}

std::vector<cplx> det_poly(const transfer_matrix& m) {
    if (m.dim > 64) fail(errc::domain_error, "matrix dimension exceeds 64");
    std::vector<cplx> coeffs = char_poly(m.entries, m.dim);
    double peak = 0;
    for (cplx c : coeffs) peak = std::max(peak, std::abs(c));
    while (coeffs.size() > 1 && std::abs(coeffs.back()) <= 1e-12 * peak) coeffs.pop_back();
    return coeffs;
}

std::vector<cplx> spectrum(const transfer_matrix& m) {
    const std::vector<cplx> coeffs = det_poly(m);
    std::vector<cplx> eig;
    for (cplx r : poly_roots(coeffs)) eig.push_back(1.0 / r);
    const int zeros = m.dim - (static_cast<int>(coeffs.size()) - 1);
    for (int i = 0; i < zeros; ++i) eig.push_back(cplx(0));
    std::sort(eig.begin(), eig.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return eig;
}

std::vector<exceptional_constraint> exceptional_values(
    const marked_orbit& orbit, const std::vector<critical_relation>& relations) {
    std::vector<exceptional_constraint> out;
    for (const auto& rel : relations) {
        if (rel.periodic_to_critical) continue;
        exceptional_constraint c;
        c.j = rel.j;
        c.exponent = rel.q - rel.l;
        c.multiplier = dg_pow(orbit, rel.j, rel.l, rel.q - 1);
        out.push_back(c);
    }
    return out;
}

bool is_exceptional(const std::vector<exceptional_constraint>& constraints, cplx rho,
                    double tol) {
    for (const auto& c : constraints) {
        const cplx p = std::pow(rho, c.exponent);
        if (std::abs(p - c.multiplier) < tol * (1.0 + std::abs(c.multiplier))) return true;
    }
    return false;
}

std::vector<cplx> jacobian_R(const family_spec& spec, const std::vector<double>& w,
                             const std::vector<critical_relation>& relations) {
    const int nu = spec.nu();
    if (static_cast<int>(w.size()) != nu)
        fail(errc::domain_error, "parameter vector has wrong dimension");
    std::vector<const critical_relation*> rel_of(nu, nullptr);
    for (const auto& rel : relations) rel_of[rel.j] = &rel;
    for (const auto* rel : rel_of)
        if (!rel) fail(errc::domain_error, "missing relation for a critical point");

    std::vector<cplx> J(static_cast<std::size_t>(nu) * nu, cplx(0));
    if (analytic_in_w(spec)) {
        const double h = 1e-20;
        for (int k = 0; k < nu; ++k) {
            std::vector<cplx> wp(w.begin(), w.end());
            wp[k] += cplx(0, h);
            for (int j = 0; j < nu; ++j)
                J[static_cast<std::size_t>(j) * nu + k] =
                    defect_R(spec, wp, *rel_of[j]).imag() / h;
        }
    } else {
        double scale = 1.0;
        for (double x : w) scale = std::max(scale, std::abs(x));
        const double h = 1e-6 * scale;
        for (int k = 0; k < nu; ++k) {
            std::vector<cplx> wp(w.begin(), w.end()), wm(w.begin(), w.end());
            wp[k] += h;
            wm[k] -= h;
            for (int j = 0; j < nu; ++j)
                J[static_cast<std::size_t>(j) * nu + k] =
                    (defect_R(spec, wp, *rel_of[j]) - defect_R(spec, wm, *rel_of[j])) /
                    (2.0 * h);
        }
    }
    return J;
}

transversality_certificate certify(const family_spec& spec, const std::vector<double>& w,
                                   const std::vector<critical_relation>& relations) {
    const double cert_tol = 1e-8;
    const marked_orbit orbit = critical_orbit(spec, w, 512);
    const auto rel_of = relation_table(orbit, relations);
    const int nu = spec.nu();

    transversality_certificate cert;
    const transfer_matrix A = assemble_A(orbit, relations);
    const std::vector<cplx> PA = det_poly(A);
    cert.eigenvalues = spectrum(A);
    for (cplx e : cert.eigenvalues)
        cert.spectral_radius = std::max(cert.spectral_radius, std::abs(e));
    cert.exceptional_rhos = exceptional_values(orbit, relations);

    cert.det_DR = det_dense(jacobian_R(spec, w, relations), nu);
    cert.derivative_product = 1.0;
    for (int j = 0; j < nu; ++j)
        cert.derivative_product *= dg_pow(orbit, j, 1, rel_of[j]->q - 1);
    cert.Q = cert.det_DR / cert.derivative_product;
    cert.det_D1 = det_dense(assemble_D(orbit, relations, cplx(1)), nu);

    cert.identity_residuals["drho_identity"] =
        std::abs(cert.det_DR - cert.derivative_product * cert.det_D1) /
        (1.0 + std::abs(cert.det_DR));

    // Closed form for a single critical point with a periodic orbit in an
    // additive family: det(I - rho A) = sum_i rho^i / Dg^i(c_1).
    const bool additive = spec.kind == family_kind::monic_additive ||
                          spec.kind == family_kind::power_additive ||
                          spec.kind == family_kind::flat_additive;
    if (nu == 1 && additive && rel_of[0]->periodic_to_critical) {
        const int q = rel_of[0]->q;
        double res = 0, dg = 1;
        for (int i = 0; i < q; ++i) {
            if (i >= 1) dg *= orbit.D[0][i];
            const cplx expected = 1.0 / dg;
            const cplx actual = i < static_cast<int>(PA.size()) ? PA[i] : cplx(0);
            res = std::max(res, std::abs(actual - expected) / (1.0 + std::abs(expected)));
        }
        for (int i = q; i < static_cast<int>(PA.size()); ++i)
            res = std::max(res, std::abs(PA[i]));
        cert.identity_residuals["closed_form_detpoly"] = res;
    }

    // det(I - rho A) and det D(rho) share root sets away from the exceptional
    // constraints; det D(rho) is a polynomial of degree <= sum q_j, recovered
    // by interpolation at roots of unity.
    {
        int N = 0;
        for (int j = 0; j < nu; ++j) N += rel_of[j]->q;
        const int M = N + 1;
        std::vector<cplx> samples(M);
        for (int m = 0; m < M; ++m) {
            const double ang = 2.0 * 3.14159265358979323846 * m / M;
            samples[m] = det_dense(
                assemble_D(orbit, relations, std::polar(1.0, ang)), nu);
        }
        std::vector<cplx> PD(M);
        for (int k = 0; k < M; ++k) {
            cplx acc = 0;
            for (int m = 0; m < M; ++m) {
                const double ang = -2.0 * 3.14159265358979323846 * m * k / M;
                acc += samples[m] * std::polar(1.0, ang);
            }
            PD[k] = acc / static_cast<double>(M);
        }
        double peak = 0;
        for (cplx c : PD) peak = std::max(peak, std::abs(c));
        while (PD.size() > 1 && std::abs(PD.back()) <= 1e-10 * peak) PD.pop_back();

        auto cross = [&](const std::vector<cplx>& roots_of, const std::vector<cplx>& other) {
            double res = 0;
            const int deg = static_cast<int>(other.size()) - 1;
            for (cplx r : roots_of) {
                if (is_exceptional(cert.exceptional_rhos, r, 1e-6)) continue;
                const double sc = norm1(other) * std::pow(std::max(1.0, std::abs(r)), deg);
                res = std::max(res, std::abs(poly_eval(other, r)) / sc);
            }
            return res;
        };
        double res = std::max(cross(poly_roots(PA), PD), cross(poly_roots(PD), PA));

        // Spot checks at random non-exceptional rho: zero/nonzero status of
        // the two determinants must agree.
        rng gen(424242u);
        const int degA = static_cast<int>(PA.size()) - 1;
        const int degD = static_cast<int>(PD.size()) - 1;
        for (int s = 0; s < 20; ++s) {
            cplx rho;
            do {
                rho = std::polar(2.0 * std::sqrt(gen.u01()),
                                 2.0 * 3.14159265358979323846 * gen.u01());
            } while (is_exceptional(cert.exceptional_rhos, rho, 1e-3));
            const double a = std::abs(poly_eval(PA, rho));
            const double b = std::abs(poly_eval(PD, rho));
            const double za =
                1e-8 * norm1(PA) * std::pow(std::max(1.0, std::abs(rho)), degA);
            const double zb =
                1e-8 * norm1(PD) * std::pow(std::max(1.0, std::abs(rho)), degD);
            if ((a < za) != (b < zb)) res = std::max(res, 1.0);
        }
        cert.identity_residuals["prop43_rootsets"] = res;
    }

    // Unit-eigenvalue test: 1 in the spectrum iff the defect Jacobian is
    // singular (both sides measured relative to their natural scales).
    {
        const bool unit_eig =
            std::abs(poly_eval(PA, cplx(1))) < cert_tol * (1.0 + norm1(PA));
        const bool dr_singular =
            std::abs(cert.det_DR) < cert_tol * (1.0 + std::abs(cert.derivative_product));
        if (unit_eig != dr_singular)
            cert.warnings.push_back("unit-eigenvalue equivalence violated");
    }

    cert.positive = cert.Q.real() > cert_tol && std::abs(cert.Q.imag()) < cert_tol;
    for (const auto& rel : relations)
        if (rel.near_parabolic)
            cert.warnings.push_back("NearParabolic: relation at critical point " +
                                    std::to_string(rel.j) +
                                    " has multiplier within 1e-6 of 1");
    return cert;
}

std::string transversality_certificate::to_json() const {
    nlohmann::ordered_json j;
    auto put_cplx = [](cplx z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); };
    j["det_DR"] = put_cplx(det_DR);
    j["derivative_product"] = put_cplx(derivative_product);
    j["Q"] = put_cplx(Q);
    j["det_D1"] = put_cplx(det_D1);
    j["spectral_radius"] = spectral_radius;
    j["eigenvalues"] = nlohmann::ordered_json::array();
    for (cplx e : eigenvalues) j["eigenvalues"].push_back(put_cplx(e));
    j["exceptional_rhos"] = nlohmann::ordered_json::array();
    for (const auto& c : exceptional_rhos)
        j["exceptional_rhos"].push_back(nlohmann::ordered_json{
            {"j", c.j}, {"multiplier", c.multiplier}, {"exponent", c.exponent}});
    j["positive"] = positive;
    j["checks"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : identity_residuals) j["checks"][name] = value;
    j["warnings"] = warnings;
    return j.dump(2);
}

reparametrize_report reparametrize_check(double c_star, nu_chart chart) {
    family_spec spec; // monic quadratic
    const marked_orbit orbit = critical_orbit(spec, {c_star}, 512);
    const auto relations = detect_relations(orbit);
    if (!relations[0].periodic_to_critical)
        fail(errc::domain_error, "superstable (periodic critical orbit) parameter required");
    const int q = relations[0].q;
    const double c1 = orbit.pts[0][1];
    if (std::abs(c1) < 1e-12)
        fail(errc::degenerate_chart, "critical value vanishes; chart is degenerate");

    reparametrize_report rep;
    switch (chart) {
        case nu_chart::identity:
            rep.v1 = c1;
            rep.nu_prime = 1;
            break;
        case nu_chart::affine:
            rep.v1 = c1 - 0.25;
            rep.nu_prime = 1;
            break;
        case nu_chart::quadratic_critical:
            rep.v1 = c1 - 0.5;
            rep.nu_prime = 0;
            break;
    }
    if (std::abs(rep.v1) < 1e-12)
        fail(errc::degenerate_chart, "chart base point v1 = 0");

    // g_nu(z) = (c1/v1) z^2 + v1 conjugates g by z -> (c1/v1) z; its critical
    // orbit is the rescaled one and L_nu(z) = phi' z^2 + 1.
    const double s = c1 / rep.v1;
    const double phi_prime = (rep.nu_prime * rep.v1 - c1) / (rep.v1 * rep.v1);
    std::vector<double> v(q + 1);
    for (int n = 0; n <= q; ++n) v[n] = orbit.pts[0][n] / s;
    auto dg_nu = [&](double z) { return 2.0 * s * z; };
    auto L_nu = [&](double z) { return phi_prime * z * z + 1.0; };

    transfer_matrix Anu;
    Anu.dim = q;
    Anu.entries.assign(static_cast<std::size_t>(q) * q, cplx(0));
    Anu.spec = spec;
    Anu.w = {c_star};
    for (int n = 1; n < q; ++n) {
        const double dg = dg_nu(v[n]);
        if (dg == 0.0) fail(errc::divide_by_zero, "Dg vanishes on the rescaled orbit");
        Anu.entries[static_cast<std::size_t>(n) * q + (n + 1) % q] += 1.0 / dg;
        Anu.entries[static_cast<std::size_t>(n) * q + 1] -= L_nu(v[n]) / dg;
    }

    const std::vector<cplx> PA = det_poly(assemble_A(orbit, relations));
    const std::vector<cplx> Pnu = det_poly(Anu);
    const double head = 1.0 - 0.5 * rep.v1 * rep.nu_prime / c1;

    rng gen(9917u);
    double res = 0;
    for (int i = 0; i < 20; ++i) {
        const cplx rho = std::polar(1.5 * std::sqrt(gen.u01()),
                                    2.0 * 3.14159265358979323846 * gen.u01());
        const cplx factor = (1.0 - rho * head) / (1.0 - rho / 2.0);
        const cplx lhs = poly_eval(Pnu, rho);
        const cplx rhs = factor * poly_eval(PA, rho);
        res = std::max(res, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
    rep.identity_residual = res;

    cplx d1 = 1.0;
    double dgprod = 1.0;
    for (int n = 1; n < q; ++n) {
        dgprod *= dg_nu(v[n]);
        d1 += L_nu(v[n]) / dgprod;
    }
    rep.det_D_nu_1 = d1;
    return rep;
}

} // namespace trv
