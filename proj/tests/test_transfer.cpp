#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "json.hpp"
#include "trv/polyroots.hpp"
#include "trv/transfer.hpp"

using namespace trv;

namespace {

family_spec quad() { return family_spec{}; }

struct setup {
    marked_orbit orbit;
    std::vector<critical_relation> rels;
};

setup make(const family_spec& spec, const std::vector<double>& w) {
    setup s{critical_orbit(spec, w, 256), {}};
    s.rels = detect_relations(s.orbit);
    return s;
}

// Max residual of det(I - rho A_J) = det D(rho) over a 40-point grid in
// the disk |rho| <= 2.
double grid_residual(const setup& s) {
    const transfer_matrix AJ = assemble_AJ(s.orbit, s.rels);
    const std::vector<cplx> PJ = det_poly(AJ);
    double worst = 0;
    for (int ir = 1; ir <= 5; ++ir)
        for (int ia = 0; ia < 8; ++ia) {
            const cplx rho = std::polar(0.4 * ir, 2.0 * M_PI * ia / 8.0);
            const cplx lhs = poly_eval(PJ, rho);
            const cplx rhs =
                det_dense(assemble_D(s.orbit, s.rels, rho), s.orbit.spec.nu());
            worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
        }
    return worst;
}

// Entrywise comparison of A and A_J after mapping labels onto set points.
double identification_gap(const setup& s) {
    const transfer_matrix A = assemble_A(s.orbit, s.rels);
    const transfer_matrix AJ = assemble_AJ(s.orbit, s.rels);
    REQUIRE(A.dim == AJ.dim);
    double worst = 0;
    for (int r = 0; r < AJ.dim; ++r)
        for (int c = 0; c < AJ.dim; ++c) {
            const auto [ri, rj] = AJ.labels[r];
            const auto [ci, cj] = AJ.labels[c];
            const int rs = s.orbit.set_index[rj][ri];
            const int cs = s.orbit.set_index[cj][ci];
            REQUIRE(rs >= 0);
            REQUIRE(cs >= 0);
            worst = std::max(worst, std::abs(AJ.at(r, c) - A.at(rs, cs)));
        }
    return worst;
}

} // namespace

TEST_CASE("transfer matrix for the two-cycle parameter") {
    const setup s = make(quad(), {-1.0});
    const transfer_matrix A = assemble_A(s.orbit, s.rels);
    REQUIRE(A.dim == 2);
    CHECK(A.set_points[0] == doctest::Approx(-1.0));
    CHECK(A.set_points[1] == doctest::Approx(0.0));
    // Row at -1 divides through by Dg(-1) = -2; row at the critical point 0
    // is zero because the critical point of z^2 + w does not move.
    CHECK(A.at(0, 0).real() == doctest::Approx(0.5));
    CHECK(A.at(0, 1).real() == doctest::Approx(-0.5));
    CHECK(std::abs(A.at(1, 0)) == doctest::Approx(0.0));
    CHECK(std::abs(A.at(1, 1)) == doctest::Approx(0.0));

    const std::vector<cplx> P = det_poly(A);
    REQUIRE(P.size() == 2);
    CHECK(P[0].real() == doctest::Approx(1.0));
    CHECK(P[1].real() == doctest::Approx(-0.5));

    const std::vector<cplx> eig = spectrum(A);
    REQUIRE(eig.size() == 2);
    CHECK(std::abs(eig[0]) == doctest::Approx(0.0));
    CHECK(eig[1].real() == doctest::Approx(0.5));
    CHECK(std::abs(eig[1].imag()) < 1e-13);

    const std::vector<cplx> D1 = assemble_D(s.orbit, s.rels, cplx(1));
    REQUIRE(D1.size() == 1);
    CHECK(D1[0].real() == doctest::Approx(0.5));
    const std::vector<cplx> D0 = assemble_D(s.orbit, s.rels, cplx(0));
    CHECK(D0[0].real() == doctest::Approx(1.0));

    const std::vector<cplx> J = jacobian_R(quad(), {-1.0}, s.rels);
    REQUIRE(J.size() == 1);
    CHECK(J[0].real() == doctest::Approx(-1.0).epsilon(1e-12));

    CHECK(exceptional_values(s.orbit, s.rels).empty());
    CHECK(identification_gap(s) < 1e-14);
    CHECK(grid_residual(s) < 1e-12);
}

TEST_CASE("fixed critical point gives the one-dimensional zero operator") {
    const setup s = make(quad(), {0.0});
    const transfer_matrix A = assemble_A(s.orbit, s.rels);
    REQUIRE(A.dim == 1);
    CHECK(std::abs(A.at(0, 0)) == doctest::Approx(0.0));
    const std::vector<cplx> P = det_poly(A);
    REQUIRE(P.size() == 1);
    CHECK(P[0].real() == doctest::Approx(1.0));
    const std::vector<cplx> eig = spectrum(A);
    REQUIRE(eig.size() == 1);
    CHECK(std::abs(eig[0]) == doctest::Approx(0.0));

    const transfer_matrix AJ = assemble_AJ(s.orbit, s.rels);
    REQUIRE(AJ.dim == 1);
    REQUIRE(AJ.labels[0] == std::make_pair(0, 0));
    CHECK(std::abs(AJ.at(0, 0)) == doctest::Approx(0.0));

    const transversality_certificate cert = certify(quad(), {0.0}, s.rels);
    CHECK(cert.Q.real() == doctest::Approx(1.0));
    CHECK(cert.positive);
    CHECK(cert.identity_residuals.at("drho_identity") < 1e-14);
}

TEST_CASE("preperiodic parameter -2: operator, labels, exceptional value") {
    const setup s = make(quad(), {-2.0});
    REQUIRE(s.rels.size() == 1);
    REQUIRE_FALSE(s.rels[0].periodic_to_critical);
    CHECK(s.rels[0].l == 2);
    CHECK(s.rels[0].q == 3);

    const transfer_matrix A = assemble_A(s.orbit, s.rels);
    REQUIRE(A.dim == 2); // g(P) = {-2, 2}
    CHECK(A.at(0, 0).real() == doctest::Approx(0.25));
    CHECK(A.at(0, 1).real() == doctest::Approx(-0.25));
    CHECK(A.at(1, 0).real() == doctest::Approx(-0.25));
    CHECK(A.at(1, 1).real() == doctest::Approx(0.25));

    const transfer_matrix AJ = assemble_AJ(s.orbit, s.rels);
    REQUIRE(AJ.dim == 2); // labels (1,0) and (2,0); no i=0 label
    CHECK(AJ.labels[0] == std::make_pair(1, 0));
    CHECK(AJ.labels[1] == std::make_pair(2, 0));
    CHECK(identification_gap(s) < 1e-14);

    const std::vector<cplx> P = det_poly(A);
    REQUIRE(P.size() == 2);
    CHECK(P[1].real() == doctest::Approx(-0.5));

    const auto exc = exceptional_values(s.orbit, s.rels);
    REQUIRE(exc.size() == 1);
    CHECK(exc[0].multiplier == doctest::Approx(4.0));
    CHECK(exc[0].exponent == 1);
    CHECK(is_exceptional(exc, cplx(4.0), 1e-6));
    CHECK_FALSE(is_exceptional(exc, cplx(1.0), 1e-6)); // rho = 1 safe: |mult| > 1
    CHECK_FALSE(is_exceptional(exc, cplx(-4.0), 1e-6));

    const transversality_certificate cert = certify(quad(), {-2.0}, s.rels);
    CHECK(cert.det_DR.real() == doctest::Approx(-8.0).epsilon(1e-12));
    CHECK(cert.derivative_product.real() == doctest::Approx(-16.0));
    CHECK(cert.Q.real() == doctest::Approx(0.5));
    CHECK(cert.det_D1.real() == doctest::Approx(0.5));
    CHECK(cert.positive);
    CHECK(cert.spectral_radius == doctest::Approx(0.5));
    CHECK(cert.identity_residuals.at("drho_identity") < 1e-12);
    CHECK(cert.identity_residuals.at("prop43_rootsets") < 1e-10);
    // The closed form only applies to periodic critical orbits.
    CHECK(cert.identity_residuals.count("closed_form_detpoly") == 0);
    CHECK(grid_residual(s) < 1e-12);
}

TEST_CASE("superstable period 3: closed-form determinant and certificate") {
    const double c3 = solve_superstable(quad(), 3, -1.79, -1.70);
    const setup s = make(quad(), {c3});
    const transfer_matrix A = assemble_A(s.orbit, s.rels);
    REQUIRE(A.dim == 3);

    const double D1 = 2.0 * s.orbit.pts[0][1];
    const double D2 = 2.0 * s.orbit.pts[0][2];
    const std::vector<cplx> P = det_poly(A);
    REQUIRE(P.size() == 3);
    CHECK(std::abs(P[0] - 1.0) < 1e-12);
    CHECK(std::abs(P[1] - 1.0 / D1) < 1e-10);
    CHECK(std::abs(P[2] - 1.0 / (D1 * D2)) < 1e-10);

    const transversality_certificate cert = certify(quad(), {c3}, s.rels);
    CHECK(cert.identity_residuals.at("closed_form_detpoly") < 1e-10);
    CHECK(cert.identity_residuals.at("drho_identity") < 1e-8);
    CHECK(cert.identity_residuals.at("prop43_rootsets") < 1e-8);
    CHECK(cert.Q.real() == doctest::Approx(1.0 + 1.0 / D1 + 1.0 / (D1 * D2)));
    CHECK(cert.positive);
    CHECK(cert.spectral_radius < 1.0);
    CHECK(cert.warnings.empty());
    CHECK(grid_residual(s) < 1e-10);

    // Serialized certificate is valid JSON with the advertised shape.
    const auto j = nlohmann::json::parse(cert.to_json());
    CHECK(j["checks"].contains("drho_identity"));
    CHECK(j["checks"].contains("prop43_rootsets"));
    CHECK(j["checks"].contains("closed_form_detpoly"));
    CHECK(j["eigenvalues"].size() == 3);
    CHECK(j["eigenvalues"][0].size() == 2);
    CHECK(j["positive"].get<bool>());
}

TEST_CASE("degenerate flat-family parameter has eigenvalue one and Q ~ 0") {
    family_spec spec;
    spec.kind = family_kind::flat_additive;
    spec.ell = 1.0;
    spec.b = 2.0 * std::exp(1.0);
    const setup s = make(spec, {-1.0});
    REQUIRE(s.rels.size() == 1);
    CHECK_FALSE(s.rels[0].periodic_to_critical);
    CHECK(s.rels[0].l == 2);
    CHECK(s.rels[0].q == 3);

    const transfer_matrix A = assemble_A(s.orbit, s.rels);
    REQUIRE(A.dim == 2);
    const std::vector<cplx> P = det_poly(A);
    REQUIRE(P.size() == 2);
    CHECK(std::abs(P[1] + 1.0) < 1e-12); // det(I - rho A) = 1 - rho

    const transversality_certificate cert = certify(spec, {-1.0}, s.rels);
    CHECK(std::abs(cert.Q) < 1e-6);
    CHECK(cert.spectral_radius == doctest::Approx(1.0));
    CHECK_FALSE(cert.positive);
    CHECK(std::abs(cert.det_D1) < 1e-10);
    // Both sides of the unit-eigenvalue equivalence are degenerate here, so
    // the consistency warning must stay silent.
    for (const auto& wmsg : cert.warnings) CHECK(wmsg.find("equivalence") == std::string::npos);
    CHECK(grid_residual(s) < 1e-12);
}

TEST_CASE("cubic parameter: chart differentiation and identities") {
    family_spec spec;
    spec.kind = family_kind::cubic;
    const auto [w1, w2] = cubic_to_critical_values(0.5, 0.75);
    const setup s = make(spec, {w1, w2});
    REQUIRE(s.rels.size() == 2);

    const std::vector<cplx> J = jacobian_R(spec, {w1, w2}, s.rels);
    REQUIRE(J.size() == 4);
    // R_0(w) = w_0 - p_0(w) with dp_0/dw = (-1/(12 a^2), 1/(12 a^2)) at a = 1/2.
    CHECK(J[0].real() == doctest::Approx(4.0 / 3.0).epsilon(1e-8));
    CHECK(J[1].real() == doctest::Approx(-1.0 / 3.0).epsilon(1e-8));

    const transversality_certificate cert = certify(spec, {w1, w2}, s.rels);
    CHECK(cert.identity_residuals.at("drho_identity") < 1e-8);
    CHECK(cert.identity_residuals.at("prop43_rootsets") < 1e-8);
    CHECK(cert.identity_residuals.count("closed_form_detpoly") == 0);
    CHECK(std::abs(cert.Q.imag()) < 1e-10);
    CHECK(identification_gap(s) < 1e-14);
    CHECK(grid_residual(s) < 1e-8);

    const transfer_matrix A = assemble_A(s.orbit, s.rels);
    for (const cplx& e : A.entries) CHECK(std::abs(e.imag()) <= 1e-12);
}

TEST_CASE("certified batch over the superstable parameters up to period 8") {
    const enumerate_result found = enumerate_superstable(quad(), -2.0, 0.25, 8);
    REQUIRE(found.hits.size() >= 38);
    double max_radius = 0;
    for (const auto& hit : found.hits) {
        const setup s = make(quad(), {hit.c});
        const transversality_certificate cert = certify(quad(), {hit.c}, s.rels);
        CHECK(cert.identity_residuals.at("drho_identity") < 1e-8);
        CHECK(cert.identity_residuals.at("closed_form_detpoly") < 1e-10);
        CHECK(cert.identity_residuals.at("prop43_rootsets") < 1e-8);
        CHECK(cert.positive);
        CHECK(cert.Q.real() > 0.0);
        CHECK(cert.spectral_radius < 1.0);
        if (hit.q >= 2) {
            // 1/2 sits in the spectrum for every periodic critical orbit of
            // period at least two.
            bool has_half = false;
            for (cplx e : cert.eigenvalues)
                if (std::abs(e - cplx(0.5)) < 1e-8) has_half = true;
            CHECK(has_half);
        }
        const transfer_matrix A = assemble_A(s.orbit, s.rels);
        for (const cplx& e : A.entries) CHECK(std::abs(e.imag()) <= 1e-12);
        max_radius = std::max(max_radius, cert.spectral_radius);
    }
    MESSAGE("max spectral radius over q<=8: ", max_radius);
    CHECK(max_radius < 1.0);
}

TEST_CASE("quadratic reparametrization identity") {
    const double c3 = solve_superstable(quad(), 3, -1.79, -1.70);
    for (double c : {-1.0, c3}) {
        const reparametrize_report ident = reparametrize_check(c, nu_chart::identity);
        CHECK(ident.identity_residual < 1e-8);
        const reparametrize_report aff = reparametrize_check(c, nu_chart::affine);
        CHECK(aff.identity_residual < 1e-8);
        CHECK(std::abs(aff.det_D_nu_1) > 1e-3);
        const reparametrize_report crit = reparametrize_check(c, nu_chart::quadratic_critical);
        CHECK(crit.identity_residual < 1e-8);
        CHECK(std::abs(crit.det_D_nu_1) < 1e-8);
        CHECK(crit.nu_prime == 0.0);
    }
    // The fixed critical point has vanishing critical value: chart degenerates.
    CHECK_THROWS_AS(reparametrize_check(0.0, nu_chart::identity), error);
    try {
        reparametrize_check(0.0, nu_chart::identity);
    } catch (const error& e) {
        CHECK(e.code() == errc::degenerate_chart);
    }
}

TEST_CASE("jacobian_R rejects incomplete relation sets") {
    CHECK_THROWS_AS(jacobian_R(quad(), {-1.0}, {}), error);
}
