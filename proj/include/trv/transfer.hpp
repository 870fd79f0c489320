#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "trv/orbit.hpp"

namespace trv {

// Row/column indexing convention of an assembled transfer matrix: either the
// deduplicated image set g(P), or the label set J of pairs (i, j).
enum class transfer_index { set_indexed, label_indexed };

struct transfer_matrix {
    transfer_index index = transfer_index::set_indexed;
    int dim = 0;
    std::vector<cplx> entries;               // row-major dim x dim
    std::vector<double> set_points;          // set_indexed: elements of g(P), ascending
    std::vector<std::pair<int, int>> labels; // label_indexed: (i, j) pairs, j-major
    family_spec spec;                        // assembling family and parameter
    std::vector<double> w;

    cplx at(int r, int c) const { return entries[static_cast<std::size_t>(r) * dim + c]; }
};

// Constraint rho^exponent = multiplier carved out by a preperiodic relation:
// multiplier = Dg^{q-l}(c_l), exponent = q - l.
struct exceptional_constraint {
    int j = 0;
    double multiplier = 0;
    int exponent = 1;
};

struct transversality_certificate {
    cplx det_DR = 0;              // det of the Jacobian of the defect map at c_1
    cplx derivative_product = 0;  // prod_j Dg^{q_j-1}(c_{1,j})
    cplx Q = 0;                   // det_DR / derivative_product
    cplx det_D1 = 0;              // det D(1)
    double spectral_radius = 0;
    std::vector<cplx> eigenvalues; // sorted by (re, im)
    std::vector<exceptional_constraint> exceptional_rhos;
    bool positive = false;
    std::map<std::string, double> identity_residuals;
    std::vector<std::string> warnings;

    std::string to_json() const;
};

// Transfer operator on C^{#g(P)}: rows at critical points use the marked-point
// derivatives, all other rows divide through by Dg.
transfer_matrix assemble_A(const marked_orbit& orbit,
                           const std::vector<critical_relation>& relations);

// Labeled variant on C^{#J}; coincides with assemble_A entrywise (under the
// label -> set-point identification) whenever all labeled points are distinct.
transfer_matrix assemble_AJ(const marked_orbit& orbit,
                            const std::vector<critical_relation>& relations);

// Dense nu x nu matrix D(rho); D(0) = I.
std::vector<cplx> assemble_D(const marked_orbit& orbit,
                             const std::vector<critical_relation>& relations, cplx rho);

// Coefficients of det(I - rho*M) in rho, trailing near-zero terms stripped.
std::vector<cplx> det_poly(const transfer_matrix& m);

// Eigenvalues: reciprocal roots of det_poly plus zeros of multiplicity
// (dim - degree), sorted by (re, im).
std::vector<cplx> spectrum(const transfer_matrix& m);

std::vector<exceptional_constraint> exceptional_values(
    const marked_orbit& orbit, const std::vector<critical_relation>& relations);

bool is_exceptional(const std::vector<exceptional_constraint>& constraints, cplx rho,
                    double tol);

// nu x nu Jacobian of the defect map R at the critical-value vector w;
// complex-step differentiation where the family is analytic in w, central
// differences otherwise (the cubic chart involves a real cube root).
std::vector<cplx> jacobian_R(const family_spec& spec, const std::vector<double>& w,
                             const std::vector<critical_relation>& relations);

transversality_certificate certify(const family_spec& spec, const std::vector<double>& w,
                                   const std::vector<critical_relation>& relations);

// Parameter charts nu(v) with nu(v1) = c1 for the quadratic reparametrization
// identity det(1 - rho*A_nu) = [1 - rho(1 - v1 nu'(v1)/(2 c1))]/(1 - rho/2)
// * det(1 - rho*A).
enum class nu_chart { identity, affine, quadratic_critical };

struct reparametrize_report {
    double identity_residual = 0; // max over sampled rho
    cplx det_D_nu_1 = 0;          // D_nu(1); ~0 exactly when nu'(v1) = 0
    double v1 = 0;
    double nu_prime = 0;
};

reparametrize_report reparametrize_check(double c_star, nu_chart chart);

} // namespace trv
