#pragma once

#include <stdexcept>
#include <string>

namespace trv {

// Every failure mode the library reports.  Codes map 1:1 onto the JSON
// error objects emitted by the CLI.
enum class errc {
    domain_error,          // input outside the family's admissible domain
    non_real,              // non-integer exponent applied off the real line
    degenerate_chart,      // cubic critical values coincide
    no_solution,           // defining equation has no root in range
    escape,                // orbit left the dynamical interval
    incomparable,          // kneading order undecided (prefix of terminated)
    not_finite,            // critical orbit did not close up
    degenerate_derivative, // |Dg| below floor on a marked orbit
    ambiguous_relation,    // two closure candidates within tolerance
    no_sign_change,        // bracket endpoints have equal signs
    lower_period_collision,// root has smaller minimal period than requested
    divide_by_zero,        // vanishing Dg in an operator row
    overflow,              // coefficient magnitude blew past 1e100
    non_convergence,       // iterative solver hit its sweep cap
    injectivity_violation, // motion collides two base points
    branch_loss,           // continuation lost its branch
    degenerate_point,      // angle geometry at z in {0,1}
    no_unit_eigenvalue,    // order-invariance precondition failed
    degenerate_input,      // zero vector or similarly empty input
    seed_not_on_curve,     // continuation seed outside Newton basin
    step_failure,          // corrector failed after all step halvings
    rank_deficient,        // curve gradient below rank tolerance
    io_error,              // file could not be written
};

const char* errc_name(errc c);

// Library exception: carries a code so callers (and the CLI) can match on
// the failure kind without parsing the message.
class error : public std::runtime_error {
  public:
    error(errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    errc code() const { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
    throw error(code, what);
}

} // namespace trv
