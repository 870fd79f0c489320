#include "trv/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace trv {

const char* errc_name(errc code) {
    switch (code) {
        case errc::domain_error: return "DomainError";
        case errc::non_real: return "NonRealError";
        case errc::degenerate_chart: return "DegenerateChart";
        case errc::no_solution: return "NoSolutionError";
        case errc::escape: return "EscapeError";
        case errc::incomparable: return "IncomparableError";
        case errc::not_finite: return "NotFiniteError";
        case errc::degenerate_derivative: return "DegenerateDerivative";
        case errc::ambiguous_relation: return "AmbiguousRelation";
        case errc::no_sign_change: return "NoSignChange";
        case errc::lower_period_collision: return "LowerPeriodCollision";
        case errc::divide_by_zero: return "DivideByZero";
        case errc::overflow: return "OverflowError";
        case errc::non_convergence: return "NonConvergence";
        case errc::injectivity_violation: return "InjectivityViolation";
        case errc::branch_loss: return "BranchLoss";
        case errc::degenerate_point: return "DegeneratePoint";
        case errc::no_unit_eigenvalue: return "NoUnitEigenvalue";
        case errc::degenerate_input: return "DegenerateInput";
        case errc::seed_not_on_curve: return "SeedNotOnCurve";
        case errc::step_failure: return "StepFailure";
        case errc::rank_deficient: return "RankDeficient";
        case errc::io_error: return "IoError";
    }
    return "UnknownError";
}

std::string float17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string csv_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_error, "cannot open file for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(errc::io_error, "cannot open file for writing: " + path);
    out << content;
    if (!out) fail(errc::io_error, "short write: " + path);
}

} // namespace trv
