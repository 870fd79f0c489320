#pragma once

#include <complex>
#include <string>
#include <vector>

#include "trv/errors.hpp"

namespace trv {

// Shortest 17-significant-digit decimal form; reproducible across runs
// (used for all CSV/SVG numeric output so reruns are byte-identical).
std::string float17(double x);

// Join a CSV row from already-formatted cells (no quoting: the emitters
// only ever produce numeric or token cells).
std::string csv_row(const std::vector<std::string>& cells);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace trv
