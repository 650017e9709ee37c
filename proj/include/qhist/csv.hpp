#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qhist::csv {

// Shortest decimal form that round-trips to the same double.
std::string number(double value);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace qhist::csv
