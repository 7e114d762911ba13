#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace flowda::csv {

// RFC 4180 writer: quoted fields where needed, CRLF row terminators.
std::string escape(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest round-trip formatting for doubles, deterministic across runs.
std::string format(double value);
std::string format(int value);
std::string format(std::size_t value);

}  // namespace flowda::csv
