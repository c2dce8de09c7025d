#pragma once

#include <string>

namespace embedgeo {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// RFC 4180 quoting for one CSV field.
std::string csv_field(const std::string& s);

}  // namespace embedgeo
