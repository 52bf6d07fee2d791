#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace demix {

// Working type for recurrences, coefficient tables and quadrature sums.
using Real = long double;

// Gram-route solves.
using QuadReal = boost::multiprecision::cpp_bin_float_quad;

// Moment-based oracle; Hankel matrices lose roughly a digit per row.
using OracleReal = boost::multiprecision::cpp_bin_float_50;

} // namespace demix
