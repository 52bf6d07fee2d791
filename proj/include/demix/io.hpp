#pragma once

#include "demix/deconv.hpp"
#include "demix/mixands.hpp"
#include <map>
#include <set>
#include <string>

namespace demix {

//! "k,count" CSV (header optional) or one raw integer per line; detected
//! from the first non-blank line.
EmpiricalCounts parse_histogram_text(const std::string& text);
EmpiricalCounts parse_histogram(const std::string& path);

//! As above but k may be negative (deconvolution data).
IntegerCounts parse_integer_histogram_text(const std::string& text);
IntegerCounts parse_integer_histogram(const std::string& path);

//! "k,prob" CSV; gaps between listed k are zero.
NoisePmf parse_noise_text(const std::string& text);
NoisePmf parse_noise(const std::string& path);

//! "k,count" with header, nonzero counts only.
std::string histogram_csv(const EmpiricalCounts& counts);

//! Flat key=value lines; '#' starts a comment. Keys outside `allowed` and
//! repeated keys are errors.
std::map<std::string, std::string> parse_config_text(const std::string& text, const std::set<std::string>& allowed);

//! 17 significant digits; NaN prints as NA.
std::string fmt_num(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

} // namespace demix
