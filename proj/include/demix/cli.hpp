#pragma once

#include "demix/simlab.hpp"
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace demix {

//! Dispatch `args` (without the program name). Exit codes: 0 success,
//! 2 validation or usage error, 1 runtime error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

//! Keys accepted by `simulate --config`.
const std::set<std::string>& sim_config_keys();

//! SimConfig from parsed key=value pairs.
SimConfig sim_config_from(const std::map<std::string, std::string>& kv);

//! Density spec on [a, b] (or the half-line when b is infinite):
//! uniform | beta:p,q | exp:rate | factory:alpha,C,r.
Density parse_density_spec(const std::string& spec,
                           const PowerSeriesFamily& family,
                           const MeasureSpec& measure);

//! pmf:v0,v1,... or pmf@offset:v0,v1,... ; `default_offset` applies to the first form.
IntegerPmf parse_pmf_spec(const std::string& spec, std::int64_t default_offset);

} // namespace demix
