#pragma once

#include <string>

#include "gmbayes/mixture.hpp"

namespace gmbayes {

// GMXB1 container: magic "GMXB1", a 4-byte little-endian header length, a
// JSON header listing the stored arrays as {name, shape, offset}, then the
// contiguous row-major float64 little-endian payloads.  Offsets are relative
// to the start of the payload section.  Factored models store weights, means
// and per-component factors; plain models store covariances instead.
// A save/load/save round trip is byte-identical.

void save_model(const std::string& path, const MixtureModel& model);
MixtureModel load_model(const std::string& path);

}  // namespace gmbayes
