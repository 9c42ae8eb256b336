#pragma once

// Serial reference implementations. They favour the most literal reading of
// the model over speed and are used to cross-check the parallel kernels.

#include "lidarsim/convolve.hpp"
#include "lidarsim/simulate.hpp"

#include <vector>

namespace lidarsim::reference
{

/// Brute-force signal of one beam: double loop over kernel cells and the bins
/// of each cell's pixel range interval.
std::vector<double> oracle_direct(const GBuffer& g, const AngularGrid& kernel, const Beam& beam,
                                  const SimConfig& config);

/// Plain four-loop centered correlation over the whole image.
Plane correlate_serial(const Plane& in, const AngularGrid& kernel);

/// Range stacking written literally: every slice, full image, serial.
StackResult range_stacking_serial(const GBuffer& g, const AngularGrid& kernel, const SimConfig& config);

} // namespace lidarsim::reference
