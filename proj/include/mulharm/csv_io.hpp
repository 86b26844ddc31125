#pragma once

#include <iosfwd>

#include "mulharm/torus_grid.hpp"

namespace mulharm::csv {

// Header "i,re,im" (n = 1) or "i0,i1,re,im" (n = 2); one row per grid point
// in flat order, values printed with 17 significant digits.
void write(std::ostream& out, const SampledFunction& f);
// Header "k,re,im" / "k0,k1,re,im" with signed integer frequencies.
void write(std::ostream& out, const SpectrumFunction& f);

// The grid is inferred from the index columns; rows may come in any order
// but every grid point must appear exactly once.
SampledFunction read_sampled(std::istream& in);
SpectrumFunction read_spectrum(std::istream& in);

}  // namespace mulharm::csv
