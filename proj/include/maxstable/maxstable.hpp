#ifndef MAXSTABLE_MAXSTABLE_HPP
#define MAXSTABLE_MAXSTABLE_HPP

#include "maxstable/convert.hpp"
#include "maxstable/estimate.hpp"
#include "maxstable/extract.hpp"
#include "maxstable/gaussian.hpp"
#include "maxstable/grid.hpp"
#include "maxstable/io.hpp"
#include "maxstable/normal.hpp"
#include "maxstable/quadrature.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/shape.hpp"
#include "maxstable/simulate.hpp"
#include "maxstable/stats.hpp"
#include "maxstable/variogram.hpp"

#endif
