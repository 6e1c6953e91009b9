#ifndef HEAVYTAIL_HEAVYTAIL_HPP
#define HEAVYTAIL_HEAVYTAIL_HPP

#include "heavytail/numerics.hpp"
#include "heavytail/sample.hpp"
#include "heavytail/distributions.hpp"
#include "heavytail/extremes.hpp"
#include "heavytail/estimation.hpp"
#include "heavytail/gof.hpp"
#include "heavytail/diagnostics.hpp"
#include "heavytail/report.hpp"
#include "heavytail/synthetic.hpp"

#endif  // HEAVYTAIL_HEAVYTAIL_HPP
