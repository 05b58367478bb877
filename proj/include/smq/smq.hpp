#pragma once

// Umbrella header.
#include "smq/avg_overshoot.hpp"
#include "smq/calibration_file.hpp"
#include "smq/dc.hpp"
#include "smq/error.hpp"
#include "smq/likelihood.hpp"
#include "smq/magnitude.hpp"
#include "smq/quantile.hpp"
#include "smq/smq_csv.hpp"
#include "smq/spectrum.hpp"
#include "smq/synthetic.hpp"
#include "smq/tick.hpp"
