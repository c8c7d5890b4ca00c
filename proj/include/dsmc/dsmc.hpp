#pragma once

// Umbrella header: the whole library.

#include "dsmc/adaptation.hpp"
#include "dsmc/adc.hpp"
#include "dsmc/core.hpp"
#include "dsmc/engine/control.hpp"
#include "dsmc/engine/plant.hpp"
#include "dsmc/errors.hpp"
#include "dsmc/sim/config.hpp"
#include "dsmc/sim/io.hpp"
#include "dsmc/sim/metrics.hpp"
#include "dsmc/sim/runner.hpp"
#include "dsmc/sim/scenario.hpp"
#include "dsmc/sim/trajectory.hpp"
