// feclab.hpp -- umbrella header for the whole library.

#pragma once

#include "feclab/arq.hpp"
#include "feclab/block_code.hpp"
#include "feclab/channel.hpp"
#include "feclab/coeff.hpp"
#include "feclab/errors.hpp"
#include "feclab/event_queue.hpp"
#include "feclab/gf256.hpp"
#include "feclab/linear_system.hpp"
#include "feclab/metrics.hpp"
#include "feclab/rate_control.hpp"
#include "feclab/scenario.hpp"
#include "feclab/sim.hpp"
#include "feclab/sliding.hpp"
#include "feclab/sweep.hpp"
#include "feclab/trace.hpp"
#include "feclab/traffic.hpp"
#include "feclab/wire.hpp"
