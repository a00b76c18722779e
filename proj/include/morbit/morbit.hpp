#pragma once

#include "morbit/config.hpp"
#include "morbit/dynamics.hpp"
#include "morbit/geometry.hpp"
#include "morbit/invariants.hpp"
#include "morbit/model.hpp"
#include "morbit/parallel.hpp"
#include "morbit/quantum.hpp"
#include "morbit/rk.hpp"
#include "morbit/run.hpp"
#include "morbit/stereo.hpp"
#include "morbit/svg.hpp"
#include "morbit/sweep.hpp"
