#pragma once

#include "optsample/analytic.hpp"
#include "optsample/brute_force.hpp"
#include "optsample/policies.hpp"
#include "optsample/profit.hpp"
#include "optsample/simulator.hpp"
#include "optsample/transport.hpp"
