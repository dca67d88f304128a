#pragma once

#include "finitekelly/dist.hpp"
#include "finitekelly/divergence.hpp"
#include "finitekelly/kelly.hpp"
#include "finitekelly/optimize.hpp"
#include "finitekelly/parallel.hpp"
#include "finitekelly/resource.hpp"
#include "finitekelly/rng.hpp"
#include "finitekelly/sideinfo.hpp"
#include "finitekelly/sim.hpp"
#include "finitekelly/types.hpp"
#include "finitekelly/utility.hpp"
