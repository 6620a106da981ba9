#pragma once

#include "rollsim/config.hpp"
#include "rollsim/engine.hpp"
#include "rollsim/errors.hpp"
#include "rollsim/failures.hpp"
#include "rollsim/kernel.hpp"
#include "rollsim/recovery.hpp"
#include "rollsim/report.hpp"
#include "rollsim/ring.hpp"
#include "rollsim/runtime.hpp"
#include "rollsim/stencil.hpp"
#include "rollsim/stores.hpp"
#include "rollsim/sweep.hpp"
#include "rollsim/tiling.hpp"
#include "rollsim/trace.hpp"
