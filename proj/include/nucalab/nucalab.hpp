#pragma once

/// @file nucalab.hpp
/// @brief Umbrella header.

#include "nucalab/gf.hpp"
#include "nucalab/rule.hpp"
#include "nucalab/config.hpp"
#include "nucalab/nuca.hpp"
#include "nucalab/duality.hpp"
#include "nucalab/sampling.hpp"
#include "nucalab/inverse.hpp"
#include "nucalab/verdict.hpp"
#include "nucalab/analysis.hpp"
#include "nucalab/shadowing.hpp"
#include "nucalab/io.hpp"
#include "nucalab/commands.hpp"
