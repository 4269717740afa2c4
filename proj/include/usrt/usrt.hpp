#pragma once

#include "usrt/alternatives.hpp"
#include "usrt/commands.hpp"
#include "usrt/design.hpp"
#include "usrt/error.hpp"
#include "usrt/format.hpp"
#include "usrt/normal.hpp"
#include "usrt/null_boundary.hpp"
#include "usrt/paired_data.hpp"
#include "usrt/parallel.hpp"
#include "usrt/power.hpp"
#include "usrt/quadrature.hpp"
#include "usrt/random.hpp"
#include "usrt/rank_walk.hpp"
#include "usrt/score.hpp"
#include "usrt/tester.hpp"
