#pragma once

#include "mortal/core.hpp"
#include "mortal/envs.hpp"
#include "mortal/experiments.hpp"
#include "mortal/mixture.hpp"
#include "mortal/planner.hpp"
#include "mortal/semimeasure.hpp"
