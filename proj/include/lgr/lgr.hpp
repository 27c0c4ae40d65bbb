#pragma once

#include "lgr/agent.hpp"
#include "lgr/batch.hpp"
#include "lgr/common.hpp"
#include "lgr/mapping.hpp"
#include "lgr/planner.hpp"
#include "lgr/prompts.hpp"
#include "lgr/rankers.hpp"
#include "lgr/ranking.hpp"
#include "lgr/scenario.hpp"
#include "lgr/spl.hpp"
#include "lgr/world.hpp"
