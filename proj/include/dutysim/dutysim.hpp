#pragma once

#include "dutysim/config.hpp"
#include "dutysim/energy.hpp"
#include "dutysim/engine.hpp"
#include "dutysim/environment.hpp"
#include "dutysim/node_state.hpp"
#include "dutysim/policies.hpp"
#include "dutysim/qtable.hpp"
#include "dutysim/random.hpp"
#include "dutysim/report.hpp"
#include "dutysim/retrain_model.hpp"
