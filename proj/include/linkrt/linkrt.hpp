#pragma once

// Umbrella header for the linkrt library.

#include "linkrt/costmodel.hpp"
#include "linkrt/kb.hpp"
#include "linkrt/kvfile.hpp"
#include "linkrt/ls.hpp"
#include "linkrt/mapping.hpp"
#include "linkrt/measures.hpp"
#include "linkrt/planner.hpp"
#include "linkrt/rng.hpp"
#include "linkrt/trainer.hpp"
