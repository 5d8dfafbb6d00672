#pragma once

#include "configuration.hpp"
#include "crossing.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "firing_graph.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "neighborhood.hpp"
#include "rational.hpp"
#include "shape.hpp"
#include "synthesis.hpp"
