#pragma once

#include "twoopt/bounds.hpp"
#include "twoopt/census.hpp"
#include "twoopt/chord_disjoint.hpp"
#include "twoopt/errors.hpp"
#include "twoopt/exact.hpp"
#include "twoopt/gaussian.hpp"
#include "twoopt/graph.hpp"
#include "twoopt/graph_io.hpp"
#include "twoopt/monte_carlo.hpp"
#include "twoopt/polytope.hpp"
#include "twoopt/reduction.hpp"
#include "twoopt/rng.hpp"
