#pragma once

#include "baseline.hpp"
#include "datasets.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "filter_stack.hpp"
#include "filtration.hpp"
#include "geometry.hpp"
#include "kdtree.hpp"
#include "metrics.hpp"
#include "observations.hpp"
#include "particle.hpp"
#include "random.hpp"
#include "snapshot.hpp"
#include "trajectory_io.hpp"
#include "tree_io.hpp"
#include "weighting.hpp"
