#pragma once

#include "t2inv/boundary.hpp"
#include "t2inv/builtin.hpp"
#include "t2inv/core.hpp"
#include "t2inv/curvature.hpp"
#include "t2inv/diagonal.hpp"
#include "t2inv/flow.hpp"
#include "t2inv/grid.hpp"
#include "t2inv/io.hpp"
#include "t2inv/metric.hpp"
#include "t2inv/orbit_space.hpp"
#include "t2inv/reduced.hpp"
#include "t2inv/smoothness.hpp"
#include "t2inv/solvers.hpp"
#include "t2inv/verifier.hpp"
