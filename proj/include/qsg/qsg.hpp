#pragma once

// Umbrella header for the qsg solver library.

#include "qsg/baselines.hpp"
#include "qsg/dual_heuristic.hpp"
#include "qsg/errors.hpp"
#include "qsg/experiments.hpp"
#include "qsg/hybrid.hpp"
#include "qsg/instance.hpp"
#include "qsg/instance_io.hpp"
#include "qsg/numerics.hpp"
#include "qsg/objective.hpp"
#include "qsg/oracle.hpp"
#include "qsg/pwla.hpp"
#include "qsg/search.hpp"
#include "qsg/verify.hpp"
