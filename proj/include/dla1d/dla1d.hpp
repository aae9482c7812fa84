#pragma once

#include "dla1d/aggregate.hpp"
#include "dla1d/alias.hpp"
#include "dla1d/analysis.hpp"
#include "dla1d/experiment.hpp"
#include "dla1d/half_line.hpp"
#include "dla1d/numerics.hpp"
#include "dla1d/occupancy.hpp"
#include "dla1d/oracle.hpp"
#include "dla1d/renewal.hpp"
#include "dla1d/rng.hpp"
#include "dla1d/steps.hpp"
#include "dla1d/tree.hpp"
#include "dla1d/walker.hpp"
