#pragma once

#include "prophet/config.hpp"
#include "prophet/distribution.hpp"
#include "prophet/estimation.hpp"
#include "prophet/experiments.hpp"
#include "prophet/harness.hpp"
#include "prophet/instance_stats.hpp"
#include "prophet/oracle.hpp"
#include "prophet/rng.hpp"
#include "prophet/rules.hpp"
#include "prophet/tagged_value.hpp"
