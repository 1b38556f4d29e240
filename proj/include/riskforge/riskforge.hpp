#pragma once

#include "riskforge/analysis.hpp"
#include "riskforge/calculus.hpp"
#include "riskforge/dsl.hpp"
#include "riskforge/interval.hpp"
#include "riskforge/json_io.hpp"
#include "riskforge/model.hpp"
#include "riskforge/oracle.hpp"
#include "riskforge/synergy.hpp"
