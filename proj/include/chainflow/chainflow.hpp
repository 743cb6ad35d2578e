#pragma once

#include "chainflow/branch_bound.hpp"
#include "chainflow/core.hpp"
#include "chainflow/instance.hpp"
#include "chainflow/instance_io.hpp"
#include "chainflow/mip.hpp"
#include "chainflow/mip_builder.hpp"
#include "chainflow/mps.hpp"
#include "chainflow/plan_io.hpp"
#include "chainflow/simplex.hpp"
#include "chainflow/simulate.hpp"
#include "chainflow/study.hpp"
