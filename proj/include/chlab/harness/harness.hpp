#pragma once

#include "chlab/harness/config.hpp"
#include "chlab/harness/run.hpp"
#include "chlab/harness/scenario.hpp"
