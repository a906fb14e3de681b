#pragma once

#include "chlab/diagnostics.hpp"
#include "chlab/error.hpp"
#include "chlab/fft.hpp"
#include "chlab/field.hpp"
#include "chlab/operators.hpp"
#include "chlab/profiles.hpp"
#include "chlab/random.hpp"
#include "chlab/solver.hpp"
#include "chlab/weights.hpp"
