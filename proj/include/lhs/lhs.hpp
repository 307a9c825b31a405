#pragma once

#include "lhs/errors.hpp"
#include "lhs/linalg.hpp"
#include "lhs/model.hpp"
#include "lhs/integrator.hpp"
#include "lhs/diagnostics.hpp"
#include "lhs/guarantees.hpp"
#include "lhs/reductions.hpp"
