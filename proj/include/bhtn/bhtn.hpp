#pragma once

#include "bhtn/bench.hpp"
#include "bhtn/bmf.hpp"
#include "bhtn/bool_core.hpp"
#include "bhtn/gen.hpp"
#include "bhtn/htn.hpp"
#include "bhtn/hubo.hpp"
#include "bhtn/io.hpp"
#include "bhtn/remote.hpp"
#include "bhtn/sampling.hpp"
#include "bhtn/solvers.hpp"
#include "bhtn/util.hpp"
