#pragma once

#include "program.hpp"
#include "parser.hpp"
#include "grounding.hpp"
#include "oracle.hpp"
#include "instantiate.hpp"
#include "solver.hpp"
#include "bench.hpp"
