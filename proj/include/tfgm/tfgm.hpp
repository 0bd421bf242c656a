//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "tfgm/error.hpp"
#include "tfgm/matrix.hpp"
#include "tfgm/graph.hpp"
#include "tfgm/operators.hpp"
#include "tfgm/embed.hpp"
#include "tfgm/assign.hpp"
#include "tfgm/match.hpp"
#include "tfgm/supervise.hpp"
#include "tfgm/synth.hpp"
#include "tfgm/oracle.hpp"
#include "tfgm/io.hpp"
#include "tfgm/bench.hpp"
